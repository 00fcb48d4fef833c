"""Command-line front end: ``nnrank <subcommand> ...``.

Exit status is 0 on success, 1 on a domain error (or a rejected
certificate) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bounds import canonical_decomposition, nnrank_interval
from .census import Distribution, ExperimentConfig, run_census
from .core import NegativeEntryError, Shape, ShapeError, read_tensor_json
from .generic import generic_rank, jacobian_generic_rank
from .ntf import NtfConfig
from .witness import (
    OutsideBall,
    RankOutOfRange,
    RetriesExhausted,
    certificate_from_json,
    certificate_to_json,
    certify_max_rank,
    typical_rank_witness,
    verify_typicality_certificate,
    witness_tensor,
)


class _Failure(Exception):
    """Result computed, but the command should exit with status 1."""


def _shape(text: str) -> Shape:
    try:
        return Shape.parse(text)
    except ShapeError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--output", type=Path, default=None,
                        help="write results here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default=None)

    parser = argparse.ArgumentParser(
        prog="nnrank",
        description="Bounds and certificates for nonnegative tensor ranks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grank", parents=[common], help="generic rank of a format")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--trials", type=_positive, default=3)

    p = sub.add_parser("nnrank", parents=[common], help="nonnegative rank interval")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--restarts", type=_positive, default=NtfConfig.restarts)

    p = sub.add_parser("decompose", parents=[common],
                       help="fiber decomposition of a tensor")
    p.add_argument("--input", type=Path, required=True)

    p = sub.add_parser("witness", parents=[common], help="witness tensor T0 and radius")
    p.add_argument("--shape", type=_shape, required=True)

    p = sub.add_parser("certify-max", parents=[common],
                       help="certify maximal nonnegative rank by ball membership")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--shape", type=_shape, required=True)

    p = sub.add_parser("typical", parents=[common], help="typicality certificate")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--r", type=_positive, required=True)

    p = sub.add_parser("verify", parents=[common], help="check a typicality certificate")
    p.add_argument("--cert", required=True, help="certificate file, or - for stdin")

    p = sub.add_parser("census", parents=[common], help="Monte Carlo rank census")
    p.add_argument("--shape", type=_shape, required=True)
    p.add_argument("--samples", type=_positive, required=True)
    p.add_argument("--dist", default="uniform01",
                   help="uniform01, exponential or indicator-noise(SIGMA)")
    p.add_argument("--restarts", type=_positive, default=NtfConfig.restarts)
    p.add_argument("--workers", type=_positive, default=1)
    return parser


def _cmd_grank(args):
    g = generic_rank(args.shape, args.seed, args.trials)
    rep = jacobian_generic_rank(args.shape, g, args.trials, args.seed)
    if args.format == "json":
        return _dump({"dims": list(args.shape.dims),
                      "fiber_mode": args.shape.fiber_mode() + 1,
                      "generic_rank": g, "jacobian_report": rep.to_json_obj()})
    lines = [str(g), f"fiber mode: {args.shape.fiber_mode() + 1}"]
    lines += [f"{k}: {v}" for k, v in rep.to_json_obj().items()]
    return "\n".join(lines) + "\n"


def _cmd_nnrank(args):
    t = read_tensor_json(args.input, nonnegative=True)
    try:
        cert = certify_max_rank(t)
    except OutsideBall:
        cert = None
    iv = nnrank_interval(t, NtfConfig(restarts=args.restarts, seed=args.seed),
                         certificate=cert)
    if args.format == "json":
        obj = {"dims": list(t.shape.dims), "fiber_mode": t.shape.fiber_mode() + 1,
               "slice_bound": t.shape.slice_bound()}
        obj.update(iv.to_json_obj())
        return _dump(obj)
    return f"{iv}\nfiber mode: {t.shape.fiber_mode() + 1}\n"


def _cmd_decompose(args):
    t = read_tensor_json(args.input, nonnegative=True)
    dec = canonical_decomposition(t)
    if args.format == "text":
        lines = [f"{dec.r} terms, fiber mode {t.shape.fiber_mode() + 1}"]
        lines += [" x ".join(str(v.tolist()) for v in term.factors) for term in dec.terms]
        return "\n".join(lines) + "\n"
    obj = dec.to_json_obj()
    obj["fiber_mode"] = t.shape.fiber_mode() + 1
    obj["r"] = dec.r
    return _dump(obj)


def _cmd_witness(args):
    ball = witness_tensor(args.shape)
    if args.format == "text":
        return (f"fiber mode: {args.shape.fiber_mode() + 1}\n"
                f"support: {[list(i) for i in ball.support]}\n"
                f"epsilon: {ball.exact_radius} ({ball.radius!r})\n")
    return _dump(ball.to_json_obj())


def _cmd_certify_max(args):
    t = read_tensor_json(args.input)
    cert = certify_max_rank(t, args.shape)
    if args.format == "text":
        return (f"certified nonnegative rank {cert.certified_rank} "
                f"(distance {cert.distance!r}, margin {cert.margin!r}, "
                f"fiber mode {args.shape.fiber_mode() + 1})\n")
    return _dump(cert.to_json_obj())


def _cmd_typical(args):
    cert = typical_rank_witness(args.shape, args.r, args.seed)
    if args.format == "text":
        rep = cert.jacobian_report
        return (f"r = {cert.r} is a typical nonnegative rank of {args.shape} "
                f"(fiber mode {args.shape.fiber_mode() + 1}); ball margin "
                f"{cert.ball_margin!r}; jacobian rank {rep.achieved_rank}/{rep.jac_rows}\n")
    return certificate_to_json(cert)


def _cmd_verify(args):
    text = sys.stdin.read() if args.cert == "-" else Path(args.cert).read_text()
    try:
        cert = certificate_from_json(text)
    except ValueError as exc:
        raise _Failure(f"false: unparseable certificate ({exc})\n")
    verdict = verify_typicality_certificate(cert)
    if args.format == "json":
        out = _dump({"valid": verdict.ok, "reasons": list(verdict.reasons)})
    else:
        out = f"{verdict}\n"
    if not verdict:
        raise _Failure(out)
    return out


def _cmd_census(args):
    cfg = ExperimentConfig(
        shape=args.shape,
        samples=args.samples,
        distribution=Distribution.parse(args.dist),
        seed=args.seed,
        ntf=NtfConfig(restarts=args.restarts, seed=args.seed),
        workers=args.workers,
    )
    report = run_census(cfg)
    if args.output is not None:
        csv_path = args.output if args.output.suffix == ".csv" \
            else args.output.with_suffix(".csv")
        csv_path.write_text(report.to_csv())
        csv_path.with_suffix(".json").write_text(report.to_json())
        args.output = None
    if args.format == "csv":
        return report.to_csv()
    if args.format == "json":
        return report.to_json()
    return report.to_text()


_COMMANDS = {
    "grank": (_cmd_grank, "text"),
    "nnrank": (_cmd_nnrank, "text"),
    "decompose": (_cmd_decompose, "json"),
    "witness": (_cmd_witness, "json"),
    "certify-max": (_cmd_certify_max, "json"),
    "typical": (_cmd_typical, "json"),
    "verify": (_cmd_verify, "text"),
    "census": (_cmd_census, "text"),
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    func, default_format = _COMMANDS[args.command]
    if args.format is None:
        args.format = default_format
    if args.format == "csv" and args.command != "census":
        parser.error("--format csv is only available for census")
    status = 0
    try:
        out = func(args)
    except _Failure as exc:
        out, status = str(exc), 1
    except (OutsideBall, RankOutOfRange, RetriesExhausted, NegativeEntryError,
            ShapeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output is not None:
        args.output.write_text(out)
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
