"""Maximal-rank witness ball and typicality certificates.

The witness tensor ``T0`` is the 0/1 indicator of the multi-indices whose
coordinate sum is divisible by the fiber-mode size. Every nonnegative tensor
strictly within ``1/(3N)`` of ``T0`` has nonnegative rank exactly ``N`` (the
slice bound). A typicality certificate for ``r`` packages an ``N``-term
nonnegative decomposition whose sum lies in that ball, split into a head of
``r`` terms and a tail, together with an exact full-row-rank Jacobian check
at the head. Verification re-derives every claim from the factor data alone.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    Decomposition,
    DenseTensor,
    NegativeEntryError,
    Rank1Term,
    Shape,
    ShapeError,
    eval_cp,
    frobenius_distance,
)
from .exact import bareiss_rank, integer_rows, rational_rank
from .generic import JacobianReport, generic_rank, jacobian_matrix, param_cap

__all__ = [
    "OutsideBall",
    "RankOutOfRange",
    "RetriesExhausted",
    "WitnessBall",
    "MaxRankCertificate",
    "TypicalityCertificate",
    "Verdict",
    "index_set",
    "witness_tensor",
    "certify_max_rank",
    "typical_rank_witness",
    "verify_typicality_certificate",
    "certificate_to_json",
    "certificate_from_json",
]

#: fractional bits kept when snapping perturbed factors to dyadic rationals
SNAP_BITS = 30
MAX_RETRIES = 10


class OutsideBall(ValueError):
    """The tensor is not strictly inside the witness ball (no certificate)."""


class RankOutOfRange(ValueError):
    """r is outside ``[generic rank, slice bound]``."""


class RetriesExhausted(RuntimeError):
    pass


def index_set(shape: Shape) -> list[tuple[int, ...]]:
    """1-based multi-indices with coordinate sum divisible by the fiber-mode size.

    There is exactly one per fiber, hence ``shape.slice_bound()`` of them.

    >>> index_set(Shape((2, 2, 2)))
    [(1, 1, 2), (1, 2, 1), (2, 1, 1), (2, 2, 2)]
    """
    n_fib = shape.dims[shape.fiber_mode()]
    return [
        idx
        for idx in itertools.product(*(range(1, n + 1) for n in shape.dims))
        if sum(idx) % n_fib == 0
    ]


@dataclass(frozen=True, eq=False)
class WitnessBall:
    shape: Shape
    support: tuple[tuple[int, ...], ...]
    center: DenseTensor
    radius: float

    @property
    def exact_radius(self) -> Fraction:
        return Fraction(1, 3 * self.shape.slice_bound())

    def to_json_obj(self) -> dict:
        return {
            "dims": list(self.shape.dims),
            "fiber_mode": self.shape.fiber_mode() + 1,
            "slice_bound": self.shape.slice_bound(),
            "support": [list(i) for i in self.support],
            "center": self.center.values.tolist(),
            "radius": self.radius,
            "radius_exact": str(self.exact_radius),
        }


def witness_tensor(shape: Shape) -> WitnessBall:
    """``T0`` and its certified radius ``1/(3N)``."""
    support = index_set(shape)
    arr = np.zeros(shape.dims)
    for idx in support:
        arr[tuple(i - 1 for i in idx)] = 1.0
    return WitnessBall(
        shape=shape,
        support=tuple(support),
        center=DenseTensor(shape, arr.ravel()),
        radius=1.0 / (3 * shape.slice_bound()),
    )


def _exact_sq_distance(values: Sequence, center: Sequence) -> Fraction:
    return sum(((Fraction(v) - Fraction(c)) ** 2 for v, c in zip(values, center)),
               Fraction(0))


@dataclass(frozen=True, eq=False)
class MaxRankCertificate:
    shape: Shape
    tensor: DenseTensor
    distance: float
    margin: float
    certified_rank: int

    def to_json_obj(self) -> dict:
        return {
            "dims": list(self.shape.dims),
            "fiber_mode": self.shape.fiber_mode() + 1,
            "tensor": self.tensor.values.tolist(),
            "distance": self.distance,
            "margin": self.margin,
            "certified_rank": self.certified_rank,
        }


def certify_max_rank(t: DenseTensor, shape: Shape | None = None) -> MaxRankCertificate:
    """Certify ``nnrank t = N`` by ball membership around ``T0``.

    Membership is decided in exact rational arithmetic. Raises
    :class:`OutsideBall` when ``t`` is not strictly inside; that only means
    no certificate, not that the rank differs from ``N``.
    """
    shape = t.shape if shape is None else shape
    if t.shape != shape:
        raise ShapeError(f"tensor shape {t.shape} != {shape}")
    if not t.is_nonnegative():
        raise NegativeEntryError("tensor has negative entries")
    ball = witness_tensor(shape)
    dist = frobenius_distance(t, ball.center)
    inside = _exact_sq_distance(t.values.tolist(), ball.center.values.tolist()) \
        < ball.exact_radius ** 2
    if not inside:
        raise OutsideBall(f"distance {dist:.6g} >= radius {ball.radius:.6g}")
    return MaxRankCertificate(
        shape=shape,
        tensor=t,
        distance=dist,
        margin=ball.radius - dist,
        certified_rank=shape.slice_bound(),
    )


@dataclass(frozen=True, eq=False)
class TypicalityCertificate:
    shape: Shape
    r: int
    head_terms: Decomposition
    tail_terms: Decomposition
    witness: DenseTensor
    total: DenseTensor
    ball_margin: float
    jacobian_report: JacobianReport


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reasons: tuple[str, ...] = field(default=())

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "true" if self.ok else "false: " + "; ".join(self.reasons)


def _snap(x: np.ndarray) -> np.ndarray:
    return np.round(x * 2.0 ** SNAP_BITS) / 2.0 ** SNAP_BITS


def _head_jacobian_rank(shape: Shape, head: Decomposition) -> int:
    scale = 2 ** SNAP_BITS
    # integer numerators: scaling factor vectors rescales columns only
    terms = [
        [np.array([int(round(x * scale)) for x in v], dtype=object) for v in t.factors]
        for t in head.terms
    ]
    return bareiss_rank(jacobian_matrix(shape.dims, terms).tolist())


def typical_rank_witness(
    shape: Shape, r: int, seed: int = 0, grank: int | None = None
) -> TypicalityCertificate:
    """Build a certificate that ``r`` is a typical nonnegative rank of ``shape``.

    The N basis terms of ``T0`` are perturbed entrywise by uniform(0, delta)
    noise and snapped to 30-bit dyadic rationals; delta starts at
    ``eps/(4 N d)`` and halves until the sum lies within ``eps/2`` of ``T0``.
    The first r terms (in :func:`index_set` order) form the head. Attempt
    ``a`` uses ``default_rng([seed, a])``; up to 10 retries are made if the
    head Jacobian is rank deficient.
    """
    n_max = shape.slice_bound()
    if not 1 <= r <= n_max:
        raise RankOutOfRange(f"r = {r} outside [1, {n_max}] for shape {shape}")
    if grank is None:
        grank = generic_rank(shape, seed)
    if r < grank:
        raise RankOutOfRange(
            f"r = {r} is below the generic rank {grank} of {shape}: the Jacobian "
            f"rank is capped at {param_cap(shape, r)} < {shape.total()} rows"
        )
    ball = witness_tensor(shape)
    eps = ball.radius
    d = shape.order
    basis = []
    for idx in ball.support:
        factors = []
        for i, n in zip(idx, shape.dims):
            e = np.zeros(n)
            e[i - 1] = 1.0
            factors.append(e)
        basis.append(factors)

    for attempt in range(MAX_RETRIES + 1):
        rng = np.random.default_rng([seed, attempt])
        delta = eps / (4 * n_max * d)
        while True:
            terms = [
                Rank1Term([_snap(v + rng.uniform(0.0, delta, v.size)) for v in factors])
                for factors in basis
            ]
            full = Decomposition(shape, tuple(terms))
            total = eval_cp(full)
            dist = frobenius_distance(total, ball.center)
            if dist <= eps / 2:
                break
            delta /= 2
        head = Decomposition(shape, tuple(terms[:r]))
        tail = Decomposition(shape, tuple(terms[r:]))
        rank = _head_jacobian_rank(shape, head)
        if rank == shape.total():
            report = JacobianReport(
                shape=shape,
                r=r,
                point_seed=seed,
                jac_rows=shape.total(),
                jac_cols=r * sum(shape.dims),
                achieved_rank=rank,
                full_row_rank=True,
                trials=attempt + 1,
            )
            return TypicalityCertificate(
                shape=shape,
                r=r,
                head_terms=head,
                tail_terms=tail,
                witness=eval_cp(head),
                total=total,
                ball_margin=eps - dist,
                jacobian_report=report,
            )
    raise RetriesExhausted(
        f"no full-rank head Jacobian for {shape}, r = {r} after {MAX_RETRIES} retries"
    )


# -- verification -----------------------------------------------------------
# Everything below recomputes from the factor entries in exact arithmetic and
# deliberately avoids the numpy evaluation and Bareiss paths used above.


def _exact_terms(dec: Decomposition) -> list[list[list[Fraction]]]:
    return [[[Fraction(float(x)) for x in v] for v in t.factors] for t in dec.terms]


def _exact_eval(dims: Sequence[int], terms) -> list[Fraction]:
    out = []
    for idx in itertools.product(*(range(n) for n in dims)):
        s = Fraction(0)
        for factors in terms:
            p = Fraction(1)
            for v, i in zip(factors, idx):
                p *= v[i]
            s += p
        out.append(s)
    return out


def _exact_jacobian(dims: Sequence[int], terms) -> list[list[Fraction]]:
    rows = []
    for idx in itertools.product(*(range(n) for n in dims)):
        row = []
        for factors in terms:
            for j, n in enumerate(dims):
                rest = Fraction(1)
                for m, (v, i) in enumerate(zip(factors, idx)):
                    if m != j:
                        rest *= v[i]
                row.extend(rest if l == idx[j] else Fraction(0) for l in range(n))
        rows.append(row)
    return rows


def _close(stored: np.ndarray, exact: Sequence[Fraction], tol: float = 1e-12) -> bool:
    if stored.size != len(exact):
        return False
    ref = np.array([float(x) for x in exact])
    return bool(np.all(np.abs(stored - ref) <= tol * max(1.0, float(np.max(np.abs(ref)))
                                                          if ref.size else 1.0)))


def verify_typicality_certificate(cert: TypicalityCertificate) -> Verdict:
    """Independently re-check every claim carried by ``cert``."""
    reasons: list[str] = []
    shape = cert.shape
    n_max = shape.slice_bound()
    try:
        if cert.head_terms.shape != shape or cert.tail_terms.shape != shape:
            return Verdict(False, ("shape mismatch",))
        if cert.witness.shape != shape or cert.total.shape != shape:
            return Verdict(False, ("shape mismatch",))
    except AttributeError:
        return Verdict(False, ("malformed certificate",))

    head = _exact_terms(cert.head_terms)
    tail = _exact_terms(cert.tail_terms)
    if cert.r != len(head) or not 1 <= cert.r <= n_max:
        reasons.append("term count")
    if len(head) + len(tail) != n_max:
        reasons.append("term count")
    if any(x < 0 for t in head + tail for v in t for x in v):
        reasons.append("negative entry")

    dims = shape.dims
    w = _exact_eval(dims, head)
    tail_vals = _exact_eval(dims, tail)
    total = [a + b for a, b in zip(w, tail_vals)]
    if not _close(cert.witness.values, w):
        reasons.append("witness mismatch")
    if not _close(cert.total.values, total):
        reasons.append("total mismatch")

    ball = witness_tensor(shape)
    center = ball.center.values.tolist()
    r2 = ball.exact_radius ** 2
    sq = _exact_sq_distance(total, center)
    sq_stored = _exact_sq_distance(cert.total.values.tolist(), center)
    if not (sq < r2 and sq_stored < r2):
        reasons.append("outside ball")
    elif abs(cert.ball_margin - (ball.radius - math.sqrt(float(sq)))) > 1e-12:
        reasons.append("ball margin mismatch")

    rep = cert.jacobian_report
    rows = shape.total()
    if (rep.r != cert.r or rep.jac_rows != rows
            or rep.jac_cols != cert.r * sum(dims) or not rep.full_row_rank
            or rep.achieved_rank != rows):
        reasons.append("jacobian report mismatch")
    if head and "term count" not in reasons:
        rank = rational_rank(integer_rows(_exact_jacobian(dims, head)))
        if rank != rows:
            reasons.append("jacobian not full row rank")

    reasons = list(dict.fromkeys(reasons))
    return Verdict(not reasons, tuple(reasons))


# -- JSON -------------------------------------------------------------------


def _dec_str(x: float) -> str:
    return format(Decimal(float(x)), "f")


def _parse_exact(s) -> float:
    if not isinstance(s, str):
        raise ValueError(f"factor entries must be decimal strings, got {s!r}")
    q = Fraction(s)
    x = float(q)
    if Fraction(x) != q:
        raise ValueError(f"factor entry {s} is not exactly representable")
    return x


def _terms_to_json(dec: Decomposition):
    return [[[_dec_str(x) for x in v] for v in t.factors] for t in dec.terms]


def _terms_from_json(shape: Shape, obj) -> Decomposition:
    terms = [Rank1Term([[_parse_exact(x) for x in v] for v in t]) for t in obj]
    return Decomposition(shape, tuple(terms))


def certificate_to_json(cert: TypicalityCertificate) -> str:
    ball = witness_tensor(cert.shape)
    obj = {
        "kind": "typicality-certificate",
        "dims": list(cert.shape.dims),
        "fiber_mode": cert.shape.fiber_mode() + 1,
        "slice_bound": cert.shape.slice_bound(),
        "r": cert.r,
        "radius": str(ball.exact_radius),
        "ball_margin": cert.ball_margin,
        "head_terms": _terms_to_json(cert.head_terms),
        "tail_terms": _terms_to_json(cert.tail_terms),
        "witness": cert.witness.values.tolist(),
        "total": cert.total.values.tolist(),
        "jacobian_report": cert.jacobian_report.to_json_obj(),
    }
    return json.dumps(obj, indent=2) + "\n"


def certificate_from_json(text: str) -> TypicalityCertificate:
    """Parse a certificate; raises ``ValueError`` on malformed input."""
    try:
        obj = json.loads(text)
        shape = Shape(obj["dims"])
        return TypicalityCertificate(
            shape=shape,
            r=int(obj["r"]),
            head_terms=_terms_from_json(shape, obj["head_terms"]),
            tail_terms=_terms_from_json(shape, obj["tail_terms"]),
            witness=DenseTensor(shape, [float(v) for v in obj["witness"]]),
            total=DenseTensor(shape, [float(v) for v in obj["total"]]),
            ball_margin=float(obj["ball_margin"]),
            jacobian_report=JacobianReport.from_json_obj(obj["jacobian_report"]),
        )
    except (KeyError, TypeError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed certificate: {exc}") from None
