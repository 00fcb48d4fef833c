"""Monte Carlo census of nonnegative ranks over random tensor ensembles."""
from __future__ import annotations

import csv
import io
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .bounds import RankInterval, nnrank_interval
from .core import DenseTensor, Shape
from .generic import generic_rank
from .ntf import NtfConfig
from .witness import OutsideBall, certify_max_rank, witness_tensor

__all__ = [
    "Distribution",
    "ExperimentConfig",
    "ExperimentReport",
    "sample_tensor",
    "run_census",
]

_NOISE_RE = re.compile(r"^indicator-noise\(\s*([^)]+)\s*\)$")


@dataclass(frozen=True)
class Distribution:
    """``uniform01``, ``exponential`` or ``indicator-noise`` with scale ``sigma``."""

    kind: str
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("uniform01", "exponential", "indicator-noise"):
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.kind == "indicator-noise":
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("indicator-noise needs sigma > 0")

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        m = _NOISE_RE.match(text.strip())
        if m:
            return cls("indicator-noise", float(m.group(1)))
        return cls(text.strip())

    def __str__(self) -> str:
        if self.kind == "indicator-noise":
            return f"indicator-noise({self.sigma!r})"
        return self.kind


def sample_tensor(shape: Shape, distribution: Distribution,
                  rng: np.random.Generator) -> DenseTensor:
    n = shape.total()
    if distribution.kind == "uniform01":
        vals = rng.uniform(0.0, 1.0, n)
    elif distribution.kind == "exponential":
        vals = rng.exponential(1.0, n)
    else:
        center = witness_tensor(shape).center.values
        vals = center + np.abs(rng.normal(0.0, distribution.sigma, n))
    return DenseTensor(shape, vals)


@dataclass(frozen=True)
class ExperimentConfig:
    shape: Shape
    samples: int
    distribution: Distribution
    seed: int = 0
    ntf: NtfConfig = field(default_factory=NtfConfig)
    #: worker processes; results do not depend on this
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def echo(self) -> dict:
        return {
            "dims": list(self.shape.dims),
            "fiber_mode": self.shape.fiber_mode() + 1,
            "samples": self.samples,
            "distribution": str(self.distribution),
            "seed": self.seed,
            "ntf": asdict(self.ntf),
        }


@dataclass(frozen=True)
class SampleResult:
    index: int
    interval: RankInterval
    certified: bool


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    results: tuple[SampleResult, ...]
    histogram: dict
    exact_fraction: float
    grank_used: int
    range_check: bool
    flagged: tuple[int, ...]

    @property
    def intervals(self) -> list[RankInterval]:
        return [s.interval for s in self.results]

    def summary(self) -> dict:
        return {
            "config": self.config.echo(),
            "slice_bound": self.config.shape.slice_bound(),
            "grank_used": self.grank_used,
            "histogram": self.histogram,
            "exact_fraction": self.exact_fraction,
            "certified_count": sum(s.certified for s in self.results),
            "range_check": self.range_check,
            "flagged": list(self.flagged),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample_index", "L", "U", "exact",
                    "lower_provenance", "upper_provenance"])
        for s in self.results:
            iv = s.interval
            w.writerow([s.index, iv.lower, iv.upper, str(iv.exact).lower(),
                        iv.lower_provenance, iv.upper_provenance])
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [
            f"shape {self.config.shape} (fiber mode {self.config.shape.fiber_mode() + 1}),"
            f" {self.config.samples} samples of {self.config.distribution}",
            f"generic rank {self.grank_used}, slice bound {self.config.shape.slice_bound()}",
        ]
        for key, count in self.histogram.items():
            lines.append(f"  {key:>8}  {count}")
        lines.append(f"exact fraction {self.exact_fraction:.4f}")
        lines.append(f"range check {'passed' if self.range_check else 'FAILED'}")
        return "\n".join(lines) + "\n"


def _sample_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _one_sample(cfg: ExperimentConfig, index: int) -> SampleResult:
    rng = np.random.default_rng([cfg.seed, index])
    t = sample_tensor(cfg.shape, cfg.distribution, rng)
    try:
        cert = certify_max_rank(t)
    except OutsideBall:
        cert = None
    ntf = replace(cfg.ntf, seed=_sample_seed(cfg.ntf.seed, index))
    return SampleResult(index, nnrank_interval(t, ntf, certificate=cert),
                        cert is not None)


def _hist_sort_key(key: str):
    if key.startswith("["):
        lo, hi = key[1:-1].split(",")
        return int(lo), int(hi)
    return int(key), int(key)


def run_census(cfg: ExperimentConfig) -> ExperimentReport:
    """Rank interval for every sample plus the aggregate histogram.

    Sample ``i`` draws from ``default_rng([cfg.seed, i])``, so the report is
    the same for any worker count.
    """
    indices = range(cfg.samples)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_one_sample, [cfg] * cfg.samples, indices,
                                    chunksize=8))
    else:
        results = [_one_sample(cfg, i) for i in indices]

    counts: dict[str, int] = {}
    for s in results:
        counts[s.interval.key()] = counts.get(s.interval.key(), 0) + 1
    histogram = {k: counts[k] for k in sorted(counts, key=_hist_sort_key)}

    grank = generic_rank(cfg.shape, cfg.seed)
    n_max = cfg.shape.slice_bound()
    flagged = tuple(
        s.index
        for s in results
        if s.interval.upper > n_max
        or (s.interval.exact and not grank <= s.interval.lower <= n_max)
    )
    exact = sum(s.interval.exact for s in results)
    return ExperimentReport(
        config=cfg,
        results=tuple(results),
        histogram=histogram,
        exact_fraction=exact / cfg.samples,
        grank_used=grank,
        range_check=not flagged,
        flagged=flagged,
    )
