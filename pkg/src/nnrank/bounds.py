"""Lower and upper bounds on the nonnegative rank of a single tensor."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .core import (
    Decomposition,
    DenseTensor,
    NegativeEntryError,
    Rank1Term,
    ShapeError,
    flatten,
    matrix_rank,
)
from .ntf import NtfConfig, ntf_fit

if TYPE_CHECKING:
    from .witness import MaxRankCertificate

__all__ = [
    "RankInterval",
    "canonical_decomposition",
    "nonzero_fiber_count",
    "flattening_rank_lower_bound",
    "fooling_set",
    "fooling_set_lower_bound",
    "nnrank_interval",
]

LOWER_TAGS = ("flattening", "fooling-set", "rank-le-2-rule", "max-rank-ball", "zero")
UPPER_TAGS = ("slice", "ntf-fit", "rank-le-2-rule", "zero")

#: exact fooling-set search is used up to this min(rows, cols)
EXACT_FOOLING_LIMIT = 6


@dataclass(frozen=True)
class RankInterval:
    lower: int
    upper: int
    lower_provenance: str
    upper_provenance: str

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")
        if self.lower_provenance not in LOWER_TAGS:
            raise ValueError(f"unknown lower provenance {self.lower_provenance!r}")
        if self.upper_provenance not in UPPER_TAGS:
            raise ValueError(f"unknown upper provenance {self.upper_provenance!r}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def key(self) -> str:
        """Histogram key: ``"3"`` when exact, ``"[2,3]"`` otherwise."""
        return str(self.lower) if self.exact else f"[{self.lower},{self.upper}]"

    def to_json_obj(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "lower_provenance": self.lower_provenance,
            "upper_provenance": self.upper_provenance,
        }

    def __str__(self) -> str:
        tag = " exact" if self.exact else ""
        return (f"[{self.lower},{self.upper}]{tag} "
                f"({self.lower_provenance} / {self.upper_provenance})")


def _require_nonnegative(t: DenseTensor) -> None:
    if not t.is_nonnegative():
        raise NegativeEntryError("tensor has negative entries")


def _fibers(t: DenseTensor) -> tuple[int, np.ndarray]:
    """Fiber mode and the fibers as rows of a matrix (row-major over the other modes)."""
    f = t.shape.fiber_mode()
    arr = np.moveaxis(t.array(), f, -1)
    return f, arr.reshape(-1, t.shape.dims[f])


def nonzero_fiber_count(t: DenseTensor) -> int:
    _, fib = _fibers(t)
    return int(np.count_nonzero(np.any(fib != 0, axis=1)))


def canonical_decomposition(t: DenseTensor) -> Decomposition:
    """Split ``t`` into one rank-1 term per nonzero fiber.

    Fibers run along the last mode of maximal size; every other mode gets a
    standard basis vector. Zero fibers are skipped, so the term count is at
    most ``t.shape.slice_bound()``.
    """
    _require_nonnegative(t)
    dims = t.shape.dims
    f, fib = _fibers(t)
    other = [n for m, n in enumerate(dims) if m != f]
    terms = []
    for row, idx in zip(fib, itertools.product(*(range(n) for n in other))):
        if not np.any(row):
            continue
        factors = []
        it = iter(idx)
        for m, n in enumerate(dims):
            if m == f:
                factors.append(row.copy())
            else:
                e = np.zeros(n)
                e[next(it)] = 1.0
                factors.append(e)
        terms.append(Rank1Term(factors))
    return Decomposition(t.shape, tuple(terms))


def _flattening_splits(d: int):
    for m in range(d):
        yield (m,)
    if d == 4:
        # 2-vs-2 splits; fixing mode 0 in the row group avoids duplicates
        for m in range(1, 4):
            yield (0, m)


def flattening_rank_lower_bound(t: DenseTensor, tol: float = 1e-9) -> int:
    """Largest matrix rank over single-mode (and, for d = 4, 2-vs-2) unfoldings."""
    d = t.shape.order
    if d == 1:
        return int(np.any(t.values != 0))
    if d == 2:
        return matrix_rank(t, tol)
    return max(matrix_rank(flatten(t, rows), tol) for rows in _flattening_splits(d))


def _fooling_compatible(m: np.ndarray, p, q) -> bool:
    (i, j), (k, l) = p, q
    return m[i, l] * m[k, j] == 0


def fooling_set(m: DenseTensor) -> list[tuple[int, int]]:
    """A large fooling set of ``m`` as 0-based positions.

    Positions ``(i, j), (k, l)`` may both belong only if
    ``m[i, l] * m[k, j] == 0``. The search is exact (branch and bound) when
    ``min(rows, cols) <= 6`` and greedy otherwise.
    """
    if m.shape.order != 2:
        raise ShapeError("fooling sets are defined for matrices only")
    a = m.array()
    support = [tuple(p) for p in np.argwhere(a != 0).tolist()]
    if not support:
        return []
    adj = {
        p: {q for q in support if q != p and _fooling_compatible(a, p, q)}
        for p in support
    }
    if min(a.shape) <= EXACT_FOOLING_LIMIT:
        return _max_clique(support, adj)
    return _greedy_clique(support, adj)


def _greedy_clique(nodes, adj):
    order = sorted(nodes, key=lambda p: (-len(adj[p]), p))
    clique: list = []
    for p in order:
        if all(p in adj[q] for q in clique):
            clique.append(p)
    return clique


def _max_clique(nodes, adj):
    best = _greedy_clique(nodes, adj)

    def expand(clique, cands):
        nonlocal best
        if not cands:
            if len(clique) > len(best):
                best = list(clique)
            return
        # members of a fooling set sit in distinct rows
        if len(clique) + len({p[0] for p in cands}) <= len(best):
            return
        for idx, p in enumerate(cands):
            if len(clique) + len({q[0] for q in cands[idx:]}) <= len(best):
                return
            expand(clique + [p], [q for q in cands[idx + 1:] if q in adj[p]])

    expand([], sorted(nodes))
    return best


def fooling_set_lower_bound(m: DenseTensor) -> int:
    """Size of :func:`fooling_set`; always a valid nonnegative-rank lower bound."""
    if m.shape.order != 2:
        raise ShapeError("fooling sets are defined for matrices only")
    _require_nonnegative(m)
    return len(fooling_set(m))


def nnrank_interval(
    t: DenseTensor,
    cfg: NtfConfig = NtfConfig(),
    certificate: Optional["MaxRankCertificate"] = None,
    tol: float = 1e-9,
) -> RankInterval:
    """Certified interval around the nonnegative rank of ``t``.

    The upper end is the smallest r in ``[lower, #nonzero fibers]`` at which
    :func:`ntf_fit` converges, or the fiber count when none does. A
    ``certificate`` for ``t`` from :func:`nnrank.witness.certify_max_rank`
    raises the lower end to the slice bound.
    """
    _require_nonnegative(t)
    if not np.any(t.values):
        return RankInterval(0, 0, "zero", "zero")
    d = t.shape.order
    if d == 2:
        rk = matrix_rank(t, tol)
        if rk <= 2:
            # nonnegative rank equals rank for nonnegative matrices of rank <= 2
            return RankInterval(rk, rk, "rank-le-2-rule", "rank-le-2-rule")

    lower, lower_tag = flattening_rank_lower_bound(t, tol), "flattening"
    if d == 2:
        fool = fooling_set_lower_bound(t)
        if fool > lower:
            lower, lower_tag = fool, "fooling-set"
    if certificate is not None:
        if certificate.tensor != t:
            raise ValueError("certificate was issued for a different tensor")
        if certificate.certified_rank > lower:
            lower, lower_tag = certificate.certified_rank, "max-rank-ball"

    fibers = nonzero_fiber_count(t)
    upper, upper_tag = fibers, "slice"
    for r in range(max(lower, 1), fibers + 1):
        if ntf_fit(t, r, cfg).converged:
            upper, upper_tag = r, "ntf-fit"
            break
    return RankInterval(lower, upper, lower_tag, upper_tag)
