"""Generic complex rank of a tensor format via the Jacobian of the CP map.

``r`` is at least the generic rank exactly when the Jacobian of
``(a_1, ..., a_r) -> sum_k a_1k (x) ... (x) a_dk`` has full row rank at some
point. The Jacobian minors are integer polynomials, so evaluating at random
integer points and computing the rank exactly decides the question with
probability one.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .core import Decomposition, DenseTensor, Shape, ShapeError
from .exact import bareiss_rank

__all__ = [
    "POINT_BOUND",
    "JacobianReport",
    "jacobian",
    "jacobian_matrix",
    "jacobian_generic_rank",
    "generic_rank",
    "expected_generic_rank",
    "param_cap",
]

#: random integer points are drawn uniformly from [-POINT_BOUND, POINT_BOUND]
POINT_BOUND = 101


@dataclass(frozen=True)
class JacobianReport:
    shape: Shape
    r: int
    point_seed: int
    jac_rows: int
    jac_cols: int
    achieved_rank: int
    full_row_rank: bool
    trials: int

    def to_json_obj(self) -> dict:
        obj = asdict(self)
        obj["shape"] = list(self.shape.dims)
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "JacobianReport":
        fields = dict(obj)
        fields["shape"] = Shape(fields["shape"])
        return cls(**fields)


def param_cap(shape: Shape, r: int) -> int:
    """Upper bound on the Jacobian rank: each term loses d-1 scaling directions."""
    return min(shape.total(), r * (sum(shape.dims) - shape.order + 1))


def jacobian_matrix(dims: Sequence[int], terms: Sequence[Sequence[np.ndarray]]):
    """Closed-form Jacobian of the CP map.

    ``terms[k][j]`` is the mode-j factor of term k, with any numpy dtype
    (``object`` arrays of ints or Fractions give exact results). Columns are
    ordered term-major, then mode, then coordinate; rows follow the tensor's
    row-major layout. Column ``(k, j, l)`` is the outer product of term k
    with its mode-j factor replaced by the basis vector ``e_l``.
    """
    dims = tuple(dims)
    d = len(dims)
    cols = []
    for factors in terms:
        for j in range(d):
            # entries of this block: [i_j == l] * prod_{m != j} a_{m, i_m}
            others = [np.asarray(factors[m]) for m in range(d) if m != j]
            rest = _outer(others)
            for l in range(dims[j]):
                block = np.zeros(dims[j], dtype=rest.dtype)
                block[l] = 1
                full = np.multiply.outer(block, rest)
                # move the mode-j axis back into place
                full = np.moveaxis(full.reshape((dims[j],) + _drop(dims, j)), 0, j)
                cols.append(full.ravel())
    if not cols:
        return np.zeros((math.prod(dims), 0))
    return np.column_stack(cols)


def _drop(dims, j):
    return tuple(n for m, n in enumerate(dims) if m != j)


def _outer(vectors):
    if not vectors:
        return np.ones((), dtype=object)
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def jacobian(shape: Shape, dec: Decomposition) -> DenseTensor:
    """Floating-point Jacobian of the CP map at ``dec``."""
    if dec.shape != shape:
        raise ShapeError(f"decomposition shape {dec.shape} != {shape}")
    if dec.r < 1:
        raise ValueError("jacobian needs at least one term")
    mat = jacobian_matrix(shape.dims, [t.factors for t in dec.terms])
    return DenseTensor.from_array(mat.astype(float))


def _random_point(shape: Shape, r: int, seed: int, trial: int):
    rng = np.random.default_rng([seed, trial])
    terms = []
    for _ in range(r):
        terms.append(
            [
                np.array(
                    [int(x) for x in rng.integers(-POINT_BOUND, POINT_BOUND + 1, n)],
                    dtype=object,
                )
                for n in shape.dims
            ]
        )
    return terms


def jacobian_generic_rank(
    shape: Shape, r: int, trials: int = 3, seed: int = 0
) -> JacobianReport:
    """Maximum exact Jacobian rank over ``trials`` random integer points.

    Trial ``t`` uses the point drawn from ``default_rng([seed, t])``; trials
    stop early once full row rank is reached.
    """
    if r < 1 or trials < 1:
        raise ValueError("r and trials must be >= 1")
    rows = shape.total()
    cols = r * sum(shape.dims)
    best = 0
    for trial in range(trials):
        mat = jacobian_matrix(shape.dims, _random_point(shape, r, seed, trial))
        best = max(best, bareiss_rank(mat.tolist()))
        if best == rows:
            break
    return JacobianReport(
        shape=shape,
        r=r,
        point_seed=seed,
        jac_rows=rows,
        jac_cols=cols,
        achieved_rank=best,
        full_row_rank=best == rows,
        trials=trials,
    )


def expected_generic_rank(shape: Shape) -> int:
    """Dimension-count estimate ``ceil(prod N_j / (sum N_j - d + 1))``.

    Only a starting point: defective formats such as 3x3x3 exceed it.
    """
    if shape.order < 2:
        raise ShapeError("expected_generic_rank needs d >= 2")
    return -(-shape.total() // (sum(shape.dims) - shape.order + 1))


def generic_rank(shape: Shape, seed: int = 0, trials: int = 3) -> int:
    """Smallest r whose CP-map Jacobian reaches full row rank."""
    cache: dict[int, bool] = {}

    def full(r: int) -> bool:
        if r not in cache:
            cache[r] = jacobian_generic_rank(shape, r, trials, seed).full_row_rank
        return cache[r]

    top = shape.slice_bound()
    r = expected_generic_rank(shape) if shape.order >= 2 else 1
    r = min(max(r, 1), top)
    while r < top and not full(r):
        r += 1
    while r > 1 and full(r - 1):
        r -= 1
    return r
