"""Dense tensors, rank-1 terms and the CP map.

Values are stored flat in row-major order (last index varies fastest).
Indices are 0-based everywhere in Python; the JSON helpers and anything
user-facing that prints multi-indices use 1-based indices.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ShapeError",
    "NegativeEntryError",
    "Shape",
    "DenseTensor",
    "Rank1Term",
    "Decomposition",
    "outer",
    "eval_cp",
    "frobenius_distance",
    "flatten",
    "matrix_rank",
    "read_tensor_json",
    "write_tensor_json",
]


class ShapeError(ValueError):
    """Dimensions of two objects do not agree."""


class NegativeEntryError(ValueError):
    """A nonnegative tensor or factor was required."""


@dataclass(frozen=True)
class Shape:
    """Tensor format ``N_1 x ... x N_d``."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(n) for n in dims)
        if not dims:
            raise ShapeError("a shape needs at least one mode")
        if any(n < 1 for n in dims):
            raise ShapeError(f"all dims must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def parse(cls, text: str) -> "Shape":
        """Build a shape from ``"2,2,3"``."""
        try:
            return cls(int(s) for s in text.split(",") if s.strip())
        except ValueError as exc:
            raise ShapeError(f"bad shape {text!r}: {exc}") from None

    @property
    def order(self) -> int:
        return len(self.dims)

    def total(self) -> int:
        return math.prod(self.dims)

    def fiber_mode(self) -> int:
        """Mode along which fibers are taken: the last mode of maximal size."""
        top = max(self.dims)
        return max(j for j, n in enumerate(self.dims) if n == top)

    def slice_bound(self) -> int:
        """Product of all dims except one maximal dim."""
        j = self.fiber_mode()
        return math.prod(n for m, n in enumerate(self.dims) if m != j)

    def __str__(self) -> str:
        return "x".join(str(n) for n in self.dims)


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Real tensor with a fixed row-major layout."""

    shape: Shape
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.shape.total():
            raise ShapeError(
                f"{vals.size} values given for shape {self.shape} "
                f"({self.shape.total()} expected)"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_array(cls, arr) -> "DenseTensor":
        arr = np.asarray(arr, dtype=float)
        return cls(Shape(arr.shape), arr.ravel())

    @classmethod
    def zeros(cls, shape: Shape) -> "DenseTensor":
        return cls(shape, np.zeros(shape.total()))

    def array(self) -> np.ndarray:
        """Read-only view with the tensor's d-dimensional shape."""
        return self.values.reshape(self.shape.dims)

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __add__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same_shape(self, other)
        return DenseTensor(self.shape, self.values + other.values)

    def __sub__(self, other: "DenseTensor") -> "DenseTensor":
        _check_same_shape(self, other)
        return DenseTensor(self.shape, self.values - other.values)

    def __mul__(self, scalar: float) -> "DenseTensor":
        return DenseTensor(self.shape, self.values * float(scalar))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"DenseTensor(shape={self.shape}, values={self.values.tolist()})"


def _check_same_shape(a: DenseTensor, b: DenseTensor) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")


@dataclass(frozen=True, eq=False)
class Rank1Term:
    """One factor vector per mode."""

    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        vecs = []
        for v in self.factors:
            v = np.array(v, dtype=float).ravel()
            v.setflags(write=False)
            vecs.append(v)
        object.__setattr__(self, "factors", tuple(vecs))

    def conforms(self, shape: Shape) -> bool:
        return len(self.factors) == shape.order and all(
            v.size == n for v, n in zip(self.factors, shape.dims)
        )

    def is_nonnegative(self) -> bool:
        return all(bool(np.all(v >= 0)) for v in self.factors)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Ordered list of rank-1 terms over a common shape."""

    shape: Shape
    terms: tuple[Rank1Term, ...] = field(default=())

    def __post_init__(self):
        terms = tuple(
            t if isinstance(t, Rank1Term) else Rank1Term(t) for t in self.terms
        )
        for k, t in enumerate(terms):
            if not t.conforms(self.shape):
                raise ShapeError(f"term {k} does not conform to shape {self.shape}")
        object.__setattr__(self, "terms", terms)

    @property
    def r(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def factor_matrices(self) -> list[np.ndarray]:
        """Mode-wise factor matrices, matrix j has shape ``(N_j, r)``."""
        return [
            np.column_stack([t.factors[j] for t in self.terms])
            if self.terms
            else np.zeros((n, 0))
            for j, n in enumerate(self.shape.dims)
        ]

    @classmethod
    def from_factor_matrices(cls, shape: Shape, mats: Sequence[np.ndarray]):
        r = mats[0].shape[1] if mats else 0
        terms = [Rank1Term([m[:, k] for m in mats]) for k in range(r)]
        return cls(shape, tuple(terms))

    def is_nonnegative(self) -> bool:
        return all(t.is_nonnegative() for t in self.terms)

    def __add__(self, other: "Decomposition") -> "Decomposition":
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch: {self.shape} vs {other.shape}")
        return Decomposition(self.shape, self.terms + other.terms)

    def to_json_obj(self) -> dict:
        return {
            "dims": list(self.shape.dims),
            "terms": [[v.tolist() for v in t.factors] for t in self.terms],
        }


def _outer_vectors(vectors: Sequence[np.ndarray]) -> np.ndarray:
    # works for float and object (exact) dtypes alike
    return reduce(np.multiply.outer, vectors).ravel()


def outer(term: Rank1Term, shape: Shape) -> DenseTensor:
    """Rank-1 tensor with entries ``prod_j factors[j][i_j]``."""
    if not term.conforms(shape):
        raise ShapeError(f"term does not conform to shape {shape}")
    return DenseTensor(shape, _outer_vectors(term.factors))


def eval_cp(dec: Decomposition) -> DenseTensor:
    """Sum of the outer products of all terms; the zero tensor when empty."""
    vals = np.zeros(dec.shape.total())
    for term in dec.terms:
        vals += _outer_vectors(term.factors)
    return DenseTensor(dec.shape, vals)


def frobenius_distance(a: DenseTensor, b: DenseTensor) -> float:
    _check_same_shape(a, b)
    return float(np.linalg.norm(a.values - b.values))


def flatten(t: DenseTensor, row_modes: Iterable[int]) -> DenseTensor:
    """Unfold ``t`` into a matrix with ``row_modes`` (0-based) as rows.

    Modes keep their natural order inside each group, so the row and column
    multi-indices are row-major as well.
    """
    d = t.shape.order
    rows = sorted(set(int(m) for m in row_modes))
    if not rows or len(rows) == d or rows[0] < 0 or rows[-1] >= d:
        raise ShapeError(f"row_modes must be a nonempty proper subset of 0..{d - 1}")
    cols = [m for m in range(d) if m not in rows]
    n_rows = math.prod(t.shape.dims[m] for m in rows)
    mat = np.transpose(t.array(), rows + cols).reshape(n_rows, -1)
    return DenseTensor.from_array(mat)


def matrix_rank(m: DenseTensor, tol: float = 1e-9) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if m.shape.order != 2:
        raise ShapeError("matrix_rank needs an order-2 tensor")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    s = np.linalg.svd(m.array(), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def read_tensor_json(path, *, nonnegative: bool = False) -> DenseTensor:
    """Load ``{"dims": [...], "values": [...]}``."""
    obj = json.loads(Path(path).read_text())
    return tensor_from_json_obj(obj, nonnegative=nonnegative)


def tensor_from_json_obj(obj: dict, *, nonnegative: bool = False) -> DenseTensor:
    try:
        shape = Shape(obj["dims"])
        values = [float(v) for v in obj["values"]]
    except (KeyError, TypeError) as exc:
        raise ShapeError(f"malformed tensor object: {exc}") from None
    t = DenseTensor(shape, values)
    if nonnegative and not t.is_nonnegative():
        raise NegativeEntryError("tensor has negative entries")
    return t


def tensor_to_json_obj(t: DenseTensor) -> dict:
    return {"dims": list(t.shape.dims), "values": t.values.tolist()}


def write_tensor_json(t: DenseTensor, path) -> None:
    Path(path).write_text(json.dumps(tensor_to_json_obj(t)) + "\n")
