"""Nonnegative CP fitting by hierarchical alternating least squares (HALS).

Each sweep visits every mode and, inside a mode, every term; the update of a
single factor column is the exact minimiser of the squared residual over the
nonnegative orthant with everything else fixed, so the objective can only go
down from sweep to sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .core import Decomposition, DenseTensor, NegativeEntryError

__all__ = ["NtfConfig", "NtfResult", "ntf_fit", "hals_run"]

@dataclass(frozen=True)
class NtfConfig:
    """Settings for :func:`ntf_fit`.

    ``init_scale=None`` means "max entry of the target". ``stall_tol`` ends a
    restart early once a sweep improves the objective by less than that
    fraction; the objective itself is never allowed to increase.
    """

    restarts: int = 20
    max_iters: int = 2000
    residual_tol: float = 1e-8
    seed: int = 0
    init_scale: Optional[float] = None
    stall_tol: float = 1e-7

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be >= 1")
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be > 0")
        if self.init_scale is not None and not self.init_scale > 0:
            raise ValueError("init_scale must be > 0")


@dataclass(frozen=True, eq=False)
class NtfResult:
    decomposition: Decomposition
    relative_residual: float
    iterations_used: int
    converged: bool
    #: relative residual after every sweep of the winning restart
    history: tuple[float, ...] = field(default=(), repr=False)


@numba.njit(cache=True)
def _modes_of(flat, dims):
    idx = np.empty(dims.size, dtype=np.int64)
    rem = flat
    for m in range(dims.size - 1, -1, -1):
        idx[m] = rem % dims[m]
        rem //= dims[m]
    return idx


@numba.njit(cache=True)
def _hals_kernel(x, dims, offsets, F, max_iters, residual_tol, stall_tol, history):
    d = dims.size
    r = F.shape[1]
    total = x.size
    # multi-index table, row-major
    idx = np.empty((total, d), dtype=np.int64)
    for p in range(total):
        idx[p] = _modes_of(p, dims)
    xnorm = np.sqrt(np.sum(x * x))
    if xnorm < 1e-300:
        xnorm = 1e-300
    G = np.empty((r, r))
    prev = np.inf
    sweeps = 0
    for it in range(max_iters):
        for j in range(d):
            nj = dims[j]
            oj = offsets[j]
            G[:, :] = 1.0
            for m in range(d):
                if m != j:
                    A = F[offsets[m]:offsets[m] + dims[m]]
                    G *= A.T @ A
            M = np.zeros((nj, r))
            for p in range(total):
                xv = x[p]
                if xv == 0.0:
                    continue
                for k in range(r):
                    prod = xv
                    for m in range(d):
                        if m != j:
                            prod *= F[offsets[m] + idx[p, m], k]
                    M[idx[p, j], k] += prod
            for k in range(r):
                gkk = G[k, k]
                if gkk <= 0.0:
                    continue
                for i in range(nj):
                    s = M[i, k]
                    for q in range(r):
                        s -= F[oj + i, q] * G[q, k]
                    v = F[oj + i, k] + s / gkk
                    F[oj + i, k] = v if v > 0.0 else 0.0
        err = 0.0
        for p in range(total):
            s = 0.0
            for k in range(r):
                prod = 1.0
                for m in range(d):
                    prod *= F[offsets[m] + idx[p, m], k]
                s += prod
            diff = x[p] - s
            err += diff * diff
        res = np.sqrt(err) / xnorm
        history[it] = res
        sweeps = it + 1
        if res < residual_tol:
            break
        if np.isfinite(prev) and prev - res <= stall_tol * prev:
            break
        prev = res
    return sweeps


def hals_run(X: np.ndarray, mats: list[np.ndarray], max_iters: int,
             residual_tol: float, stall_tol: float = 0.0):
    """Run HALS sweeps in place on ``mats`` (one ``(N_j, r)`` array per mode).

    Returns ``(history, sweeps)`` where ``history[s]`` is the relative
    residual after sweep ``s``.
    """
    dims = np.array(X.shape, dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(dims)[:-1]]).astype(np.int64)
    F = np.ascontiguousarray(np.vstack(mats), dtype=float)
    history = np.empty(max_iters)
    sweeps = _hals_kernel(np.ascontiguousarray(X, dtype=float).ravel(), dims,
                          offsets, F, max_iters, residual_tol, stall_tol, history)
    for m, o, n in zip(mats, offsets, dims):
        m[:] = F[o:o + n]
    return history[:sweeps].tolist(), sweeps


def ntf_fit(t: DenseTensor, r: int, cfg: NtfConfig = NtfConfig()) -> NtfResult:
    """Best nonnegative rank-``r`` CP fit of ``t`` over ``cfg.restarts`` starts.

    Restart ``i`` draws its initial factors from ``default_rng([cfg.seed, i])``
    so results are reproducible. Returns as soon as a restart converges.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if not t.is_nonnegative():
        raise NegativeEntryError("ntf_fit needs a nonnegative tensor")
    X = t.array()
    dims = t.shape.dims
    scale = cfg.init_scale
    if scale is None:
        scale = float(X.max()) if X.size and X.max() > 0 else 1.0
    best = None
    for i in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, i])
        mats = [rng.uniform(0.0, scale, size=(n, r)) for n in dims]
        history, sweeps = hals_run(X, mats, cfg.max_iters, cfg.residual_tol,
                                   cfg.stall_tol)
        res = history[-1]
        if best is None or res < best[0]:
            best = (res, sweeps, mats, history)
        if res < cfg.residual_tol:
            break
    res, sweeps, mats, history = best
    dec = Decomposition.from_factor_matrices(t.shape, mats)
    return NtfResult(
        decomposition=dec,
        relative_residual=res,
        iterations_used=sweeps,
        converged=res < cfg.residual_tol,
        history=tuple(history),
    )
