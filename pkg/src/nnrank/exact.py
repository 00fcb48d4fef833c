"""Exact matrix rank over the rationals.

Two independent routes are provided: fraction-free (Bareiss) elimination on
integers, used by the generic-rank search, and plain Gaussian elimination on
``fractions.Fraction``, used by certificate verification.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

__all__ = ["bareiss_rank", "rational_rank", "integer_rows"]


def integer_rows(rows: Sequence[Sequence]) -> list[list[int]]:
    """Clear denominators row by row; this does not change the rank."""
    out = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        den = math.lcm(*(f.denominator for f in fr)) if fr else 1
        out.append([int(f * den) for f in fr])
    return out


def bareiss_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination.

    Every division below is exact; intermediate entries are minors of the
    input, so they stay polynomially sized.
    """
    m = [list(map(int, r)) for r in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    prev = 1
    for c in range(n_cols):
        if rank == n_rows:
            break
        piv = next((i for i in range(rank, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != rank:
            m[piv], m[rank] = m[rank], m[piv]
        p = m[rank][c]
        prow = m[rank]
        for i in range(rank + 1, n_rows):
            row = m[i]
            f = row[c]
            for k in range(c + 1, n_cols):
                row[k] = (p * row[k] - f * prow[k]) // prev
            row[c] = 0
        prev = p
        rank += 1
    return rank


def rational_rank(rows: Sequence[Sequence]) -> int:
    """Rank by Gaussian elimination over ``Fraction``."""
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    for c in range(n_cols):
        piv = next((i for i in range(rank, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[piv], m[rank] = m[rank], m[piv]
        inv = 1 / m[rank][c]
        for i in range(rank + 1, n_rows):
            f = m[i][c] * inv
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank
