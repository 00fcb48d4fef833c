"""
Nonnegative rank of a small matrix
==================================

A 4x4 matrix of rank 3 whose nonnegative rank is 4.  The lower bound comes
from a fooling set, the upper bound from a nonnegative factorization.
"""

import numpy as np

from nnrank import (DenseTensor, fooling_set, matrix_rank, nnrank_interval,
                    ntf_fit, eval_cp)

m = DenseTensor.from_array(np.array([
    [1, 1, 0, 0],
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 1, 1],
], dtype=float))

print("rank:", matrix_rank(m))

# entries that pairwise cannot share a rank-one nonnegative term
print("fooling set:", fooling_set(m))

iv = nnrank_interval(m)
print("nonnegative rank:", iv)

# three nonnegative terms never reach the matrix, four do
for r in (3, 4):
    res = ntf_fit(m, r)
    print(f"r={r}: residual {res.relative_residual:.2e}, converged={res.converged}")

print(np.round(eval_cp(ntf_fit(m, 4).decomposition).array(), 6))
