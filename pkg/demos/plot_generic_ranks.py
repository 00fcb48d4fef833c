"""
Generic ranks from the Jacobian of the CP map
=============================================

The generic rank of a shape is the smallest r for which the Jacobian of the
rank-r parametrization has full row rank at a random integer point.  Ranks
are computed exactly, so the answer does not depend on a tolerance.
"""

from nnrank import Shape, expected_generic_rank, generic_rank, jacobian_generic_rank

shapes = ["2,2,2", "2,2,3", "2,3,3", "3,3,3", "2,2,2,2", "2,2,4", "4,4,4"]

print(f"{'shape':<10}{'expected':>10}{'generic':>10}{'slice bound':>13}")
for text in shapes:
    shape = Shape.parse(text)
    print(f"{text:<10}{expected_generic_rank(shape):>10}{generic_rank(shape):>10}"
          f"{shape.slice_bound():>13}")

# 3x3x3 is defective: the parameter count suggests 4 but 5 is needed
shape = Shape.parse("3,3,3")
for r in (4, 5):
    rep = jacobian_generic_rank(shape, r)
    print(f"r={r}: rank {rep.achieved_rank} of {rep.jac_rows} rows")
