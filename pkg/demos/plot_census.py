"""
A census of random 2x2x2 tensors
================================

Each sample gets an interval [L, U] for its nonnegative rank.  Exact values
can only be 2, 3 or 4; how often each occurs is an empirical question, and
many samples stay bracketed.
"""

from nnrank import Distribution, ExperimentConfig, NtfConfig, Shape, run_census

cfg = ExperimentConfig(Shape.parse("2,2,2"), samples=200,
                       distribution=Distribution.parse("uniform01"), seed=7,
                       ntf=NtfConfig(restarts=10))
report = run_census(cfg)
print(report.to_text())

# samples near T0 are pinned to the slice bound by the ball certificate
near = ExperimentConfig(Shape.parse("2,2,2"), samples=50,
                        distribution=Distribution.parse("indicator-noise(0.001)"), seed=7)
print(run_census(near).histogram)
