"""
Grid refinement
===============

Doubling N and L together keeps dx fixed and halves dk.  On the default
grid the residual is already at round-off; on a deliberately small box the
evolved packet wraps around and the residual drops quickly as the box grows.
"""

from strongtime.verify import Scenario, convergence_study

for label, sc in [("default grid", Scenario(symbol="x^2/2")),
                  ("small box", Scenario(symbol="x^2/2", N=128, L=30, sigma=2.5))]:
    cs = convergence_study(sc, levels=3, t=1.0)
    print(label)
    for (N, L), r in zip(cs.levels, cs.residuals):
        print(f"    N = {N:6d}  L = {L:6.0f}  residual = {r:.2e}")
    print("    ratios:", cs.ratios, " passed:", cs.passed)
