"""
The weak Weyl relation across the built-in symbols
==================================================

For each preset we build the time operator D, filter a Gaussian away from
the singular set and measure how far D U(t) Phi is from U(t) (D + t) Phi.
"""

from strongtime import PRESETS, gaussian_test_vector, time_operator, weak_weyl_residual
from strongtime.grid import make_grid
from strongtime.timeop import expectation_D
from strongtime.verify import expectation_shift_residual

grid = make_grid(4096, 200.0)

for name, preset in PRESETS.items():
    op = time_operator(preset.text, grid, preset.params)
    Phi = gaussian_test_vector(grid, op.Z, bump=(1, 5), k0=3.0)
    res = [weak_weyl_residual(op, Phi, t) for t in (0.1, 0.5, 1.0)]
    mean, _ = expectation_D(op, Phi)
    print(f"{name:<17} Z = {list(op.Z.points)}  residuals = {', '.join(f'{r:.1e}' for r in res)}"
          f"  <D> = {mean:+.4f}  shift error = {expectation_shift_residual(op, Phi, 1.0):.1e}")
