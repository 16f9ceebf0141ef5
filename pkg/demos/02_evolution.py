"""
Functional calculus on a periodic grid
======================================

Functions of the momentum act as Fourier multipliers.  Evolution under
g(P) is a single exact multiplication, so a free Gaussian can be
compared with its closed-form spreading.
"""

import numpy as np

from strongtime import evolve, gaussian, make_grid

grid = make_grid(4096, 200.0)
x = grid.x
sigma, k0, t = 5.0, 3.0, 4.0

psi0 = gaussian(grid, 0.0, sigma, k0)
psi_t = evolve(lambda k: k**2 / 2, t, psi0)

# closed form for the free packet
a = sigma**2 + 1j * t
exact = np.sqrt(sigma**2 / a) * np.exp(-((x - k0 * t) ** 2) / (2 * a) + 1j * k0 * x - 0.5j * k0**2 * t)
exact /= np.sqrt(np.sum(np.abs(exact) ** 2) * grid.dx)
print("max error against the closed form:", np.max(np.abs(psi_t.amplitudes - exact)))

# the packet moves with group velocity k0
p = np.abs(psi_t.amplitudes) ** 2 * grid.dx
print("centre of mass:", np.sum(x * p), " expected:", k0 * t)

# evolution under g(P) = P is an exact translation: psi(x - 7)
shifted = evolve(lambda k: k, 7.0, psi0)
target = gaussian(grid, 7.0, sigma, k0).amplitudes * np.exp(-7j * k0)
print("translation check:", np.max(np.abs(shifted.amplitudes - target)))
