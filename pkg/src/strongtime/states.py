"""Admissible test vectors rho(P) phi with a smooth frequency cutoff rho
supported away from the singular set."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import GridSpec, StateVector
from .spectral import SingularSet, apply_multiplier, masked_mass

__all__ = [
    "BumpProfile", "TestVector", "AdmissibilityError", "gaussian", "boundary_mass",
    "make_test_vector", "combine", "MASKED_MASS_MAX", "BOUNDARY_MASS_MAX",
]

MASKED_MASS_MAX = 1e-12
BOUNDARY_MASS_MAX = 1e-10


class AdmissibilityError(ValueError):
    pass


@dataclass(frozen=True)
class BumpProfile:
    """rho(k) = exp(1 - 1/(1 - u^2)), u = (2k - a - b)/(b - a), zero for |u| >= 1."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError(f"empty bump support [{self.a}, {self.b}]")

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        u = (2 * k - self.a - self.b) / (self.b - self.a)
        out = np.zeros(k.shape)
        inside = np.abs(u) < 1
        out[inside] = np.exp(1 - 1 / (1 - u[inside] ** 2))
        return out

    @property
    def support(self) -> tuple[float, float]:
        return (self.a, self.b)


def gaussian(grid: GridSpec, x0: float = 0.0, sigma: float = 5.0, k0: float = 0.0) -> StateVector:
    """Unit-norm packet exp(-(x - x0)^2 / (2 sigma^2)) exp(i k0 x)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    half = grid.L / 2
    if x0 - 6 * sigma < -half or x0 + 6 * sigma > half:
        raise ValueError(
            f"Gaussian footprint [{x0 - 6 * sigma}, {x0 + 6 * sigma}] exceeds the domain [{-half}, {half}]"
        )
    x = grid.x
    psi = StateVector(grid, np.exp(-((x - x0) ** 2) / (2 * sigma**2) + 1j * k0 * x))
    return psi.normalized()


def boundary_mass(psi: StateVector, fraction: float = 0.05) -> float:
    """Share of the squared norm in the outer ``fraction`` of the domain at each end."""
    if not 0 < fraction < 0.5:
        raise ValueError("fraction must lie in (0, 0.5)")
    g = psi.grid
    x = g.x
    edge = (x < -g.L / 2 + fraction * g.L) | (x >= g.L / 2 - fraction * g.L)
    p = np.abs(psi.amplitudes) ** 2
    total = p.sum()
    return float(p[edge].sum() / total) if total > 0 else 0.0


@dataclass(frozen=True, eq=False)
class TestVector:
    """A certified element of the core: state = rho(P) phi, normalized.

    ``bumps`` and ``base`` have one entry per summand (a single one unless
    built with :func:`combine`).
    """

    __test__ = False

    state: StateVector
    bumps: tuple[BumpProfile, ...]
    base: tuple[dict, ...]
    Z: SingularSet
    masked_mass: float
    boundary_mass: float

    def __post_init__(self):
        for bump in self.bumps:
            if self.Z.overlaps(*bump.support):
                raise AdmissibilityError(
                    f"bump support {list(bump.support)} meets the excluded region "
                    f"(points {list(self.Z.points)}, margin {self.Z.margin})"
                )
        if not self.masked_mass <= MASKED_MASS_MAX:
            raise AdmissibilityError(f"masked mass {self.masked_mass:.3e} exceeds {MASKED_MASS_MAX:g}")
        if not self.boundary_mass <= BOUNDARY_MASS_MAX:
            raise AdmissibilityError(f"boundary mass {self.boundary_mass:.3e} exceeds {BOUNDARY_MASS_MAX:g}")

    @property
    def bump(self) -> BumpProfile:
        return self.bumps[0]

    @property
    def grid(self) -> GridSpec:
        return self.state.grid


def _certify(state: StateVector, bumps, base, Z: SingularSet) -> TestVector:
    return TestVector(state, tuple(bumps), tuple(base), Z, masked_mass(state, Z), boundary_mass(state))


def make_test_vector(phi: StateVector, bump: BumpProfile, Z: SingularSet, base: dict | None = None) -> TestVector:
    """Filter ``phi`` through the bump and certify the result."""
    if Z.overlaps(*bump.support):
        raise AdmissibilityError(
            f"bump support {list(bump.support)} meets the excluded region "
            f"(points {list(Z.points)}, margin {Z.margin})"
        )
    state = apply_multiplier(bump, phi)
    n = state.norm()
    if n == 0:
        raise AdmissibilityError("the bump annihilates the base state")
    return _certify(state * (1 / n), [bump], [dict(base or {})], Z)


def gaussian_test_vector(grid: GridSpec, Z: SingularSet, bump: Sequence[float] = (1.0, 5.0),
                         x0: float = 0.0, sigma: float = 5.0, k0: float = 3.0) -> TestVector:
    phi = gaussian(grid, x0, sigma, k0)
    return make_test_vector(phi, BumpProfile(*bump), Z, {"x0": x0, "sigma": sigma, "k0": k0})


def combine(vectors: Sequence[TestVector], coeffs: Sequence[complex] | None = None) -> TestVector:
    """Linear combination of test vectors, recertified.  Bumps must be pairwise disjoint."""
    if not vectors:
        raise ValueError("nothing to combine")
    coeffs = [1.0] * len(vectors) if coeffs is None else list(coeffs)
    Z = vectors[0].Z
    bumps = [b for v in vectors for b in v.bumps]
    spans = sorted(b.support for b in bumps)
    if any(s[1] > t[0] for s, t in zip(spans, spans[1:])):
        raise AdmissibilityError("bumps of combined vectors must have disjoint supports")
    state = vectors[0].state * coeffs[0]
    for v, c in zip(vectors[1:], coeffs[1:]):
        if v.Z != Z:
            raise AdmissibilityError("vectors certified against different singular sets")
        state = state + v.state * c
    return _certify(state, bumps, [b for v in vectors for b in v.base], Z)
