"""Periodic discretization of L^2(R) and its dual Fourier grid."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["GridSpec", "StateVector", "make_grid", "to_fourier", "from_fourier", "inner", "GridMismatchError"]


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """``N`` points x_j = -L/2 + j L/N and frequencies k_n = 2 pi n / L,
    n = -N/2 .. N/2 - 1 (centered order)."""

    N: int
    L: float

    def __post_init__(self):
        N = self.N
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 8 or N & (N - 1):
            raise ValueError(f"N must be a power of two >= 8, got {N!r}")
        if not (np.isfinite(self.L) and self.L > 0):
            raise ValueError(f"L must be positive, got {self.L!r}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dk(self) -> float:
        return 2 * np.pi / self.L

    @property
    def kmax(self) -> float:
        return np.pi * self.N / self.L

    @property
    def window(self) -> tuple[float, float]:
        """Frequency window [-kmax, kmax] covering every Fourier bin."""
        return (-self.kmax, self.kmax)

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.L / 2 + np.arange(self.N) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def k(self) -> np.ndarray:
        k = np.arange(-self.N // 2, self.N // 2) * self.dk
        k.flags.writeable = False
        return k

    @cached_property
    def _parity(self) -> np.ndarray:
        # e^{-i k_n x_0} = (-1)^n for x_0 = -L/2
        n = np.arange(-self.N // 2, self.N // 2)
        return np.where(n % 2 == 0, 1.0, -1.0)


def make_grid(N: int, L: float) -> GridSpec:
    return GridSpec(N, L)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitudes on a grid, in the position or Fourier representation.

    The inner product carries the quadrature weight dx (position) or dk
    (Fourier), so norms approximate continuum L^2 norms.  Instances are
    immutable; arithmetic returns new vectors.
    """

    grid: GridSpec
    amplitudes: np.ndarray
    rep: str = "position"

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} amplitudes, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        if self.rep not in ("position", "fourier"):
            raise ValueError(f"unknown representation {self.rep!r}")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    @property
    def weight(self) -> float:
        return self.grid.dx if self.rep == "position" else self.grid.dk

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.weight))

    def normalized(self) -> "StateVector":
        return self * (1.0 / self.norm())

    def _check(self, other: "StateVector"):
        if not isinstance(other, StateVector):
            return NotImplemented
        if other.grid != self.grid or other.rep != self.rep:
            raise GridMismatchError("states live on different grids or representations")

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateVector(self.grid, self.amplitudes + other.amplitudes, self.rep)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return StateVector(self.grid, self.amplitudes - other.amplitudes, self.rep)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return StateVector(self.grid, self.amplitudes * c, self.rep)

    __rmul__ = __mul__

    def __neg__(self):
        return StateVector(self.grid, -self.amplitudes, self.rep)


def to_fourier(psi: StateVector) -> StateVector:
    """psi_hat(k_n) = dx / sqrt(2 pi) * sum_j psi_j exp(-i k_n x_j)."""
    if psi.rep != "position":
        raise ValueError("state is already in the Fourier representation")
    g = psi.grid
    a = np.fft.fftshift(np.fft.fft(psi.amplitudes)) * g._parity * (g.dx / np.sqrt(2 * np.pi))
    return StateVector(g, a, "fourier")


def from_fourier(psi_hat: StateVector) -> StateVector:
    if psi_hat.rep != "fourier":
        raise ValueError("state is not in the Fourier representation")
    g = psi_hat.grid
    a = np.fft.ifft(np.fft.ifftshift(psi_hat.amplitudes * g._parity)) * (g.N * g.dk / np.sqrt(2 * np.pi))
    return StateVector(g, a, "position")


def inner(psi: StateVector, phi: StateVector) -> complex:
    """(psi, phi), antilinear in the first argument."""
    if psi.grid != phi.grid:
        raise GridMismatchError("inner product of states on different grids")
    if psi.rep != phi.rep:
        phi = to_fourier(phi) if phi.rep == "position" else from_fourier(phi)
    return complex(np.vdot(psi.amplitudes, phi.amplitudes) * psi.weight)
