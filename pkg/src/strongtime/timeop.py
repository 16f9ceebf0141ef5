"""The coordinate operator Q and the time operator
D = 1/2 (g'(P)^{-1} Q + Q g'(P)^{-1}) on admissible test vectors."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .expr import SpectralSymbol, build_symbol
from .grid import GridSpec, StateVector, inner
from .spectral import MultiplierOp, SingularSet, apply_multiplier, gprime_inv_op, gprime_op, singular_set
from .states import TestVector, boundary_mass

__all__ = ["TimeOperator", "BoundaryWarning", "time_operator", "apply_Q", "apply_D", "D_parts",
           "expectation_D", "symmetry_defect"]

Q_BOUNDARY_WARN = 1e-6


class BoundaryWarning(UserWarning):
    """Q applied to a state with appreciable mass near the periodic boundary."""


@dataclass(frozen=True, eq=False)
class TimeOperator:
    symbol: SpectralSymbol
    Z: SingularSet
    grid: GridSpec
    gprime: MultiplierOp = field(init=False, repr=False)
    gprime_inv: MultiplierOp = field(init=False, repr=False)

    def __post_init__(self):
        if not self.symbol.validated:
            raise ValueError("symbol has not been validated")
        lo, hi = self.grid.window
        if self.symbol.window[0] > lo or self.symbol.window[1] < hi:
            raise ValueError(f"symbol window {self.symbol.window} does not cover the grid window {self.grid.window}")
        object.__setattr__(self, "gprime", gprime_op(self.symbol, self.Z, self.grid))
        object.__setattr__(self, "gprime_inv", gprime_inv_op(self.symbol, self.Z, self.grid))


def time_operator(symbol: str | SpectralSymbol, grid: GridSpec, params: Mapping[str, float] | None = None,
                  margin: float | None = None) -> TimeOperator:
    """Build a symbol on the grid's frequency window, find its singular set
    and assemble D."""
    if isinstance(symbol, str):
        symbol = build_symbol(symbol, params, window=grid.window)
    return TimeOperator(symbol, singular_set(symbol, grid, margin), grid)


def apply_Q(psi: StateVector) -> StateVector:
    """(Q psi)(x_j) = x_j psi_j.  Warns when boundary mass exceeds 1e-6."""
    if psi.rep != "position":
        raise ValueError("apply_Q expects the position representation")
    bm = boundary_mass(psi)
    if bm > Q_BOUNDARY_WARN:
        warnings.warn(f"Q applied to a state with boundary mass {bm:.2e}", BoundaryWarning, stacklevel=2)
    return StateVector(psi.grid, psi.grid.x * psi.amplitudes)


def _state(phi: TestVector | StateVector, op: TimeOperator | None = None) -> StateVector:
    if isinstance(phi, TestVector):
        if op is not None and phi.Z != op.Z:
            raise ValueError("test vector was certified against a different singular set")
        return phi.state
    return phi


def D_parts(op: TimeOperator, phi: TestVector | StateVector) -> tuple[StateVector, StateVector]:
    """The two summands g'(P)^{-1} Q phi and Q g'(P)^{-1} phi, unaveraged."""
    psi = _state(phi, op)
    return apply_multiplier(op.gprime_inv, apply_Q(psi)), apply_Q(apply_multiplier(op.gprime_inv, psi))


def apply_D(op: TimeOperator, phi: TestVector | StateVector) -> StateVector:
    left, right = D_parts(op, phi)
    return 0.5 * (left + right)


def expectation_D(op: TimeOperator, phi: TestVector | StateVector) -> tuple[float, float]:
    """Real part of (phi, D phi)/||phi||^2 and the imaginary part (symmetry defect)."""
    psi = _state(phi, op)
    val = inner(psi, apply_D(op, psi)) / psi.norm() ** 2
    return val.real, val.imag


def symmetry_defect(op: TimeOperator, phi: TestVector | StateVector, psi: TestVector | StateVector) -> float:
    """|(phi, D psi) - (D phi, psi)| / (||phi|| ||psi||)."""
    a, b = _state(phi, op), _state(psi, op)
    return abs(inner(a, apply_D(op, b)) - inner(apply_D(op, a), b)) / (a.norm() * b.norm())
