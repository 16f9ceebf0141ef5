"""Functional calculus of the momentum operator as Fourier multipliers.

Every operator here acts as pointwise multiplication by f(k_n) in the
Fourier representation.  Bins within a margin of the singular set are
masked: g' is set to 0 there, and so is its inverse.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .expr import ExprTree, SpectralSymbol, singular_points
from .grid import GridSpec, StateVector

__all__ = [
    "SingularSet", "MultiplierOp", "SymbolValueError", "MarginError",
    "default_margin", "singular_set", "multiplier", "apply_multiplier", "evolve",
    "gprime_op", "gprime_inv_op", "masked_mass",
]


class SymbolValueError(ValueError):
    """A symbol is non-finite, or g' vanishes, on a bin that is not masked."""


class MarginError(ValueError):
    pass


def default_margin(grid: GridSpec) -> float:
    return max(0.5, 4 * grid.dk)


@dataclass(frozen=True)
class SingularSet:
    """Excluded frequencies: the union of [z - margin, z + margin]."""

    points: tuple[float, ...]
    margin: float

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise ValueError("singular points must be sorted and distinct")
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "margin", float(self.margin))

    def mask(self, k: np.ndarray) -> np.ndarray:
        m = np.zeros(np.shape(k), dtype=bool)
        for z in self.points:
            m |= np.abs(k - z) <= self.margin
        return m

    def overlaps(self, a: float, b: float) -> bool:
        """Whether [a, b] meets the excluded region."""
        return any(a <= z + self.margin and z - self.margin <= b for z in self.points)


def singular_set(sym: SpectralSymbol, grid: GridSpec, margin: float | None = None,
                 resolution: float = 1e-3) -> SingularSet:
    """Singular set of ``sym`` on the grid's frequency window."""
    margin = default_margin(grid) if margin is None else margin
    return SingularSet(tuple(singular_points(sym, grid.window, resolution)), margin)


@dataclass(frozen=True, eq=False)
class MultiplierOp:
    """Symbol values f(k_n) in centered order; masked bins hold exactly 0."""

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray
    label: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=complex if np.iscomplexobj(self.values) else float)
        m = np.array(self.mask, dtype=bool)
        if v.shape != (self.grid.N,) or m.shape != v.shape:
            raise ValueError("values and mask must have one entry per Fourier bin")
        v[m] = 0
        bad = ~np.isfinite(v)
        if np.any(bad):
            k = self.grid.k[bad][0]
            raise SymbolValueError(f"{self.label or 'symbol'} is not finite on the unmasked bin k={k!r}")
        v.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    def __call__(self, psi: StateVector) -> StateVector:
        return apply_multiplier(self, psi)

    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def compose(self, other: "MultiplierOp") -> "MultiplierOp":
        return MultiplierOp(self.grid, self.values * other.values, self.mask | other.mask,
                            f"{self.label}*{other.label}")


SymbolLike = Union[MultiplierOp, SpectralSymbol, ExprTree, Callable[[np.ndarray], np.ndarray], np.ndarray]


def multiplier(f: SymbolLike, grid: GridSpec, Z: SingularSet | None = None, label: str = "") -> MultiplierOp:
    """Tabulate ``f`` on the grid's Fourier bins, masking Z if given."""
    if isinstance(f, MultiplierOp):
        return f
    k = grid.k
    mask = Z.mask(k) if Z is not None else np.zeros(k.shape, dtype=bool)
    if callable(f):
        with np.errstate(all="ignore"):
            values = np.broadcast_to(np.asarray(f(k)), k.shape).copy()
    else:
        values = np.asarray(f)
    values = np.where(mask, 0, values)
    return MultiplierOp(grid, values, mask, label)


def _apply_values(values: np.ndarray, psi: StateVector) -> StateVector:
    if np.all(values == values[0]):
        # constant symbols act as scalars exactly, with no transform round-off
        return psi * values[0].item()
    if psi.rep == "fourier":
        return StateVector(psi.grid, psi.amplitudes * values, "fourier")
    a = np.fft.ifft(np.fft.ifftshift(values) * np.fft.fft(psi.amplitudes))
    return StateVector(psi.grid, a, "position")


def apply_multiplier(f: SymbolLike, psi: StateVector, Z: SingularSet | None = None) -> StateVector:
    """f(P) psi, computed as from_fourier(f(k) * to_fourier(psi))."""
    op = multiplier(f, psi.grid, Z)
    if op.grid != psi.grid:
        raise ValueError("multiplier and state live on different grids")
    return _apply_values(op.values, psi)


def _fourier_mass_fraction(psi: StateVector) -> np.ndarray:
    a = psi.amplitudes if psi.rep == "fourier" else np.fft.fftshift(np.fft.fft(psi.amplitudes))
    p = np.abs(a) ** 2
    total = p.sum()
    return p / total if total > 0 else p


def evolution_values(g: SymbolLike, t: float, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """exp(-i t g(k_n)), with 1 on bins where g is not finite; returns the
    values and the boolean array of those non-finite bins."""
    gk = g.g(grid.k) if isinstance(g, SpectralSymbol) else (g.values if isinstance(g, MultiplierOp) else None)
    if gk is None:
        with np.errstate(all="ignore"):
            gk = np.broadcast_to(np.asarray(g(grid.k), dtype=float), grid.k.shape)
    bad = ~np.isfinite(gk)
    if t == 0:
        return np.ones(grid.N, dtype=complex), bad
    values = np.ones(grid.N, dtype=complex)
    values[~bad] = np.exp(-1j * t * gk[~bad])
    return values, bad


def evolve(g: SymbolLike, t: float, psi: StateVector) -> StateVector:
    """exp(-i t g(P)) psi.

    Bins where g is not finite must carry no more than 1e-14 of the state's
    squared norm; they are left untouched.
    """
    values, bad = evolution_values(g, float(t), psi.grid)
    if np.any(bad):
        frac = _fourier_mass_fraction(psi)
        if frac[bad].max() > 1e-14:
            k = psi.grid.k[bad][np.argmax(frac[bad])]
            raise SymbolValueError(f"g is not finite at k={k!r}, where the state carries mass")
    return _apply_values(values, psi)


def gprime_op(sym: SpectralSymbol, Z: SingularSet, grid: GridSpec) -> MultiplierOp:
    """g' on the Fourier bins, zero on the masked bins."""
    if not Z.margin > 2 * grid.dk:
        raise MarginError(f"margin {Z.margin} must exceed two bins (2 dk = {2 * grid.dk})")
    op = multiplier(sym.gprime, grid, Z, label="g'")
    small = ~op.mask & (np.abs(op.values) < 1e-13)
    if np.any(small):
        raise SymbolValueError(
            f"g' vanishes at the unmasked bin k={grid.k[small][0]!r}; singular set detection missed a zero"
        )
    return op


def gprime_inv_op(sym: SpectralSymbol, Z: SingularSet, grid: GridSpec) -> MultiplierOp:
    """1/g' on the unmasked bins, zero on the masked bins."""
    d = gprime_op(sym, Z, grid)
    inv = np.zeros(grid.N)
    inv[~d.mask] = 1.0 / d.values[~d.mask]
    return MultiplierOp(grid, inv, d.mask, label="1/g'")


def masked_mass(psi: StateVector, Z: SingularSet) -> float:
    """Fraction of the squared norm carried by masked Fourier bins."""
    frac = _fourier_mass_fraction(psi)
    return float(frac[Z.mask(psi.grid.k)].sum())
