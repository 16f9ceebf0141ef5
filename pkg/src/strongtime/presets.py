"""Named symbols with hand-written closed forms of their time operators.

Each closed form is applied by chaining elementary multipliers (P, P^-1,
H(P), ...) around Q, independently of the generic 1/g' route.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import GridSpec, StateVector
from .spectral import SingularSet, apply_multiplier, multiplier
from .timeop import apply_Q

__all__ = ["Preset", "PRESETS", "get_preset", "preset_table"]


def _inv_k(grid: GridSpec, Z: SingularSet):
    # masked P^{-1}
    with np.errstate(divide="ignore"):
        return multiplier(lambda k: 1.0 / k, grid, Z, "P^-1")


@dataclass(frozen=True)
class Preset:
    name: str
    text: str
    params: dict = field(default_factory=dict)
    Z: str = ""
    D_form: str = ""
    description: str = ""
    inverse: Callable[[np.ndarray, dict], np.ndarray] | None = None
    apply: Callable[[GridSpec, SingularSet, StateVector, dict], StateVector] | None = None

    def closed_form_inverse(self, k: np.ndarray) -> np.ndarray:
        """1/g'(k) written out by hand."""
        with np.errstate(all="ignore"):
            return self.inverse(np.asarray(k, dtype=float), self.params)

    def closed_form_D(self, grid: GridSpec, Z: SingularSet, psi: StateVector) -> StateVector:
        return self.apply(grid, Z, psi, self.params)


def _ab_apply(grid, Z, psi, p):
    pinv = _inv_k(grid, Z)
    return 0.5 * (apply_multiplier(pinv, apply_Q(psi)) + apply_Q(apply_multiplier(pinv, psi)))


def _log_apply(grid, Z, psi, p):
    P = multiplier(lambda k: k, grid, Z, "P")
    return 0.5 * (apply_multiplier(P, apply_Q(psi)) + apply_Q(apply_multiplier(P, psi)))


def _semirel_apply(grid, Z, psi, p):
    m = p["m"]
    H = multiplier(lambda k: np.sqrt(k**2 + m**2), grid, Z, "H(P)")
    pinv = _inv_k(grid, Z)
    left = apply_multiplier(H, apply_multiplier(pinv, apply_Q(psi)))
    right = apply_Q(apply_multiplier(pinv, apply_multiplier(H, psi)))
    return 0.5 * (left + right)


def _fractional_apply(grid, Z, psi, p):
    m, alpha = p["m"], p["alpha"]
    kin = multiplier(lambda k: k**2 + m**2, grid, Z, "P^2+m^2")
    hinv = multiplier(lambda k: (k**2 + m**2) ** (-alpha / 2), grid, Z, "H_alpha^-1")
    pinv = _inv_k(grid, Z)
    left = apply_multiplier(kin, apply_multiplier(pinv, apply_multiplier(hinv, apply_Q(psi))))
    right = apply_Q(apply_multiplier(hinv, apply_multiplier(pinv, apply_multiplier(kin, psi))))
    return (1 / (2 * alpha)) * (left + right)


PRESETS: dict[str, Preset] = {
    "polynomial": Preset(
        "polynomial", "x^2/2", {}, "{0}", "1/2 (P^-1 Q + Q P^-1)",
        "free kinetic energy; D is the Aharonov-Bohm operator",
        lambda k, p: 1.0 / k, _ab_apply,
    ),
    "log_abs": Preset(
        "log_abs", "log(abs(x))", {}, "{0}", "1/2 (HT + TH) = 1/2 (PQ + QP)",
        "logarithm of |P|",
        lambda k, p: k, _log_apply,
    ),
    "semirelativistic": Preset(
        "semirelativistic", "sqrt(x^2 + m^2)", {"m": 1.0}, "{0} (g'(0) = 0)",
        "1/2 (H(P) P^-1 Q + Q P^-1 H(P)),  H(P) = sqrt(P^2 + m^2)",
        "semi-relativistic kinetic energy",
        lambda k, p: np.sqrt(k**2 + p["m"] ** 2) / k, _semirel_apply,
    ),
    "fractional": Preset(
        "fractional", "(x^2 + m^2)^(alpha/2)", {"m": 1.0, "alpha": 0.6}, "{0}",
        "1/(2 alpha) ((P^2+m^2) P^-1 H_alpha(P)^-1 Q + Q H_alpha(P)^-1 P^-1 (P^2+m^2)),"
        "  H_alpha(P) = (P^2 + m^2)^(alpha/2)",
        "fractional kinetic energy",
        lambda k, p: (k**2 + p["m"] ** 2) / (p["alpha"] * k * (k**2 + p["m"] ** 2) ** (p["alpha"] / 2)),
        _fractional_apply,
    ),
}
_ALIASES = {"aharonov_bohm": "polynomial"}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[_ALIASES.get(name, name)]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_table() -> list[dict]:
    """One row per preset: name, g, g', Z and the closed form of D."""
    from .expr import differentiate, parse, pretty

    rows = []
    for p in PRESETS.values():
        g = parse(p.text, p.params)
        rows.append({
            "name": p.name, "g": p.text, "params": dict(p.params), "g_parsed": pretty(g),
            "gprime": pretty(differentiate(g)), "Z": p.Z, "D": p.D_form, "description": p.description,
        })
    return rows
