"""Numerical laboratory for strong time operators of g(P).

For the weak Weyl pair (P, Q) on a periodic grid, builds
D = 1/2 (g'(P)^{-1} Q + Q g'(P)^{-1}) for a symbol g given as text and
measures how well (g(P), D) satisfies the weak Weyl relation and the
identities used to prove it.
"""
__version__ = "0.1.0"

from .expr import SpectralSymbol, build_symbol, differentiate, parse, pretty, singular_points
from .grid import GridSpec, StateVector, from_fourier, inner, make_grid, to_fourier
from .spectral import SingularSet, apply_multiplier, evolve, gprime_inv_op, gprime_op, masked_mass, singular_set
from .presets import PRESETS, get_preset
from .states import BumpProfile, TestVector, boundary_mass, gaussian, gaussian_test_vector, make_test_vector
from .timeop import TimeOperator, apply_D, apply_Q, expectation_D, time_operator
from .verify import (Scenario, arai_residual, convergence_study, expectation_shift_residual, run_scenario,
                     step_residuals, weak_weyl_residual, weyl_residual_PQ)

__all__ = [
    "SpectralSymbol", "build_symbol", "differentiate", "parse", "pretty", "singular_points",
    "GridSpec", "StateVector", "from_fourier", "inner", "make_grid", "to_fourier",
    "SingularSet", "apply_multiplier", "evolve", "gprime_inv_op", "gprime_op", "masked_mass", "singular_set",
    "PRESETS", "get_preset",
    "BumpProfile", "TestVector", "boundary_mass", "gaussian", "gaussian_test_vector", "make_test_vector",
    "TimeOperator", "apply_D", "apply_Q", "expectation_D", "time_operator",
    "Scenario", "arai_residual", "convergence_study", "expectation_shift_residual", "run_scenario",
    "step_residuals", "weak_weyl_residual", "weyl_residual_PQ",
]
