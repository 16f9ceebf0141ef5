"""Residuals of the operator identities, scenario runner and convergence study.

Every residual is a relative norm, ||lhs - rhs|| / ||phi||, so it is
invariant under scaling and global phase of the input state.
"""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .expr import ExprTree, SpectralSymbol, differentiate, parse, pretty
from .grid import GridSpec, StateVector, inner, make_grid
from .spectral import SymbolValueError, apply_multiplier, evolve, multiplier
from .states import BumpProfile, TestVector, gaussian, make_test_vector
from .timeop import TimeOperator, apply_D, apply_Q, expectation_D, symmetry_defect, time_operator

__all__ = [
    "weak_weyl_residual", "arai_residual", "step_residuals", "StepResiduals", "weyl_residual_PQ",
    "expectation_shift_residual", "Scenario", "ResidualEntry", "ResidualReport", "ConvergenceResult",
    "convergence_study", "setup", "run_scenario", "run_scenarios", "DEFAULT_TOLERANCES", "EXACT_TOL",
    "SUITES", "FLOOR", "ResourceCapError", "arai_symbol", "random_test_vectors",
]

EXACT_TOL = 1e-13
FLOOR = 1e-11
MAX_N = 2**22

DEFAULT_TOLERANCES = {
    "weak_weyl": 1e-6,
    "q_ginv": 1e-6,
    "q_shift": 1e-6,
    "ginv_q": 1e-6,
    "triangle": EXACT_TOL,
    "arai": 1e-8,
    "weyl_pq": 1e-8,
    "expectation_shift": 1e-8,
    "symmetry": 1e-10,
    "closed_form": 1e-12,
    "closed_form_multiplier": 1e-12,
    "oracle": 1e-10,
    "convergence_ratio": 4.0,
}

SUITES = ("weak_weyl", "arai", "steps", "weyl_pq", "expectation", "convergence", "oracle",
          "symmetry", "closed_form")


class ResourceCapError(RuntimeError):
    pass


def _rel(diff: StateVector, ref: StateVector) -> float:
    return diff.norm() / ref.norm()


def _state(phi):
    return phi.state if isinstance(phi, TestVector) else phi


# --------------------------------------------------------------------------
# residuals

def weak_weyl_residual(op: TimeOperator, phi: TestVector | StateVector, t: float) -> float:
    """||D U phi - U (D + t) phi|| / ||phi|| with U = exp(-i t g(P))."""
    psi = _state(phi)
    g = op.symbol
    lhs = apply_D(op, evolve(g, t, psi))
    rhs = evolve(g, t, apply_D(op, psi) + t * psi)
    return _rel(lhs - rhs, psi)


def arai_symbol(f, params: Mapping[str, float] | None = None) -> tuple[Callable, Callable]:
    """Turn an expression (string/tree), a (real, imaginary) pair of
    expressions or a symbol into callables for f and f'."""
    if isinstance(f, SpectralSymbol):
        return f.g, f.gprime
    if isinstance(f, (str, ExprTree)):
        tree = parse(f, params) if isinstance(f, str) else f
        return tree, differentiate(tree)
    if isinstance(f, (tuple, list)) and len(f) == 2:
        re_f, re_d = arai_symbol(f[0], params)
        im_f, im_d = arai_symbol(f[1], params)
        return (lambda k: re_f(k) + 1j * im_f(k)), (lambda k: re_d(k) + 1j * im_d(k))
    raise TypeError(f"cannot interpret {f!r} as a symbol")


def _arai_ops(f, phi: StateVector, fprime, params):
    if fprime is None:
        fn, dfn = arai_symbol(f, params)
    else:
        fn, dfn = f, fprime
    grid = phi.grid
    F = multiplier(fn, grid, label="f")
    dF = multiplier(dfn, grid, label="f'")
    return F, dF


def arai_residual(f, phi: StateVector | TestVector, fprime: Callable | None = None,
                  params: Mapping[str, float] | None = None) -> float:
    """||Q f(P) phi - f(P) Q phi - i f'(P) phi|| / ||phi||.

    ``f`` is an expression, a (real, imaginary) pair of expressions, or a
    callable together with ``fprime``.  Raises SymbolValueError when f or
    f' is not finite on the frequency window.
    """
    psi = _state(phi)
    F, dF = _arai_ops(f, psi, fprime, params)
    lhs = apply_Q(apply_multiplier(F, psi))
    rhs = apply_multiplier(F, apply_Q(psi)) + 1j * apply_multiplier(dF, psi)
    return _rel(lhs - rhs, psi)


class StepResiduals(NamedTuple):
    q_ginv: float
    q_shift: float
    ginv_q: float


def step_residual_vectors(op: TimeOperator, phi, t: float) -> dict[str, StateVector]:
    psi = _state(phi)
    g = op.symbol
    ginv = op.gprime_inv
    U = lambda v: evolve(g, t, v)  # noqa: E731
    Upsi = U(psi)
    q_ginv = apply_Q(apply_multiplier(ginv, Upsi)) - U(apply_Q(apply_multiplier(ginv, psi)) + t * psi)
    q_shift = apply_Q(Upsi) - U(apply_Q(psi) + t * apply_multiplier(op.gprime, psi))
    ginv_q = apply_multiplier(ginv, apply_Q(Upsi)) - U(apply_multiplier(ginv, apply_Q(psi)) + t * psi)
    return {"q_ginv": q_ginv, "q_shift": q_shift, "ginv_q": ginv_q}


def step_residuals(op: TimeOperator, phi, t: float) -> StepResiduals:
    """The three intermediate identities of the weak Weyl proof:

    q_ginv: Q G U phi = U (Q G + t) phi
    q_shift: Q U phi   = U (Q + t g'(P)) phi
    ginv_q: G Q U phi = U (G Q + t) phi

    with G = g'(P)^{-1} and U = exp(-i t g(P)).
    """
    psi = _state(phi)
    vecs = step_residual_vectors(op, psi, t)
    return StepResiduals(*(_rel(vecs[name], psi) for name in StepResiduals._fields))


def weyl_residual_PQ(psi: StateVector | TestVector, s: float, t: float) -> float:
    """||e^{-isQ} e^{-itP} psi - e^{-ist} e^{-itP} e^{-isQ} psi|| / ||psi||."""
    psi = _state(psi)
    phase = StateVector(psi.grid, np.exp(-1j * s * psi.grid.x))
    eQ = lambda v: StateVector(v.grid, phase.amplitudes * v.amplitudes)  # noqa: E731
    eP = lambda v: evolve(lambda k: k, t, v)  # noqa: E731
    lhs = eQ(eP(psi))
    rhs = np.exp(-1j * s * t) * eP(eQ(psi))
    return _rel(lhs - rhs, psi)


def expectation_shift_residual(op: TimeOperator, phi, t: float) -> float:
    """|<D>_{U phi} - <D>_phi - t|."""
    psi = _state(phi)
    before, _ = expectation_D(op, psi)
    after, _ = expectation_D(op, evolve(op.symbol, t, psi))
    return abs(after - before - t)


# --------------------------------------------------------------------------
# scenarios

@dataclass(frozen=True)
class Scenario:
    """One symbol on one grid with one test vector, plus the suites to run."""

    id: str = "default"
    symbol: str = "x"
    params: Mapping[str, float] = field(default_factory=dict)
    preset: str | None = None
    N: int = 4096
    L: float = 200.0
    bump: tuple[float, float] = (1.0, 5.0)
    x0: float = 0.0
    sigma: float = 5.0
    k0: float = 3.0
    t: tuple[float, ...] = (0.1, 0.5, 1.0)
    weyl_pairs: tuple[tuple[float, float], ...] = ((1.0, 1.0), (math.pi, 2.0))
    suites: tuple[str, ...] = ("weak_weyl",)
    tolerances: Mapping[str, float] = field(default_factory=dict)
    arai: tuple = ("sin(x)", ("cos(x)", "-sin(x)"), "1/(1 + x^2)", "1")
    levels: int = 3
    margin: float | None = None
    pairs: int = 50
    seed: int = 0

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def refined(self, factor: int) -> "Scenario":
        return replace(self, N=self.N * factor, L=self.L * factor)


def setup(sc: Scenario) -> tuple[GridSpec, TimeOperator, TestVector, StateVector]:
    """Grid, time operator, certified test vector and the unfiltered Gaussian."""
    grid = make_grid(sc.N, sc.L)
    op = time_operator(sc.symbol, grid, sc.params, sc.margin)
    phi = gaussian(grid, sc.x0, sc.sigma, sc.k0)
    Phi = make_test_vector(phi, BumpProfile(*sc.bump), op.Z, {"x0": sc.x0, "sigma": sc.sigma, "k0": sc.k0})
    return grid, op, Phi, phi


def random_test_vectors(sc: Scenario, grid: GridSpec, op: TimeOperator, count: int,
                        rng: np.random.Generator) -> list[TestVector]:
    """Gaussians with random centre, width and carrier inside the scenario bump."""
    a, b = sc.bump
    half = grid.L / 2
    out = []
    for _ in range(count):
        sigma = rng.uniform(2.0, min(8.0, half / 9))
        x0 = rng.uniform(-half / 10, half / 10)
        k0 = rng.uniform(a + 0.3 * (b - a), b - 0.3 * (b - a))
        phi = gaussian(grid, x0, sigma, k0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        out.append(make_test_vector(phi, BumpProfile(a, b), op.Z, {"x0": x0, "sigma": sigma, "k0": k0}))
    return out


@dataclass
class ResidualEntry:
    name: str
    value: float
    tolerance: float
    relation: str = "<="
    t: float | None = None
    s: float | None = None
    N: int | None = None
    L: float | None = None
    passed: bool = field(init=False)

    def __post_init__(self):
        self.value = float(self.value)
        self.passed = bool(self.value <= self.tolerance if self.relation == "<=" else self.value >= self.tolerance)


@dataclass
class ResidualReport:
    scenario: Scenario
    entries: list[ResidualEntry] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    convergence: list[dict] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, name, value, tolerance, **kw) -> ResidualEntry:
        kw.setdefault("N", self.scenario.N)
        kw.setdefault("L", self.scenario.L)
        entry = ResidualEntry(name, value, tolerance, **kw)
        self.entries.append(entry)
        return entry

    def get(self, name: str, **match) -> list[ResidualEntry]:
        return [e for e in self.entries if e.name == name and all(getattr(e, k) == v for k, v in match.items())]

    def to_dict(self) -> dict:
        sc = asdict(self.scenario)
        return {
            "scenario": sc,
            "symbol": self.scenario.symbol,
            "passed": self.passed,
            "entries": [asdict(e) for e in self.entries],
            "warnings": list(self.warnings),
            "convergence": list(self.convergence),
            "wall_time": self.wall_time,
        }


@dataclass
class ConvergenceResult:
    levels: list[tuple[int, float]]
    residuals: list[float]
    ratios: list[float | None]
    passed: bool
    floor: float = FLOOR


def _ratios(residuals: Sequence[float], floor: float) -> list[float | None]:
    out = []
    for a, b in zip(residuals, residuals[1:]):
        # ratios are only meaningful above the round-off floor
        if a <= floor or b <= floor:
            out.append(None)
        else:
            out.append(a / b)
    return out


def convergence_study(sc: Scenario, levels: int | None = None, t: float = 1.0,
                      residual: str = "weak_weyl", floor: float = FLOOR,
                      min_ratio: float = 4.0) -> ConvergenceResult:
    """Residual at (N, L), (2N, 2L), ...; passes when every ratio between
    consecutive levels above ``floor`` is at least ``min_ratio``."""
    levels = sc.levels if levels is None else levels
    if levels < 2:
        raise ValueError("a convergence study needs at least two levels")
    if sc.N * 2 ** (levels - 1) > MAX_N:
        raise ResourceCapError(f"N would reach {sc.N * 2 ** (levels - 1)} > {MAX_N}")
    funcs = {
        "weak_weyl": lambda op, Phi: weak_weyl_residual(op, Phi, t),
        "expectation_shift": lambda op, Phi: expectation_shift_residual(op, Phi, t),
        "q_ginv": lambda op, Phi: step_residuals(op, Phi, t).q_ginv,
        "q_shift": lambda op, Phi: step_residuals(op, Phi, t).q_shift,
        "ginv_q": lambda op, Phi: step_residuals(op, Phi, t).ginv_q,
    }
    res, dims = [], []
    for i in range(levels):
        s = sc.refined(2**i)
        _, op, Phi, _ = setup(s)
        res.append(funcs[residual](op, Phi))
        dims.append((s.N, s.L))
    ratios = _ratios(res, floor)
    passed = all(r is None or r >= min_ratio for r in ratios)
    return ConvergenceResult(dims, res, ratios, passed, floor)


def _time_tol(sc, name, t):
    return EXACT_TOL if t == 0 else sc.tol(name)


def run_scenario(sc: Scenario) -> ResidualReport:
    """Run every selected suite of one scenario."""
    for suite in sc.suites:
        if suite not in SUITES:
            raise ValueError(f"unknown suite {suite!r}")
    report = ResidualReport(sc)
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        grid, op, Phi, phi = setup(sc)
        suites = set(sc.suites)

        if "weak_weyl" in suites:
            for t in sc.t:
                report.add("weak_weyl", weak_weyl_residual(op, Phi, t), _time_tol(sc, "weak_weyl", t), t=t)

        if "steps" in suites:
            for t in sc.t:
                st = step_residuals(op, Phi, t)
                for name in StepResiduals._fields:
                    report.add(name, getattr(st, name), _time_tol(sc, name, t), t=t)
                ww = weak_weyl_residual(op, Phi, t)
                report.add("triangle", ww - 0.5 * (st.q_ginv + st.ginv_q), sc.tol("triangle"), t=t)

        if "arai" in suites:
            for f in sc.arai:
                fn, dfn = arai_symbol(f, sc.params)
                const = not np.any(multiplier(dfn, grid).values)
                value = arai_residual(fn, phi, fprime=dfn)
                label = f if isinstance(f, str) else f"{f[0]} + i*({f[1]})"
                report.add(f"arai[{label}]", value, EXACT_TOL if const else sc.tol("arai"))

        if "weyl_pq" in suites:
            for s, t in sc.weyl_pairs:
                tol = EXACT_TOL if s == 0 or t == 0 else sc.tol("weyl_pq")
                report.add("weyl_pq", weyl_residual_PQ(phi, s, t), tol, s=s, t=t)

        if "expectation" in suites:
            for t in sc.t:
                report.add("expectation_shift", expectation_shift_residual(op, Phi, t),
                           _time_tol(sc, "expectation_shift", t), t=t)

        if "symmetry" in suites:
            rng = np.random.default_rng(sc.seed)
            vecs = random_test_vectors(sc, grid, op, 2 * sc.pairs, rng)
            worst = max(symmetry_defect(op, a, b) for a, b in zip(vecs[::2], vecs[1::2]))
            report.add("symmetry", worst, sc.tol("symmetry"))

        if "closed_form" in suites:
            from .presets import get_preset

            if sc.preset is None:
                raise ValueError("the closed_form suite needs a preset")
            p = get_preset(sc.preset)
            D_gen = apply_D(op, Phi)
            D_closed = p.closed_form_D(grid, op.Z, Phi.state)
            report.add("closed_form", _rel(D_gen - D_closed, D_gen), sc.tol("closed_form"))
            m = ~op.gprime_inv.mask
            ref = p.closed_form_inverse(grid.k)[m]
            dev = np.max(np.abs(op.gprime_inv.values[m] - ref) / np.abs(ref))
            report.add("closed_form_multiplier", dev, sc.tol("closed_form_multiplier"))

        if "convergence" in suites:
            for t in sc.t:
                if t == 0:
                    continue
                cs = convergence_study(sc, t=t)
                for (N, L), r in zip(cs.levels, cs.residuals):
                    report.add("convergence_level", r, sc.tol("weak_weyl"), t=t, N=N, L=L)
                    report.convergence.append({"t": t, "N": N, "L": L, "residual": r})
                for i, ratio in enumerate(cs.ratios):
                    if ratio is not None:
                        N, L = cs.levels[i + 1]
                        report.add("convergence_ratio", ratio, sc.tol("convergence_ratio"),
                                   relation=">=", t=t, N=N, L=L)

        if "oracle" in suites:
            from .oracle import cross_check

            dev, _ = cross_check(sc)
            report.add("oracle", dev, sc.tol("oracle"))

    report.warnings = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    report.wall_time = time.perf_counter() - start
    return report


def run_scenarios(scenarios: Sequence[Scenario], jobs: int = 1) -> list[ResidualReport]:
    """Run scenarios, in a process pool when ``jobs > 1``; sorted by id."""
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_scenario, scenarios))
    else:
        reports = [run_scenario(sc) for sc in scenarios]
    return sorted(reports, key=lambda r: r.scenario.id)
