"""Dense-matrix reference path.

Builds explicit N x N matrices for Q, f(P), exp(-i t g(P)) and D from the
naive discrete Fourier matrix and recomputes the residuals by matrix-vector
products.  It shares the discretization with the fast path and differs only
in how operators are applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import SpectralSymbol
from .grid import GridSpec
from .spectral import SingularSet

__all__ = ["DenseOperator", "OracleCapError", "CAP", "fourier_matrix", "build", "cross_check",
           "dense_residuals"]

CAP = 1024


class OracleCapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    grid: GridSpec
    label: str = ""
    hermitian: bool = False

    def __post_init__(self):
        A = self.matrix
        if self.grid.N > CAP:
            raise OracleCapError(f"N = {self.grid.N} exceeds the dense cap {CAP}")
        if A.shape != (self.grid.N, self.grid.N):
            raise ValueError("matrix shape does not match the grid")
        if not np.all(np.isfinite(A)):
            raise ValueError(f"{self.label}: non-finite matrix entry")
        if self.hermitian:
            defect = np.max(np.abs(A - A.conj().T))
            if defect > 1e-12:
                raise ValueError(f"{self.label} claimed Hermitian but |A - A^H| = {defect:.2e}")

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            return DenseOperator(self.matrix @ other.matrix, self.grid, f"{self.label}{other.label}")
        return self.matrix @ other


def fourier_matrix(grid: GridSpec) -> np.ndarray:
    """Unitary F[n, j] = exp(-i k_n x_j) / sqrt(N), rows in centered frequency order."""
    if grid.N > CAP:
        raise OracleCapError(f"N = {grid.N} exceeds the dense cap {CAP}")
    return np.exp(-1j * np.outer(grid.k, grid.x)) / math.sqrt(grid.N)


def _from_diagonal(values: np.ndarray, grid: GridSpec, label: str, hermitian: bool) -> DenseOperator:
    values = np.asarray(values)
    if np.all(values == values[0]):
        return DenseOperator(values[0] * np.eye(grid.N, dtype=complex), grid, label, hermitian)
    F = fourier_matrix(grid)
    return DenseOperator(F.conj().T @ (values[:, None] * F), grid, label, hermitian)


def build(kind: str, grid: GridSpec, f=None, symbol: SpectralSymbol | None = None,
          Z: SingularSet | None = None, t: float = 0.0) -> DenseOperator:
    """Dense matrix of one operator.

    kind: "Q"; "multiplier" (values f(k), masked by Z if given);
    "evolution" (exp(-i t g(k)) for ``symbol``); "D" (for ``symbol`` and ``Z``).
    """
    if grid.N > CAP:
        raise OracleCapError(f"N = {grid.N} exceeds the dense cap {CAP}")
    k = grid.k
    if kind == "Q":
        return DenseOperator(np.diag(grid.x).astype(complex), grid, "Q", hermitian=True)
    if kind == "multiplier":
        with np.errstate(all="ignore"):
            values = np.broadcast_to(np.asarray(f(k)), k.shape).astype(complex)
        if Z is not None:
            values[Z.mask(k)] = 0
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite symbol value")
        return _from_diagonal(values, grid, "f(P)", hermitian=not np.any(values.imag))
    if kind == "evolution":
        gk = symbol.g(k)
        values = np.ones(grid.N, dtype=complex)
        ok = np.isfinite(gk)
        if t != 0:
            values[ok] = np.exp(-1j * t * gk[ok])
        return _from_diagonal(values, grid, "U", hermitian=False)
    if kind == "D":
        dg = symbol.gprime(k)
        mask = Z.mask(k)
        inv = np.zeros(grid.N)
        inv[~mask] = 1.0 / dg[~mask]
        if not np.all(np.isfinite(inv)):
            raise ValueError("non-finite inverse derivative on an unmasked bin")
        G = _from_diagonal(inv, grid, "G", hermitian=True).matrix
        Q = np.diag(grid.x)
        return DenseOperator(0.5 * (G @ Q + Q @ G), grid, "D", hermitian=True)
    raise ValueError(f"unknown operator kind {kind!r}")


def _rel(v, ref):
    return float(np.linalg.norm(v) / np.linalg.norm(ref))


def dense_residuals(sc) -> dict[str, float]:
    """Every residual of the scenario's suites, via dense matrices.

    Keys match :func:`fast_residuals`."""
    from .verify import arai_symbol, setup

    grid, op, Phi, phi = setup(sc)
    v, p = Phi.state.amplitudes, phi.amplitudes
    sym, Z = op.symbol, op.Z
    Q = build("Q", grid).matrix
    D = build("D", grid, symbol=sym, Z=Z).matrix
    mask = Z.mask(grid.k)
    gp = np.where(mask, 0.0, sym.gprime(grid.k))
    Gp = _from_diagonal(gp, grid, "g'", True).matrix
    inv = np.zeros(grid.N)
    inv[~mask] = 1.0 / gp[~mask]
    G = _from_diagonal(inv, grid, "G", True).matrix

    def expect(w):
        return (np.vdot(w, D @ w) / np.vdot(w, w)).real

    out = {}
    for t in sc.t:
        U = build("evolution", grid, symbol=sym, t=t).matrix
        Uv = U @ v
        out[f"weak_weyl@{t!r}"] = _rel(D @ Uv - U @ (D @ v + t * v), v)
        out[f"q_ginv@{t!r}"] = _rel(Q @ (G @ Uv) - U @ (Q @ (G @ v) + t * v), v)
        out[f"q_shift@{t!r}"] = _rel(Q @ Uv - U @ (Q @ v + t * (Gp @ v)), v)
        out[f"ginv_q@{t!r}"] = _rel(G @ (Q @ Uv) - U @ (G @ (Q @ v) + t * v), v)
        out[f"expectation_shift@{t!r}"] = abs(expect(Uv) - expect(v) - t)
    for i, f in enumerate(sc.arai):
        fn, dfn = arai_symbol(f, sc.params)
        Fm = build("multiplier", grid, f=fn).matrix
        dFm = build("multiplier", grid, f=dfn).matrix
        out[f"arai[{i}]"] = _rel(Q @ (Fm @ p) - Fm @ (Q @ p) - 1j * (dFm @ p), p)
    eP_cache = {}
    for s, t in sc.weyl_pairs:
        if t not in eP_cache:
            eP_cache[t] = build("multiplier", grid, f=lambda k, t=t: np.exp(-1j * t * k)).matrix
        eP = eP_cache[t]
        eQ = np.diag(np.exp(-1j * s * grid.x))
        out[f"weyl_pq@{s!r},{t!r}"] = _rel(eQ @ (eP @ p) - np.exp(-1j * s * t) * (eP @ (eQ @ p)), p)
    return out


def fast_residuals(sc) -> dict[str, float]:
    from .verify import (arai_residual, arai_symbol, expectation_shift_residual, setup, step_residuals,
                         weak_weyl_residual, weyl_residual_PQ)

    grid, op, Phi, phi = setup(sc)
    out = {}
    for t in sc.t:
        out[f"weak_weyl@{t!r}"] = weak_weyl_residual(op, Phi, t)
        st = step_residuals(op, Phi, t)
        out[f"q_ginv@{t!r}"], out[f"q_shift@{t!r}"], out[f"ginv_q@{t!r}"] = st
        out[f"expectation_shift@{t!r}"] = expectation_shift_residual(op, Phi, t)
    for i, f in enumerate(sc.arai):
        fn, dfn = arai_symbol(f, sc.params)
        out[f"arai[{i}]"] = arai_residual(fn, phi, fprime=dfn)
    for s, t in sc.weyl_pairs:
        out[f"weyl_pq@{s!r},{t!r}"] = weyl_residual_PQ(phi, s, t)
    return out


def cross_check(sc) -> tuple[float, dict[str, tuple[float, float]]]:
    """Max absolute deviation between fast-path and dense-path residuals,
    and the per-residual pairs (fast, dense)."""
    if sc.N > CAP:
        raise OracleCapError(f"N = {sc.N} exceeds the dense cap {CAP}")
    fast = fast_residuals(sc)
    dense = dense_residuals(sc)
    pairs = {name: (fast[name], dense[name]) for name in fast}
    dev = max(abs(a - b) for a, b in pairs.values())
    return dev, pairs
