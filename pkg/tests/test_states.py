import numpy as np
import pytest

from strongtime.grid import StateVector, make_grid, to_fourier
from strongtime.spectral import SingularSet, apply_multiplier, masked_mass
from strongtime.states import (AdmissibilityError, BumpProfile, TestVector, boundary_mass, combine, gaussian,
                               make_test_vector)


def test_bump_profile():
    rho = BumpProfile(1.0, 5.0)
    k = np.linspace(-2, 8, 10001)
    v = rho(k)
    assert np.all(v[(k <= 1) | (k >= 5)] == 0)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(v[(k > 1.1) & (k < 4.9)] > 0)
    assert rho(3.0) == 1.0
    with pytest.raises(ValueError):
        BumpProfile(2.0, 2.0)


def test_bump_is_smooth_at_edges():
    rho = BumpProfile(-1.0, 1.0)
    # flat to all orders at the edge: rho(1 - h) ~ exp(-1/(2h))
    k = 1 - np.array([1e-3, 2e-3, 5e-3])
    assert np.max(rho(k)) < 1e-40


def test_default_gaussian(grid):
    psi = gaussian(grid, 0.0, 5.0, 3.0)
    assert psi.norm() == pytest.approx(1.0, rel=1e-14)
    # tail beyond |x| = 90 is below exp(-(90/5)^2) relative
    assert boundary_mass(psi) <= 1e-10


def test_real_gaussian(grid):
    psi = gaussian(grid, 2.0, 3.0, 0.0)
    assert np.all(psi.amplitudes.imag == 0) and np.all(psi.amplitudes.real >= 0)


def test_gaussian_footprint(grid):
    with pytest.raises(ValueError, match="footprint"):
        gaussian(grid, 0.0, 20.0, 0.0)
    with pytest.raises(ValueError):
        gaussian(grid, 0.0, 0.0, 0.0)


def test_test_vector_disjoint_support(grid, base_gaussian):
    Z = SingularSet((0.0,), 0.5)
    tv = make_test_vector(base_gaussian, BumpProfile(1.0, 5.0), Z)
    assert tv.masked_mass <= 1e-30
    assert tv.state.norm() == pytest.approx(1.0)
    assert tv.boundary_mass <= 1e-10


def test_test_vector_overlap_rejected(base_gaussian):
    with pytest.raises(AdmissibilityError, match="excluded region"):
        make_test_vector(base_gaussian, BumpProfile(-0.4, 0.4), SingularSet((0.0,), 0.5))


def test_certificate_is_rechecked(base_gaussian):
    Z = SingularSet((0.0,), 0.5)
    tv = make_test_vector(base_gaussian, BumpProfile(1.0, 5.0), Z)
    with pytest.raises(AdmissibilityError):
        TestVector(tv.state, tv.bumps, tv.base, Z, 1e-6, 0.0)
    with pytest.raises(AdmissibilityError):
        TestVector(tv.state, tv.bumps, tv.base, Z, 0.0, 1e-3)


def test_boundary_heavy_state_rejected():
    g = make_grid(256, 20)
    phi = StateVector(g, np.exp(1j * 3 * g.x))
    with pytest.raises(AdmissibilityError, match="boundary mass"):
        make_test_vector(phi, BumpProfile(1.0, 5.0), SingularSet((0.0,), 0.5))


def test_boundary_mass_examples(grid):
    central = StateVector(grid, np.where(np.abs(grid.x) < grid.L / 4, 1.0, 0.0))
    assert boundary_mass(central) == 0
    uniform = StateVector(grid, np.ones(grid.N))
    assert boundary_mass(uniform) == pytest.approx(0.1, abs=2 / grid.N)
    assert boundary_mass(uniform, 0.2) == pytest.approx(0.4, abs=2 / grid.N)
    with pytest.raises(ValueError):
        boundary_mass(uniform, 0.5)


def test_default_vector_boundary_mass(vectors):
    tv = vectors["polynomial"]
    p = np.abs(tv.state.amplitudes) ** 2
    x = tv.grid.x
    direct = p[np.abs(x) >= 90].sum() / p.sum()
    assert tv.boundary_mass == pytest.approx(direct, abs=1e-300)
    assert tv.boundary_mass <= 1e-10


def _flat_top(k, a=0.5, b=5.5, ramp=0.4):
    # 1 on [a, b], smooth roll-off to 0 over a width ``ramp`` on each side
    def step(u):
        u = np.clip(u, 0, 1)
        with np.errstate(divide="ignore", over="ignore"):
            f0 = np.where(u > 0, np.exp(-1 / np.where(u > 0, u, 1)), 0.0)
            f1 = np.where(u < 1, np.exp(-1 / np.where(u < 1, 1 - u, 1)), 0.0)
        return f0 / (f0 + f1)
    return step((k - a + ramp) / ramp) * step((b + ramp - k) / ramp)


def test_flat_cutoff_is_identity(vectors):
    tv = vectors["polynomial"]
    out = apply_multiplier(_flat_top, tv.state)
    assert (out - tv.state).norm() <= 1e-12


def test_double_filter_stays_in_shape(grid, base_gaussian):
    Z = SingularSet((0.0,), 0.5)
    bump = BumpProfile(1.0, 5.0)
    once = make_test_vector(base_gaussian, bump, Z)
    twice = make_test_vector(once.state, bump, Z)
    hat2 = to_fourier(twice.state).amplitudes
    outside = (grid.k <= 1.0) | (grid.k >= 5.0)
    assert np.max(np.abs(hat2[outside])) <= 1e-15
    assert twice.masked_mass <= 1e-12 and twice.state.norm() == pytest.approx(1.0)


def test_linear_hull(grid):
    Z = SingularSet((0.0,), 0.5)
    a = make_test_vector(gaussian(grid, -10, 4, 2.0), BumpProfile(1.0, 3.0), Z)
    b = make_test_vector(gaussian(grid, 10, 4, -3.0), BumpProfile(-5.0, -1.0), Z)
    c = combine([a, b], [1.0, 2j])
    assert len(c.bumps) == 2 and c.masked_mass <= 1e-12 and c.boundary_mass <= 1e-10
    with pytest.raises(AdmissibilityError, match="disjoint"):
        combine([a, a])


def test_masked_mass_zero_after_filter(vectors):
    for tv in vectors.values():
        hat = to_fourier(tv.state).amplitudes
        assert np.all(np.abs(hat[tv.Z.mask(tv.grid.k)]) <= 1e-15)
        assert masked_mass(tv.state, tv.Z) <= 1e-28
