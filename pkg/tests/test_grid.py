import numpy as np
import pytest

from strongtime.grid import GridMismatchError, StateVector, from_fourier, inner, make_grid, to_fourier


def naive_fourier(psi):
    """Direct O(N^2) sum psi_hat(k_n) = dx/sqrt(2 pi) sum_j psi_j exp(-i k_n x_j)."""
    g = psi.grid
    out = np.array([np.sum(psi.amplitudes * np.exp(-1j * k * g.x)) for k in g.k])
    return out * g.dx / np.sqrt(2 * np.pi)


def random_state(grid, rng):
    return StateVector(grid, rng.normal(size=grid.N) + 1j * rng.normal(size=grid.N))


def test_small_grid_points():
    g = make_grid(8, 8)
    np.testing.assert_array_equal(g.x, np.arange(-4, 4))
    np.testing.assert_allclose(g.k, np.pi * np.arange(-4, 4) / 4, rtol=1e-15)


def test_default_grid_spacing():
    g = make_grid(4096, 200)
    assert g.dk == pytest.approx(0.0314159, abs=1e-7)
    assert g.kmax == pytest.approx(64.34, abs=5e-3)
    assert g.kmax == pytest.approx(np.pi * 4096 / 200)


@pytest.mark.parametrize("N, L", [(10, 8), (4, 8), (8, 0), (8, -1), (16.0, 8)])
def test_invalid_grids(N, L):
    with pytest.raises(ValueError):
        make_grid(N, L)


def test_constant_goes_to_dc_bin():
    g = make_grid(64, 10)
    hat = to_fourier(StateVector(g, np.ones(g.N)))
    dc = g.N // 2
    assert abs(hat.amplitudes[dc]) > 0
    assert np.max(np.abs(np.delete(hat.amplitudes, dc))) < 1e-14


def test_plane_wave_single_bin():
    g = make_grid(64, 10)
    k5 = 5 * g.dk
    hat = to_fourier(StateVector(g, np.exp(1j * k5 * g.x)))
    i5 = g.N // 2 + 5
    assert g.k[i5] == pytest.approx(k5)
    assert np.max(np.abs(np.delete(hat.amplitudes, i5))) < 1e-13 * abs(hat.amplitudes[i5])


@pytest.mark.parametrize("N, L", [(8, 8), (64, 10.0), (256, 60.0)])
def test_transform_matches_naive_sum(N, L):
    g = make_grid(N, L)
    psi = random_state(g, np.random.default_rng(N))
    np.testing.assert_allclose(to_fourier(psi).amplitudes, naive_fourier(psi), rtol=0, atol=1e-12 * psi.norm())


def test_round_trip():
    g = make_grid(4096, 200)
    psi = random_state(g, np.random.default_rng(0))
    back = from_fourier(to_fourier(psi))
    assert (back - psi).norm() <= 1e-13 * psi.norm()


def test_unitarity_and_linearity_random():
    g = make_grid(512, 40)
    rng = np.random.default_rng(7)
    for _ in range(100):
        a, b = random_state(g, rng), random_state(g, rng)
        c = complex(*rng.normal(size=2))
        assert to_fourier(a).norm() == pytest.approx(a.norm(), rel=1e-13)
        lhs = to_fourier(a + c * b)
        rhs = to_fourier(a) + c * to_fourier(b)
        assert (lhs - rhs).norm() <= 1e-13 * lhs.norm()


def test_parseval():
    g = make_grid(1024, 50)
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b = random_state(g, rng), random_state(g, rng)
        pos = inner(a, b)
        four = inner(to_fourier(a), to_fourier(b))
        assert abs(pos - four) <= 1e-12 * abs(pos)


def test_inner_basics():
    g = make_grid(64, 10)
    rng = np.random.default_rng(1)
    a = random_state(g, rng)
    assert inner(a, a).real == pytest.approx(a.norm() ** 2)
    assert inner(a, a).imag == 0
    left = StateVector(g, np.where(g.x < 0, 1.0, 0.0))
    right = StateVector(g, np.where(g.x >= 0, 1.0, 0.0))
    assert inner(left, right) == 0
    p1 = StateVector(g, np.exp(1j * g.dk * g.x))
    p2 = StateVector(g, np.exp(2j * g.dk * g.x))
    assert abs(inner(p1, p2)) < 1e-13


def test_inner_is_antilinear_in_first_argument():
    g = make_grid(64, 10)
    rng = np.random.default_rng(2)
    a, b = random_state(g, rng), random_state(g, rng)
    assert inner(1j * a, b) == pytest.approx(-1j * inner(a, b))
    assert inner(a, 1j * b) == pytest.approx(1j * inner(a, b))


def test_grid_mismatch():
    a = StateVector(make_grid(8, 8), np.ones(8))
    b = StateVector(make_grid(8, 9), np.ones(8))
    with pytest.raises(GridMismatchError):
        inner(a, b)
    with pytest.raises(GridMismatchError):
        a + b


def test_state_vector_is_immutable():
    a = StateVector(make_grid(8, 8), np.ones(8))
    with pytest.raises(ValueError):
        a.amplitudes[0] = 2
    with pytest.raises(ValueError):
        StateVector(make_grid(8, 8), [np.nan] * 8)
