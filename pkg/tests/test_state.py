import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpgkin.errors import DegenerateStateError, ProjectionError
from tpgkin.state import (ReducedState, clip_negative, equilibrium_state, marginals, maxwellian,
                          moments, projected_maxwellian, separable_update)
from tpgkin.thermo import default_gas
from tpgkin.vgrid import build_grid, integrate

GRID = build_grid(n=24, span=6.0)
ROT = default_gas("rotational-linear")


def direct_moments(F, grid):
    """Reference moments by brute-force quadrature."""
    v = [np.broadcast_to(x, grid.shape) for x in grid.mesh()]
    rho = integrate(grid, F)
    u = np.array([integrate(grid, vi * F) for vi in v]) / rho
    c = [vi - ui for vi, ui in zip(v, u)]
    sig = np.array([[integrate(grid, ci * cj * F) for cj in c] for ci in c])
    c2 = sum(ci ** 2 for ci in c)
    q = np.array([0.5 * integrate(grid, ci * c2 * F) for ci in c])
    return rho, u, sig, q


class TestReducedState:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            ReducedState(np.ones((8, 8, 8)), [np.ones((8, 8, 9))])

    def test_copy_is_deep(self):
        s = ReducedState(np.ones((8, 8, 8)), [np.ones((8, 8, 8))])
        c = s.copy()
        c.G[0][0, 0, 0] = 5.0
        assert s.G[0][0, 0, 0] == 1.0
        assert s.n_modes == 1


class TestMoments:
    def test_against_brute_force(self, rng):
        F = rng.uniform(0.1, 1.0, GRID.shape) * maxwellian(1.0, [0.2, 0, 0], 1.0, GRID)
        st_ = ReducedState(F, [0.9 * F])
        m = moments(st_, GRID, ROT)
        rho, u, sig, q = direct_moments(F, GRID)
        assert m.rho == pytest.approx(rho, rel=1e-13)
        np.testing.assert_allclose(m.u, u, atol=1e-13)
        np.testing.assert_allclose(m.sigma, sig, atol=1e-13)
        c = [np.broadcast_to(x, GRID.shape) - ui for x, ui in zip(GRID.mesh(), u)]
        qG = np.array([integrate(GRID, ci * 0.9 * F) for ci in c])
        np.testing.assert_allclose(m.q, q + qG, atol=1e-12)

    def test_leading_dimensions(self):
        st_ = equilibrium_state(np.array([1.0, 2.0]), [[0, 0, 0], [0.3, 0, 0]],
                                np.array([1.0, 1.5]), GRID, ROT)
        m = moments(st_, GRID, ROT)
        np.testing.assert_allclose(m.rho, [1.0, 2.0], rtol=1e-13)
        np.testing.assert_allclose(m.T, [1.0, 1.5], rtol=1e-12)
        np.testing.assert_allclose(m.p, [1.0, 3.0], rtol=1e-12)

    def test_degenerate_density(self):
        with pytest.raises(DegenerateStateError):
            moments(ReducedState(np.zeros(GRID.shape), []), GRID, default_gas("monatomic"))

    def test_marginals(self, rng):
        X = rng.random((2, 8, 9, 10))
        xy, xz, yz = marginals(X)
        np.testing.assert_allclose(xy, X.sum(-1))
        np.testing.assert_allclose(xz, X.sum(-2))
        np.testing.assert_allclose(yz, X.sum(-3))


class TestProjection:
    def test_exact_moments(self):
        F = projected_maxwellian(1.3, [0.4, -0.2, 0.1], 1.5 * 0.8, GRID)
        rho, u, sig, _ = direct_moments(F, GRID)
        assert rho == pytest.approx(1.3, rel=1e-14)
        np.testing.assert_allclose(u, [0.4, -0.2, 0.1], atol=1e-14)
        assert 0.5 * np.trace(sig) / rho == pytest.approx(1.2, rel=1e-13)

    def test_close_to_pointwise_maxwellian(self):
        M = maxwellian(1.0, [0.1, 0, 0], 1.0, GRID)
        P = projected_maxwellian(1.0, [0.1, 0, 0], 1.5, GRID)
        assert np.max(np.abs(P - M)) < 1e-5

    def test_rest_state_has_zero_drift_parameter(self):
        dm = projected_maxwellian(1.0, np.zeros(3), 1.5, GRID, full=True)
        np.testing.assert_array_equal(dm.beta, 0.0)

    @settings(max_examples=25, deadline=None)
    @given(rho=st.floats(0.1, 10.0), ux=st.floats(-1.0, 1.0), T=st.floats(0.4, 2.0))
    def test_moment_matching_property(self, rho, ux, T):
        F = projected_maxwellian(rho, [ux, 0.5 * ux, 0.0], 1.5 * T, GRID)
        r, u, sig, _ = direct_moments(F, GRID)
        assert r == pytest.approx(rho, rel=1e-12)
        np.testing.assert_allclose(u, [ux, 0.5 * ux, 0.0], atol=1e-12)
        assert 0.5 * np.trace(sig) / r == pytest.approx(1.5 * T, rel=1e-11)

    def test_velocity_outside_grid(self):
        with pytest.raises(ProjectionError):
            projected_maxwellian(1.0, [100.0, 0, 0], 1.5, GRID)

    def test_non_positive_energy(self):
        with pytest.raises(ProjectionError):
            projected_maxwellian(1.0, [0, 0, 0], 0.0, GRID)


class TestEquilibriumAndHelpers:
    def test_equilibrium_internal_energy(self):
        gas = default_gas("rot-vib")
        s = equilibrium_state(1.0, [0, 0, 0], 1.2, GRID, gas)
        m = moments(s, GRID, gas)
        for mod, e in zip(gas.modes, m.e_int_modes):
            assert e == pytest.approx(mod.e_int(1.2), rel=1e-13)
        assert m.T == pytest.approx(1.2, rel=1e-12)

    def test_separable_update(self, rng):
        out = rng.random((2, 8, 9, 10))
        ref = out.copy()
        X, Y, Z = rng.random((2, 8)), rng.random(9), rng.random(10)
        separable_update(out, np.array([0.5, 2.0]), X, Y, Z)
        ref = np.array([0.5, 2.0])[:, None, None, None] * ref + np.einsum(
            "ci,j,k->cijk", X, Y, Z)
        np.testing.assert_allclose(out, ref, rtol=1e-14)

    def test_clip_negative(self):
        F = np.ones((8, 8, 8))
        F[0, 0, 0] = -1e-9
        s = ReducedState(F, [F.copy()])
        assert clip_negative(s) == 2
        assert s.F.min() == 0.0
