import numpy as np
import pytest

from tpgkin.chapman import (ChannelConfig, ExactRiemann, _channel, ab_fields,
                            bgk_first_order_stress, chapman_enskog_state, closure_residuals,
                            convergence_order, eigen_residuals, predict, window_average)
from tpgkin.state import moments
from tpgkin.thermo import default_gas
from tpgkin.transport import Solver
from tpgkin.vgrid import build_grid, integrate, maxwellian0

ROT = default_gas("rotational-linear")
WIDE = build_grid(n=32, span=8.0)


class TestPredict:
    def test_bgk(self):
        p = predict("bgk", 0.1, 2.0, 1.0, ROT)
        assert p.mu == pytest.approx(0.2)
        assert p.kappa == pytest.approx(0.2 * 3.5)
        assert p.Pr == pytest.approx(1.0)
        assert p.alpha == pytest.approx(0.4)

    def test_fp(self):
        p = predict("fp", 0.1, 2.0, 1.0, ROT)
        assert p.mu == pytest.approx(0.1)
        assert p.Pr == pytest.approx(1.5)

    @pytest.mark.parametrize("kind", ["harmonic-vibrational", "tabulated", "rot-vib"])
    @pytest.mark.parametrize("T", [0.5, 1.0, 2.0])
    def test_alpha(self, kind, T):
        g = default_gas(kind)
        c_v = float(g.c_v(T))
        assert predict("fp", 1.0, 1.0, T, g).alpha == pytest.approx(g.R / c_v, abs=1e-12)

    def test_monatomic_alpha(self):
        assert predict("bgk", 1.0, 1.0, 1.0, default_gas("monatomic")).alpha == \
            pytest.approx(2.0 / 3.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            predict("es-bgk", 1.0, 1.0, 1.0, ROT)
        with pytest.raises(ValueError):
            predict("bgk", 1.0, 0.0, 1.0, ROT)


class TestFields:
    def test_moment_orthogonality(self):
        f = ab_fields(WIDE, np.zeros(3), 1.0, default_gas("rot-vib"))
        M0 = maxwellian0(WIDE)
        # A carries no momentum; B is trace-free against the collision invariants
        for i in range(3):
            assert abs(integrate(WIDE, f.A[i] * f.V[i] * M0)) < 1e-8
        assert abs(integrate(WIDE, f.B[0, 0] * M0)) < 1e-8

    def test_shapes(self):
        g = build_grid(n=8)
        f = ab_fields(g, np.zeros(3), 1.0, ROT)
        assert f.A.shape == (3, 8, 8, 8)
        assert f.B.shape == (3, 3, 8, 8, 8)

    def test_bgk_first_order_stress(self):
        gu = np.array([[0.0, 0.3, 0.0], [0.1, -0.2, 0.0], [0.0, 0.0, 0.4]])
        sig, target = bgk_first_order_stress(WIDE, ROT, gu)
        np.testing.assert_allclose(sig, target, atol=1e-7)


class TestEigenrelations:
    def test_B_relation_exact(self):
        res = eigen_residuals(build_grid(n=24, span=6.0), ROT)
        assert res["L_F(B)+2B"] < 1e-12

    def test_A_relation_converges(self):
        ns = (16, 24, 32)
        errs = [eigen_residuals(build_grid(n=n, span=6.0), ROT)["L_F(A)+3A"] for n in ns]
        assert convergence_order(ns, errs) > 1.9

    def test_closure_with_negative_half_is_consistent(self):
        shear = np.array([[0.0, 0.4, 0.0], [0.1, 0.0, -0.3], [0.0, 0.0, 0.0]])
        g = build_grid(n=24, span=6.0)
        resF, _ = closure_residuals(g, ROT, b=-0.5, grad_T=(0, 0, 0), grad_u=shear)
        assert resF < 1e-12
        bad, _ = closure_residuals(g, ROT, b=0.5, grad_T=(0, 0, 0), grad_u=shear)
        assert bad > 0.1

    def test_convergence_order_helper(self):
        ns = np.array([10, 20, 40])
        assert convergence_order(ns, 3.0 / ns ** 2) == pytest.approx(2.0)


class TestChapmanEnskogState:
    @pytest.mark.parametrize("model,factor", [("bgk", 1.0), ("fp", 0.5)])
    def test_stress_and_heat_flux(self, model, factor):
        tau, gy, gT = 0.01, 0.2, 0.1
        gu = np.zeros((3, 3))
        gu[1, 0] = gy
        s = chapman_enskog_state(1.0, np.zeros(3), 1.0, gu, [gT, 0, 0], tau, WIDE, ROT, model)
        m = moments(s, WIDE, ROT)
        pred = predict(model, tau, 1.0, 1.0, ROT)
        assert float(m.sigma[0, 0, 1]) == pytest.approx(-pred.mu * gy, rel=1e-6)
        assert float(m.q[0, 0]) == pytest.approx(-pred.kappa * gT, rel=1e-6)
        assert pred.mu == pytest.approx(factor * tau)


class TestExactRiemann:
    def test_sod(self):
        ex = ExactRiemann((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 1.4)
        assert ex.p_star == pytest.approx(0.30313, abs=1e-5)
        assert ex.u_star == pytest.approx(0.92745, abs=1e-5)
        rho, u, p = ex.sample(np.array([0.5, 1.5, 2.0]))
        np.testing.assert_allclose(rho, [0.42632, 0.26557, 0.125], atol=1e-5)

    def test_symmetric_rarefactions(self):
        ex = ExactRiemann((1.0, -2.0, 0.4), (1.0, 2.0, 0.4), 1.4)
        assert ex.p_star == pytest.approx(0.00189, abs=1e-5)
        assert ex.u_star == pytest.approx(0.0, abs=1e-12)
        rho, u, p = ex.sample(np.array([-1.0, 0.0, 1.0]))
        assert u[0] == pytest.approx(-u[2])
        assert rho[0] == pytest.approx(rho[2])

    def test_fan_is_continuous(self):
        ex = ExactRiemann((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 1.4)
        c = np.sqrt(1.4)
        head = -c
        rho, _, _ = ex.sample(np.array([head - 1e-9, head + 1e-9]))
        assert rho[0] == pytest.approx(rho[1], rel=1e-6)

    def test_uniform_state(self):
        ex = ExactRiemann((1.0, 0.3, 1.0), (1.0, 0.3, 1.0))
        assert ex.p_star == pytest.approx(1.0, rel=1e-10)


class TestChannelSetup:
    def test_initial_profiles(self):
        cfg = ChannelConfig(n_cells=10, n_v=12, dT=0.05)
        gas, grid, mesh, tau, pred, state = _channel(cfg, "fourier")
        m = moments(state, grid, gas)
        assert np.all(np.diff(m.T) > 0)
        assert float(np.mean(m.rho)) == pytest.approx(1.0, rel=1e-10)
        assert np.all(m.q[:, 0] < 0)

    def test_window_average_keeps_uniform_state(self):
        cfg = ChannelConfig(n_cells=6, n_v=12, dT=0.0, ce_init=False)
        gas, grid, mesh, tau, pred, state = _channel(cfg, "fourier")
        sol = Solver(gas, grid, mesh, state.copy(), "bgk", tau)
        window_average(sol, 10 * sol.dt, sample_every=2)
        np.testing.assert_allclose(sol.state.F, state.F, atol=1e-6 * state.F.max())
