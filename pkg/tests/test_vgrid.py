import numpy as np
import pytest

from tpgkin.vgrid import VelocityGrid, appendix_a_suite, build_grid, integrate, maxwellian0


class TestGrid:
    def test_nodes_symmetric_about_center(self):
        g = build_grid(n=17, span=5.0)
        for ax in g.axes:
            np.testing.assert_array_equal(ax, -ax[::-1])
        g = build_grid((0.3, 0.0, -1.0), n=17, span=5.0)
        for ax, c in zip(g.axes, g.centers):
            np.testing.assert_allclose(ax - c, -(ax - c)[::-1], atol=1e-15)

    def test_bounds_and_weight(self):
        g = build_grid(n=(16, 20, 24), span=(4.0, 5.0, 6.0), T_ref=2.0)
        np.testing.assert_allclose(g.v_max, np.array([4.0, 5.0, 6.0]) * np.sqrt(2.0))
        np.testing.assert_allclose(g.v_min, -g.v_max)
        assert g.shape == (16, 20, 24)
        assert g.weight == pytest.approx(np.prod(g.dv))
        assert g.max_abs_vx == pytest.approx(g.v_max[0] - 0.5 * g.dv[0])

    @pytest.mark.parametrize("kw", [{"n": 4}, {"span": 1.0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            build_grid(**kw)

    def test_direct_constructor_validates(self):
        with pytest.raises(ValueError):
            VelocityGrid(np.zeros(3), 16, -1.0)

    def test_speed2_with_cells(self):
        g = build_grid(n=8)
        u = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
        s2 = g.speed2(u)
        assert s2.shape == (2, 8, 8, 8)
        vx = g.axes[0][:, None, None]
        np.testing.assert_allclose(s2[1] - s2[0], (vx - 1.0) ** 2 - vx ** 2 + 0 * s2[0])


class TestQuadrature:
    def test_maxwellian_mass(self):
        g = build_grid(n=32, span=8.0)
        assert integrate(g, maxwellian0(g)) == pytest.approx(1.0, abs=1e-12)

    def test_suite_passes_on_wide_grid(self):
        g = build_grid(n=32, span=8.0)
        for name, _, _, err in appendix_a_suite(g):
            assert err < 1e-6, name

    def test_odd_moments_vanish_exactly(self):
        g = build_grid(n=24, span=6.0)
        rows = {r[0]: r for r in appendix_a_suite(g)}
        assert rows["<Vi M0> = 0"][3] < 1e-15
        assert rows["<|V|^2 Vi M0> = 0 (odd)"][3] < 1e-14

    def test_errors_shrink_with_span(self):
        e6 = {r[0]: r[3] for r in appendix_a_suite(build_grid(n=48, span=6.0))}
        e8 = {r[0]: r[3] for r in appendix_a_suite(build_grid(n=48, span=8.0))}
        assert e8["<|V|^6 M0> = 105"] < e6["<|V|^6 M0> = 105"]

    def test_custom_matrix(self):
        g = build_grid(n=32, span=8.0)
        C = np.diag([1.0, 2.0, 3.0])
        row = appendix_a_suite(g, C)[-1]
        np.testing.assert_allclose(row[2], 2 * C + 6 * np.eye(3))
        assert row[3] < 1e-6
