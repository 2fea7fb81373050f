import csv

import numpy as np
import pytest

from tpgkin.collide_bgk import TauLaw
from tpgkin.errors import StepSizeError
from tpgkin.state import ReducedState, equilibrium_state
from tpgkin.thermo import default_gas
from tpgkin.transport import (RunConfig, Solver, SpatialMesh, WallSpec, advect, load_checkpoint,
                              run, save_checkpoint, wall_fluxes)
from tpgkin.vgrid import build_grid

GRID = build_grid(n=12, span=5.0)
GAS = default_gas("rotational-linear")


def wave_state(n_cells, amp=0.1, grid=GRID):
    mesh = SpatialMesh(n_cells, 0.0, 1.0, "periodic")
    rho = 1.0 + amp * np.sin(2 * np.pi * mesh.x)
    T = 1.0 + 0.5 * amp * np.cos(2 * np.pi * mesh.x)
    u = np.zeros((n_cells, 3))
    u[:, 0] = 0.1
    return mesh, equilibrium_state(rho, u, T, grid, GAS)


def totals(state, mesh):
    v = GRID.mesh()
    w = GRID.weight * mesh.dx
    F = state.F
    out = [F.sum() * w] + [(vi * F).sum() * w for vi in v]
    out.append((0.5 * GRID.speed2() * F).sum() * w + sum(g.sum() * w for g in state.G))
    return np.array(out)


class TestGeometry:
    def test_mesh(self):
        m = SpatialMesh(4, -1.0, 1.0, "periodic")
        assert m.dx == pytest.approx(0.5)
        np.testing.assert_allclose(m.x, [-0.75, -0.25, 0.25, 0.75])

    @pytest.mark.parametrize("kw", [dict(n_cells=0), dict(x_max=-2.0), dict(boundary="slip"),
                                    dict(boundary="diffuse-wall")])
    def test_mesh_invalid(self, kw):
        base = dict(n_cells=4, x_min=-1.0, x_max=1.0, boundary="periodic")
        base.update(kw)
        with pytest.raises(ValueError):
            SpatialMesh(**base)

    @pytest.mark.parametrize("kw", [dict(T_w=0.0), dict(u_w=(0.1, 0.0, 0.0))])
    def test_wall_invalid(self, kw):
        with pytest.raises(ValueError):
            WallSpec(**{"T_w": 1.0, **kw})


class TestAdvection:
    @pytest.mark.parametrize("second_order", [False, True])
    def test_periodic_conservation(self, second_order):
        mesh, s = wave_state(20)
        ref = totals(s, mesh)
        dt = 0.9 * mesh.dx / GRID.max_abs_vx
        for _ in range(10):
            s = advect(s, mesh, GRID, GAS, dt, second_order)
        np.testing.assert_allclose(totals(s, mesh), ref, rtol=1e-13, atol=1e-14)

    def test_uniform_state_is_preserved(self):
        mesh = SpatialMesh(8, 0.0, 1.0, "periodic")
        s = equilibrium_state(np.ones(8), np.zeros((8, 3)), np.ones(8), GRID, GAS)
        out = advect(s, mesh, GRID, GAS, 0.5 * mesh.dx / GRID.max_abs_vx)
        np.testing.assert_allclose(out.F, s.F, rtol=1e-14)

    def test_unit_cfl_is_exact_shift(self):
        mesh, s = wave_state(16)
        dt = mesh.dx / GRID.max_abs_vx
        out = advect(s, mesh, GRID, GAS, dt)
        np.testing.assert_allclose(out.F[:, -1], np.roll(s.F[:, -1], 1, axis=0), rtol=1e-13)
        np.testing.assert_allclose(out.F[:, 0], np.roll(s.F[:, 0], -1, axis=0), rtol=1e-13)

    def test_cfl_violation(self):
        mesh, s = wave_state(8)
        with pytest.raises(StepSizeError):
            advect(s, mesh, GRID, GAS, 1.5 * mesh.dx / GRID.max_abs_vx)

    @pytest.mark.parametrize("second_order,order", [(False, 0.9), (True, 1.6)])
    def test_convergence_order(self, second_order, order):
        errs = []
        for n in (32, 64, 128):
            mesh, s = wave_state(n)
            exact_shift = 0.25
            nsteps = int(np.ceil(exact_shift / (0.8 * mesh.dx / GRID.max_abs_vx)))
            dt = exact_shift / nsteps
            F0 = s.F.copy()
            for _ in range(nsteps):
                s = advect(s, mesh, GRID, GAS, dt, second_order)
            # exact free streaming in Fourier space per velocity node
            k = np.fft.fftfreq(n, d=mesh.dx) * 2 * np.pi
            vx = GRID.axes[0]
            ph = np.exp(-1j * k[:, None] * vx[None, :] * exact_shift)
            ex = np.fft.ifft(np.fft.fft(F0, axis=0) * ph[:, :, None, None], axis=0).real
            errs.append(np.abs(s.F - ex).sum() * mesh.dx)
        rate = np.log2(errs[-2] / errs[-1])
        assert rate > order


class TestWalls:
    def closed_box(self, T_left=1.0, T_right=1.0, n=10):
        mesh = SpatialMesh(n, 0.0, 1.0, "diffuse-wall", WallSpec(T_left), WallSpec(T_right))
        rho = 1.0 + 0.1 * np.cos(np.pi * mesh.x)
        s = equilibrium_state(rho, np.zeros((n, 3)), np.ones(n), GRID, GAS)
        return mesh, s

    def test_zero_wall_mass_flux(self):
        mesh, s = self.closed_box(0.9, 1.1)
        fl = wall_fluxes(s, mesh, GRID, GAS, 0.5 * mesh.dx / GRID.max_abs_vx)
        assert abs(fl["left"][0]) < 1e-14
        assert abs(fl["right"][0]) < 1e-14

    def test_mass_conserved_in_closed_box(self):
        mesh, s = self.closed_box(0.8, 1.2)
        m0 = totals(s, mesh)[0]
        dt = 0.9 * mesh.dx / GRID.max_abs_vx
        for _ in range(30):
            s = advect(s, mesh, GRID, GAS, dt)
        assert totals(s, mesh)[0] == pytest.approx(m0, rel=1e-13)

    def test_hot_wall_heats_gas(self):
        mesh, s = self.closed_box(1.5, 1.5)
        e0 = totals(s, mesh)[4]
        sol = Solver(GAS, GRID, mesh, s, "bgk", TauLaw(Kn=0.05))
        sol.advance(20)
        assert sol.totals()[2] > e0


class TestSolver:
    def test_advance_to_hits_end_time(self):
        mesh, s = wave_state(10)
        sol = Solver(GAS, GRID, mesh, s, "bgk", TauLaw(Kn=0.1))
        sol.advance_to(0.123, chunk=5)
        assert sol.t == pytest.approx(0.123, abs=1e-14)

    @pytest.mark.parametrize("model", ["bgk", "fp"])
    @pytest.mark.parametrize("splitting", ["strang", "lie"])
    def test_periodic_invariants(self, model, splitting):
        mesh, s = wave_state(10)
        sol = Solver(GAS, GRID, mesh, s, model, TauLaw(Kn=0.05), splitting=splitting)
        m0, p0, E0 = sol.totals()
        sol.advance(10)
        m1, p1, E1 = sol.totals()
        assert m1 == pytest.approx(m0, rel=1e-12)
        np.testing.assert_allclose(p1, p0, atol=1e-12)
        assert E1 == pytest.approx(E0, rel=1e-12)

    def test_entropy_decreases_first_order(self):
        mesh, s = wave_state(12, amp=0.3)
        sol = Solver(GAS, GRID, mesh, s, "bgk", TauLaw(Kn=0.02), second_order=False)
        H = [sol.entropy()[0]]
        for _ in range(10):
            sol.advance(1)
            H.append(sol.entropy()[0])
        assert np.all(np.diff(H) <= 1e-12)

    def test_inflow_outflow_uniform(self):
        mesh = SpatialMesh(8, 0.0, 1.0, "inflow-outflow")
        u = np.zeros((8, 3))
        u[:, 0] = 0.3
        s = equilibrium_state(np.ones(8), u, np.ones(8), GRID, GAS)
        sol = Solver(GAS, GRID, mesh, s.copy(), "bgk", TauLaw(Kn=0.1))
        sol.advance(5)
        np.testing.assert_allclose(sol.state.F, s.F, rtol=1e-12)

    def test_invalid_arguments(self):
        mesh, s = wave_state(4)
        with pytest.raises(ValueError):
            Solver(GAS, GRID, mesh, s, "dsmc")
        with pytest.raises(ValueError):
            Solver(GAS, GRID, mesh, s, cfl=1.5)
        with pytest.raises(ValueError):
            Solver(GAS, GRID, SpatialMesh(5, 0, 1, "periodic"), s)


class TestOutput:
    def test_run_writes_files(self, tmp_path):
        mesh, s = wave_state(6)
        cfg = RunConfig(GAS, GRID, mesh, "bgk", TauLaw(Kn=0.1), t_end=0.05,
                        snapshot_times=(0.02, 0.05), diag_every=2, output_dir=str(tmp_path))
        res = run(cfg, s)
        assert [round(t, 12) for t, _ in res.snapshots] == [0.02, 0.05]
        files = sorted(p.name for p in tmp_path.iterdir())
        assert files == ["checkpoint.npz", "entropy.jsonl", "snapshot_0000.csv",
                         "snapshot_0001.csv"]
        with open(tmp_path / "snapshot_0001.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:4] == ["x", "rho", "u", "T"]
        assert "q_x" in rows[0] and "H_total" in rows[0]
        assert len(rows) == 7

    def test_runs_are_bit_identical(self, tmp_path):
        out = []
        for d in ("a", "b"):
            mesh, s = wave_state(6)
            cfg = RunConfig(GAS, GRID, mesh, "fp", TauLaw(Kn=0.1), t_end=0.03,
                            output_dir=str(tmp_path / d))
            run(cfg, s)
            out.append((tmp_path / d / "snapshot_0000.csv").read_bytes())
        assert out[0] == out[1]

    def test_checkpoint_round_trip(self, tmp_path):
        mesh, s = wave_state(4)
        sol = Solver(GAS, GRID, mesh, s, "bgk", TauLaw(Kn=0.1))
        sol.advance(2)
        save_checkpoint(tmp_path / "c.npz", sol)
        st, t, n = load_checkpoint(tmp_path / "c.npz")
        assert n == 2 and t == pytest.approx(sol.t)
        np.testing.assert_array_equal(st.F, sol.state.F)
        np.testing.assert_array_equal(st.G[0], sol.state.G[0])
