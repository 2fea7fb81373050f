"""One-dimensional spatial transport of ``(F, G^1..G^n)`` and the split time loop.

Space is the ``x`` axis (index ``-4`` of the state arrays, i.e. the leading
axis); velocity axis 0 is aligned with it.
"""
from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .collide_bgk import TauLaw, bgk_step_exact, tau_law
from .collide_fp import fp_step
from .entropy import H_total
from .errors import ConfigError, KineticError, StepSizeError
from .state import Moments, ReducedState, clip_negative, maxwellian, moments
from .thermo import Gas
from .vgrid import VelocityGrid

log = logging.getLogger(__name__)

BOUNDARY_KINDS = ("periodic", "diffuse-wall", "inflow-outflow")


@dataclass(frozen=True)
class WallSpec:
    """Isothermal diffuse wall moving tangentially with velocity ``u_w``."""

    T_w: float
    u_w: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.T_w > 0:
            raise ValueError("wall temperature must be positive")
        u = tuple(float(x) for x in np.broadcast_to(self.u_w, (3,)))
        if u[0] != 0.0:
            raise ValueError("walls may only move tangentially (u_w[0] must be 0)")
        object.__setattr__(self, "u_w", u)


@dataclass(frozen=True)
class SpatialMesh:
    n_cells: int
    x_min: float
    x_max: float
    boundary: str = "periodic"
    left: WallSpec | None = None
    right: WallSpec | None = None

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.boundary not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "diffuse-wall" and (self.left is None or self.right is None):
            raise ValueError("diffuse-wall boundaries need both wall specs")
        if self.boundary != "periodic" and self.n_cells < 2:
            raise ValueError("wall and inflow boundaries need at least 2 cells")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def x(self):
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx


def _lw_factor(vx, lam, second_order):
    if not second_order:
        return np.zeros_like(vx)
    return 0.5 * (1.0 - np.abs(vx) * lam)


def _minmod(a, b):
    return np.where(a * b > 0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def diffuse_wall_flux(q0, q1, G0, G1, grid: VelocityGrid, gas: Gas, wall: WallSpec,
                      side: str, lam: float, second_order=True):
    """Ghost layers for a diffuse wall.

    ``q0`` is the cell touching the wall and ``q1`` its neighbour (node values
    of ``F``; ``G0``/``G1`` the same for each mode).  Incoming nodes receive the
    wall Maxwellian scaled so the face mass flux vanishes; outgoing nodes get a
    clipped linear extrapolation used only by the limiter.

    Returns ``(F_ghost, G_ghost, rho_w)`` where the ghost arrays have a leading
    axis of length 2 ordered (adjacent, outer).
    """
    vx = grid.axes[0][:, None, None]
    incoming = vx >= 0 if side == "left" else vx <= 0
    k = _lw_factor(grid.axes[0], lam, second_order)[:, None, None]

    def extrap(a0, a1):
        return np.stack([np.maximum(2 * a0 - a1, 0.0), np.maximum(3 * a0 - 2 * a1, 0.0)])

    Fx = extrap(q0, q1)
    slope = _minmod(q0 - Fx[0], q1 - q0)
    # slope is taken towards the wall on both sides, so the face value is q0 - k*slope
    face = q0 - k * slope
    out_flux = np.sum(np.where(incoming, 0.0, vx * face)) * grid.weight
    Mw = maxwellian(1.0, wall.u_w, wall.T_w, grid, gas.R)
    in_unit = np.sum(np.where(incoming, vx * Mw, 0.0)) * grid.weight
    rho_w = -out_flux / in_unit
    Fg = np.where(incoming, rho_w * Mw, Fx)
    Gg = []
    for mod, g0, g1 in zip(gas.modes, G0, G1):
        e_w = float(mod.e_int(wall.T_w))
        Gg.append(np.where(incoming, e_w * Fg, extrap(g0, g1)))
    return Fg, Gg, float(rho_w)


def wall_fluxes(state: ReducedState, mesh: SpatialMesh, grid: VelocityGrid, gas: Gas,
                dt: float, second_order=True):
    """Net face fluxes of mass, momentum and energy into each wall.

    Returned as ``{"left": (mass, mom(3), energy), "right": ...}`` with the sign
    of the flux in ``+x`` direction.
    """
    lam = dt / mesh.dx
    ext = _extend(state, mesh, grid, gas, lam, second_order, None)
    vx = grid.axes[0]
    k = _lw_factor(vx, lam, second_order)[:, None, None]
    out = {}
    N = mesh.n_cells
    v3 = grid.mesh()
    v2 = grid.speed2(np.zeros(3))
    for side, f in (("left", 0), ("right", N)):
        faces = []
        for a in ext:
            qa, qb = a[f + 1], a[f + 2]
            sa = _minmod(qa - a[f], a[f + 2] - qa)
            sb = _minmod(qb - a[f + 1], a[f + 3] - qb)
            pos = vx[:, None, None] >= 0
            faces.append(np.where(pos, qa + k * sa, qb - k * sb) * vx[:, None, None])
        Ff = faces[0]
        w = grid.weight
        mass = np.sum(Ff) * w
        mom = np.array([np.sum(vi * Ff) * w for vi in v3])
        en = np.sum(0.5 * v2 * Ff) * w + sum(np.sum(g) * w for g in faces[1:])
        out[side] = (float(mass), mom, float(en))
    return out


def _extend(state, mesh, grid, gas, lam, second_order, frozen):
    arrays = state.arrays()
    N = mesh.n_cells
    ext = [np.empty((N + 4,) + a.shape[1:]) for a in arrays]
    for e, a in zip(ext, arrays):
        e[2:N + 2] = a
    if mesh.boundary == "periodic":
        for e, a in zip(ext, arrays):
            e[0:2] = a[N - 2:N] if N >= 2 else a[[0, 0]]
            e[N + 2:N + 4] = a[0:2] if N >= 2 else a[[0, 0]]
    elif mesh.boundary == "inflow-outflow":
        lft, rgt = frozen
        for e, gl, gr in zip(ext, lft, rgt):
            e[0:2] = gl
            e[N + 2:N + 4] = gr
    else:
        G = state.G
        Fg, Gg, _ = diffuse_wall_flux(state.F[0], state.F[1], [g[0] for g in G],
                                      [g[1] for g in G], grid, gas, mesh.left, "left",
                                      lam, second_order)
        ext[0][1], ext[0][0] = Fg[0], Fg[1]
        for e, g in zip(ext[1:], Gg):
            e[1], e[0] = g[0], g[1]
        Fg, Gg, _ = diffuse_wall_flux(state.F[N - 1], state.F[N - 2],
                                      [g[N - 1] for g in G], [g[N - 2] for g in G],
                                      grid, gas, mesh.right, "right", lam, second_order)
        ext[0][N + 2], ext[0][N + 3] = Fg[0], Fg[1]
        for e, g in zip(ext[1:], Gg):
            e[N + 2], e[N + 3] = g[0], g[1]
    return ext


def advect(state: ReducedState, mesh: SpatialMesh, grid: VelocityGrid, gas: Gas, dt: float,
           second_order=True, frozen=None) -> ReducedState:
    """One finite-volume step of ``dF/dt + v_x dF/dx = 0`` for ``F`` and each ``G^i``."""
    lam = dt / mesh.dx
    cfl = grid.max_abs_vx * lam
    if cfl > 1.0 + 1e-12:
        raise StepSizeError(f"CFL number {cfl:.4g} exceeds 1")
    ext = _extend(state, mesh, grid, gas, lam, second_order, frozen)
    vx = np.ascontiguousarray(grid.axes[0])
    n0, n1, n2 = grid.shape
    out = []
    for e in ext:
        res = np.empty((mesh.n_cells, n0, n1 * n2))
        _kernels.muscl_update(e.reshape(e.shape[0], n0, n1 * n2), vx, lam,
                              bool(second_order), res)
        out.append(res.reshape((mesh.n_cells,) + grid.shape))
    return ReducedState(out[0], out[1:])


# -- time loop ---------------------------------------------------------------------


class Solver:
    """Split transport/collision integrator for one run.

    With Strang splitting consecutive transport half-steps are fused, so
    ``advance(n)`` performs ``n + 1`` transport sweeps and ``n`` collisions.
    """

    def __init__(self, gas: Gas, grid: VelocityGrid, mesh: SpatialMesh, state: ReducedState,
                 model="bgk", tau: TauLaw | None = None, cfl=0.9, dt_max=np.inf,
                 splitting="strang", second_order=True, energy_fix=True):
        if model not in ("bgk", "fp"):
            raise ValueError(f"unknown collision model {model!r}")
        if splitting not in ("strang", "lie"):
            raise ValueError(f"unknown splitting {splitting!r}")
        if not 0 < cfl <= 1:
            raise ValueError("cfl must be in (0, 1]")
        if state.F.shape != (mesh.n_cells,) + grid.shape:
            raise ValueError("state shape does not match mesh and grid")
        self.gas, self.grid, self.mesh = gas, grid, mesh
        self.state = state
        self.model = model
        self.tau = tau or TauLaw()
        self.cfl = cfl
        self.dt_max = dt_max
        self.splitting = splitting
        self.second_order = second_order
        self.energy_fix = energy_fix
        self.t = 0.0
        self.n_steps = 0
        self.n_clipped = 0
        self.frozen = None
        if mesh.boundary == "inflow-outflow":
            arr = state.arrays()
            self.frozen = ([np.stack([a[0], a[0]]) for a in arr],
                           [np.stack([a[-1], a[-1]]) for a in arr])

    @property
    def dt(self):
        return min(self.cfl * self.mesh.dx / self.grid.max_abs_vx, self.dt_max)

    def moments(self, with_T=True) -> Moments:
        return moments(self.state, self.grid, self.gas, with_T)

    def transport(self, dt):
        self.state = advect(self.state, self.mesh, self.grid, self.gas, dt,
                            self.second_order, self.frozen)

    def collide(self, dt):
        m = self.moments()
        tau = tau_law(m, self.tau)
        if self.model == "bgk":
            self.state = bgk_step_exact(self.state, dt, tau, self.grid, self.gas, m)
        else:
            self.state = fp_step(self.state, dt, tau, self.grid, self.gas, m,
                                 energy_fix=self.energy_fix)
            self.n_clipped += clip_negative(self.state, f"at step {self.n_steps}")

    def advance(self, n=1, dt=None):
        """Advance ``n`` full steps of size ``dt`` (default: CFL-limited)."""
        dt = self.dt if dt is None else dt
        try:
            if self.splitting == "lie":
                for _ in range(n):
                    self.transport(dt)
                    self.collide(dt)
                    self.t += dt
                    self.n_steps += 1
                return
            self.transport(0.5 * dt)
            for i in range(n):
                self.collide(dt)
                self.transport(dt if i < n - 1 else 0.5 * dt)
                self.t += dt
                self.n_steps += 1
        except KineticError as exc:
            raise type(exc)(f"{exc} (step {self.n_steps}, t={self.t:.6g})") from exc

    def advance_to(self, t_end, chunk=1):
        """Advance until ``t_end`` exactly, shortening the last step."""
        while self.t < t_end - 1e-14 * max(1.0, abs(t_end)):
            dt = self.dt
            n = max(1, min(chunk, int((t_end - self.t) / dt)))
            if (t_end - self.t) < dt:
                dt, n = t_end - self.t, 1
            self.advance(n, dt)

    def totals(self):
        """Domain integrals ``(mass, momentum(3), energy)`` times ``dx``."""
        m = self.moments(with_T=False)
        dx = self.mesh.dx
        return (float(np.sum(m.rho) * dx), np.sum(m.rho[:, None] * m.u, axis=0) * dx,
                float(np.sum(m.E) * dx))

    def entropy(self):
        """``(integral of <H> dx, per-cell <H>)``."""
        H, _ = H_total(self.state, self.grid, self.gas)
        return float(np.sum(H) * self.mesh.dx), H


# -- output ------------------------------------------------------------------------


def snapshot_rows(x, m: Moments, H_cell):
    header = (["x", "rho", "u", "T"] + [f"T_int_{i + 1}" for i in range(len(m.T_int_modes))]
              + ["p", "sigma_xx", "sigma_xy", "q_x", "H_total", "u_y", "q_y"])
    rows = []
    for j in range(len(x)):
        rows.append([x[j], m.rho[j], m.u[j, 0], m.T[j]] + [ti[j] for ti in m.T_int_modes]
                    + [m.p[j], m.sigma[j, 0, 0], m.sigma[j, 0, 1], m.q[j, 0], H_cell[j],
                       m.u[j, 1], m.q[j, 1]])
    return header, rows


def write_snapshot(path, x, m: Moments, H_cell):
    header, rows = snapshot_rows(x, m, H_cell)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in rows:
            wr.writerow([repr(float(v)) for v in r])


def save_checkpoint(path, solver: Solver):
    arrays = {"F": solver.state.F, "t": np.array(solver.t), "n_steps": np.array(solver.n_steps)}
    for i, g in enumerate(solver.state.G):
        arrays[f"G{i + 1}"] = g
    np.savez_compressed(path, **arrays)


def load_checkpoint(path):
    with np.load(path) as d:
        G = [d[k] for k in sorted(k for k in d.files if k.startswith("G"))]
        return ReducedState(d["F"].copy(), G), float(d["t"]), int(d["n_steps"])


@dataclass
class RunConfig:
    """Everything :func:`run` needs besides the initial state."""

    gas: Gas
    grid: VelocityGrid
    mesh: SpatialMesh
    model: str = "bgk"
    tau: TauLaw = field(default_factory=TauLaw)
    t_end: float = 1.0
    cfl: float = 0.9
    dt_max: float = np.inf
    splitting: str = "strang"
    second_order: bool = True
    snapshot_times: tuple = ()
    diag_every: int = 0
    output_dir: str | None = None


@dataclass
class RunResult:
    solver: Solver
    snapshots: list
    entropy_log: list
    wall_clock: float


def run(cfg: RunConfig, state: ReducedState) -> RunResult:
    """Integrate to ``cfg.t_end`` writing snapshots, diagnostics and a checkpoint."""
    if cfg.t_end <= 0:
        raise ConfigError("t_end must be positive", "case.t_end")
    solver = Solver(cfg.gas, cfg.grid, cfg.mesh, state, cfg.model, cfg.tau, cfg.cfl,
                    cfg.dt_max, cfg.splitting, cfg.second_order)
    out = Path(cfg.output_dir) if cfg.output_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    stops = sorted(set(float(t) for t in cfg.snapshot_times if 0 < t <= cfg.t_end) | {cfg.t_end})
    snaps, elog = [], []
    H_prev = None
    for k, ts in enumerate(stops):
        while solver.t < ts - 1e-14 * max(1.0, ts):
            chunk = cfg.diag_every if cfg.diag_every else 10 ** 9
            t_goal = min(ts, solver.t + chunk * solver.dt)
            solver.advance_to(t_goal, chunk=chunk)
            if cfg.diag_every:
                H, _ = solver.entropy()
                rec = {"step": solver.n_steps, "time": solver.t, "H_total": H,
                       "dH": (H - H_prev) if H_prev is not None else 0.0}
                elog.append(rec)
                H_prev = H
        if ts in cfg.snapshot_times or ts == cfg.t_end:
            m = solver.moments()
            _, Hc = solver.entropy()
            snaps.append((solver.t, m))
            if out:
                write_snapshot(out / f"snapshot_{k:04d}.csv", cfg.mesh.x, m, Hc)
    if out:
        save_checkpoint(out / "checkpoint.npz", solver)
        if elog:
            with open(out / "entropy.jsonl", "w") as fh:
                for rec in elog:
                    fh.write(json.dumps(rec) + "\n")
    return RunResult(solver, snaps, elog, time.perf_counter() - t0)
