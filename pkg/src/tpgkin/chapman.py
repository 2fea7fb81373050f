"""Chapman-Enskog predictions and the numerical experiments that check them.

* closed-form transport coefficients of both collision models,
* the first-order fields ``A, B, A~, B~`` in the scaled velocity ``V``,
* an exact Riemann solver for the Euler limit,
* steady channel runs (Couette, Fourier) that extract ``mu`` and ``kappa``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .collide_bgk import TauLaw
from .collide_fp import linear_ops
from .errors import ConvergenceError
from .state import ReducedState, equilibrium_state
from .thermo import Gas
from .transport import SpatialMesh, Solver, WallSpec
from .vgrid import VelocityGrid, build_grid, integrate, maxwellian0

log = logging.getLogger(__name__)


# -- closed-form coefficients ------------------------------------------------------


@dataclass(frozen=True)
class TransportPrediction:
    model: str
    mu: float
    kappa: float
    alpha: float
    Pr: float


def predict(model: str, tau, p, T, gas: Gas) -> TransportPrediction:
    """Navier-Stokes coefficients of the BGK or FP model at ``(tau, p, T)``.

    BGK: ``mu = tau p``, ``kappa = mu c_p``.  FP: ``mu = tau p / 2``,
    ``kappa = 2/3 mu c_p``.  Both: ``alpha = c_p/c_v - 1``.
    """
    if p <= 0:
        raise ValueError("pressure must be positive")
    c_v = float(gas.c_v(T))
    c_p = c_v + gas.R
    if model == "bgk":
        mu = tau * p
        kappa = mu * c_p
    elif model == "fp":
        mu = 0.5 * tau * p
        kappa = 2.0 / 3.0 * mu * c_p
    else:
        raise ValueError(f"unknown model {model!r}")
    return TransportPrediction(model, float(mu), float(kappa), c_p / c_v - 1.0,
                               float(mu * c_p / kappa))


# -- first-order fields --------------------------------------------------------------


@dataclass
class ABFields:
    V: list
    A: np.ndarray
    B: np.ndarray
    At: np.ndarray
    Bt: np.ndarray


def ab_fields(grid: VelocityGrid, u, T, gas: Gas) -> ABFields:
    """``A, B, A~, B~`` at every node, with nodes read as ``v``.

    ``V = (v - u)/sqrt(R T)``; vector fields have shape ``(3, n0, n1, n2)``,
    tensors ``(3, 3, n0, n1, n2)``.  For a monatomic gas ``T e_int'/e_int`` is
    taken as 0 (``A~ = A``).
    """
    u = np.asarray(u, float)
    Ts = float(T)
    sq = np.sqrt(gas.R * Ts)
    V = [np.broadcast_to((vi - u[i]) / sq, grid.shape) for i, vi in enumerate(grid.mesh())]
    V2 = V[0] ** 2 + V[1] ** 2 + V[2] ** 2
    # nondimensional heat capacities
    c_v = float(gas.c_v(Ts)) / gas.R
    de = c_v - 1.5
    e_int = float(gas.e_int(Ts)) / (gas.R * Ts) if gas.modes else 0.0
    ratio = de / e_int if e_int > 0 else 0.0
    A = np.stack([(0.5 * V2 - 2.5) * Vi for Vi in V])
    At = np.stack([(0.5 * V2 - 2.5 + ratio) * Vi for Vi in V])
    iso = 0.5 * V2 / c_v + de / c_v
    B = np.empty((3, 3) + grid.shape)
    for i in range(3):
        for j in range(3):
            B[i, j] = V[i] * V[j] - (iso if i == j else 0.0)
    Bt = B - (ratio / c_v) * np.eye(3)[:, :, None, None, None]
    return ABFields(V, A, B, At, Bt)


def eigen_residuals(grid: VelocityGrid, gas: Gas, T=1.0, comps=((0,), (0, 1))):
    """Weighted L1 norms ``<M0 |.|>`` of the four eigenrelation residuals.

    ``grid`` must be in scaled units (``u = 0``, ``RT = 1``).
    """
    f = ab_fields(grid, np.zeros(3), T, gas)
    M0 = maxwellian0(grid)
    (i,), (k, l) = comps

    def norm(x):
        return float(integrate(grid, M0 * np.abs(x)))

    LA, LGA = linear_ops(f.A[i], f.At[i], grid)
    LB, LGB = linear_ops(f.B[k, l], f.Bt[k, l], grid)
    return {
        "L_F(A)+3A": norm(LA + 3 * f.A[i]),
        "L_F(B)+2B": norm(LB + 2 * f.B[k, l]),
        "L_G(A,A~)+3A~": norm(LGA + 3 * f.At[i]),
        "L_G(B,B~)+2B~": norm(LGB + 2 * f.Bt[k, l]),
    }


def closure_residuals(grid: VelocityGrid, gas: Gas, a=-1.0 / 3.0, b=0.5, grad_T=(0.3, -0.2, 0.1),
                      grad_u=None, T=1.0):
    """Residuals of ``L_F(F1) = A.gT + B:gu`` and ``L_G(F1, G1) = A~.gT + B~:gu``.

    ``F1 = a A.gT + b B:gu`` and ``G1 = a A~.gT + b B~:gu`` (scaled, ``tau = 1``).
    Returns the ``M0``-weighted L1 norms of both residuals.
    """
    if grad_u is None:
        grad_u = np.array([[0.0, 0.4, 0.0], [0.1, 0.2, -0.3], [0.0, 0.0, -0.1]])
    gT = np.asarray(grad_T, float)
    gu = np.asarray(grad_u, float)
    f = ab_fields(grid, np.zeros(3), T, gas)
    # B:grad u = B_kl d_l u_k
    AgT = np.tensordot(gT, f.A, axes=(0, 0))
    AtgT = np.tensordot(gT, f.At, axes=(0, 0))
    Bgu = np.tensordot(gu.T, f.B, axes=([0, 1], [0, 1]))
    Btgu = np.tensordot(gu.T, f.Bt, axes=([0, 1], [0, 1]))
    F1 = a * AgT + b * Bgu
    G1 = a * AtgT + b * Btgu
    LF, LG = linear_ops(F1, G1, grid)
    M0 = maxwellian0(grid)
    return (float(integrate(grid, M0 * np.abs(LF - AgT - Bgu))),
            float(integrate(grid, M0 * np.abs(LG - AtgT - Btgu))))


def convergence_order(ns, errors):
    """Least-squares slope of ``log(error)`` against ``log(dv)``, ``dv ~ 1/n``."""
    x = -np.log(np.asarray(ns, float))
    y = np.log(np.asarray(errors, float))
    return float(np.polyfit(x, y, 1)[0])


def bgk_first_order_stress(grid: VelocityGrid, gas: Gas, grad_u, rho=1.0, T=1.0, tau=1.0):
    """Stress of the first-order BGK correction for a uniform velocity gradient.

    ``F1 = -tau (rho / T^{3/2}) M0(V) B:grad u`` integrated numerically,
    against ``-mu (grad u + grad u^T - alpha div u I)`` with ``mu = tau p``.
    """
    gu = np.asarray(grad_u, float)
    f = ab_fields(grid, np.zeros(3), T, gas)
    M0 = maxwellian0(grid)
    RT = gas.R * T
    F1 = -tau * rho / RT ** 1.5 * M0 * np.tensordot(gu.T, f.B, axes=([0, 1], [0, 1]))
    v = grid.mesh()
    sig = np.array([[float(integrate(grid, v[i] * v[j] * F1)) for j in range(3)]
                    for i in range(3)])
    p = rho * RT
    pr = predict("bgk", tau, p, T, gas)
    target = -pr.mu * (gu.T + gu - pr.alpha * np.trace(gu) * np.eye(3))
    return sig, target


# -- exact Riemann solver ------------------------------------------------------------


@dataclass(frozen=True)
class ExactRiemann:
    """Exact solution of the 1D Euler Riemann problem for a polytropic gas.

    States are ``(rho, u, p)``.  The star pressure is found by bisection on the
    pressure function.
    """

    left: tuple
    right: tuple
    gamma: float = 1.4

    def _f(self, p, rho, pk):
        g = self.gamma
        c = np.sqrt(g * pk / rho)
        if p > pk:
            A = 2.0 / ((g + 1.0) * rho)
            B = (g - 1.0) / (g + 1.0) * pk
            return (p - pk) * np.sqrt(A / (p + B))
        return 2.0 * c / (g - 1.0) * ((p / pk) ** ((g - 1.0) / (2.0 * g)) - 1.0)

    def _phi(self, p):
        rl, ul, pl = self.left
        rr, ur, pr = self.right
        return self._f(p, rl, pl) + self._f(p, rr, pr) + (ur - ul)

    @property
    def p_star(self):
        lo, hi = 1e-12, 1.0
        while self._phi(hi) < 0:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._phi(mid) > 0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * hi:
                break
        return 0.5 * (lo + hi)

    @property
    def u_star(self):
        ps = self.p_star
        rl, ul, pl = self.left
        rr, ur, pr = self.right
        return 0.5 * (ul + ur) + 0.5 * (self._f(ps, rr, pr) - self._f(ps, rl, pl))

    def sample(self, xi):
        """``(rho, u, p)`` at similarity coordinates ``xi = x / t``."""
        xi = np.atleast_1d(np.asarray(xi, float))
        ps, us = self.p_star, self.u_star
        out = np.empty((3, xi.size))
        for k, s in enumerate(xi):
            if s <= us:
                out[:, k] = self._side(s, ps, us, self.left, +1)
            else:
                out[:, k] = self._side(s, ps, us, self.right, -1)
        return out

    def _side(self, s, ps, us, st, sgn):
        # sgn = +1 for the left wave family, -1 for the right one
        g = self.gamma
        rho, u, p = st
        c = np.sqrt(g * p / rho)
        if ps > p:  # shock
            r_star = rho * ((ps / p + (g - 1) / (g + 1)) / ((g - 1) / (g + 1) * ps / p + 1))
            S = u - sgn * c * np.sqrt((g + 1) / (2 * g) * ps / p + (g - 1) / (2 * g))
            if sgn * (s - S) <= 0:
                return rho, u, p
            return r_star, us, ps
        r_star = rho * (ps / p) ** (1 / g)
        c_star = c * (ps / p) ** ((g - 1) / (2 * g))
        head = u - sgn * c
        tail = us - sgn * c_star
        if sgn * (s - head) <= 0:
            return rho, u, p
        if sgn * (s - tail) >= 0:
            return r_star, us, ps
        # inside the rarefaction fan
        cf = 2 / (g + 1) * (c + sgn * (g - 1) / 2 * (u - s))
        uf = 2 / (g + 1) * (sgn * c + (g - 1) / 2 * u + s)
        rf = rho * (cf / c) ** (2 / (g - 1))
        pf = p * (cf / c) ** (2 * g / (g - 1))
        return rf, uf, pf


# -- steady channel experiments ------------------------------------------------------


@dataclass
class ChannelConfig:
    model: str = "bgk"
    kn: float = 0.005
    n_cells: int = 100
    n_v: int = 32
    span: float = 6.0
    gas: Gas | None = None
    U: float = 0.1            # wall velocity difference (Couette)
    dT: float = 0.05          # wall temperature difference (Fourier)
    T_w: float = 1.0
    cfl: float = 0.9
    window: int = 100
    threshold: float = 1e-6
    core: float = 0.6
    max_steps: int = 200000
    min_steps: int = 200
    slip: float | None = None
    jump: float | None = None
    second_order: bool = True
    ce_init: bool = True
    averaging_passes: int | None = None   # default: 1 for Fourier, 0 for Couette
    averaging_periods: float = 2.0
    sample_every: int = 10


@dataclass
class ChannelResult:
    case: str
    model: str
    kn: float
    measured: float
    predicted: float
    flux: float
    gradient: float
    steps: int
    time: float
    steady: bool
    wall_clock: float
    history: list = field(default_factory=list)
    profile: dict = field(default_factory=dict)

    @property
    def ratio(self):
        return self.measured / self.predicted


def chapman_enskog_state(rho, u, T, grad_u, grad_T, tau_eff, grid: VelocityGrid, gas: Gas,
                         model="bgk") -> ReducedState:
    """Equilibrium state plus the first-order correction of the chosen model.

    ``F = M (1 + phi)`` and ``G = e_int M (1 + phi~)`` with
    ``phi = c_A A.grad T sqrt(R/T) + c_B B:grad u`` (``A, B`` at each cell) and
    ``(c_A, c_B) = -tau (1, 1)`` for BGK, ``tau (-1/3, -1/2)`` for FP.
    """
    rho = np.atleast_1d(np.asarray(rho, float))
    T = np.atleast_1d(np.asarray(T, float))
    u = np.broadcast_to(np.asarray(u, float), rho.shape + (3,))
    gu = np.broadcast_to(np.asarray(grad_u, float), rho.shape + (3, 3))
    gT = np.broadcast_to(np.asarray(grad_T, float), rho.shape + (3,))
    tau = np.broadcast_to(np.asarray(tau_eff, float), rho.shape)
    eq = equilibrium_state(rho, u, T, grid, gas)
    cA, cB = (-1.0, -1.0) if model == "bgk" else (-1.0 / 3.0, -0.5)
    F = eq.F.copy()
    G = [g.copy() for g in eq.G]
    for j in range(rho.size):
        f = ab_fields(grid, u[j], T[j], gas)
        s = np.sqrt(gas.R / T[j])
        phi = tau[j] * (cA * s * np.tensordot(gT[j], f.A, axes=(0, 0))
                        + cB * np.tensordot(gu[j].T, f.B, axes=([0, 1], [0, 1])))
        phit = tau[j] * (cA * s * np.tensordot(gT[j], f.At, axes=(0, 0))
                         + cB * np.tensordot(gu[j].T, f.Bt, axes=([0, 1], [0, 1])))
        F[j] *= 1.0 + phi
        for g in G:
            g[j] *= 1.0 + phit
    np.maximum(F, 0.0, out=F)
    for g in G:
        np.maximum(g, 0.0, out=g)
    return ReducedState(F, G)


def _core(x, frac):
    half = 0.5 * frac * (x[-1] - x[0] + (x[1] - x[0]))
    mid = 0.5 * (x[0] + x[-1])
    return np.abs(x - mid) <= half + 1e-12


def default_slip(model, kn):
    """Velocity-slip length used to shape the initial Couette profile."""
    return 1.15 * kn if model == "bgk" else 1.0 * kn


def default_jump(model, kn):
    """Temperature-jump length used to shape the initial Fourier profile.

    Effective lengths of the discrete scheme at ``Kn < dx`` (the FP one is
    negative); a mismatch leaves a slow odd thermal mode after start-up.
    """
    return 1.45 * kn if model == "bgk" else -0.55 * kn


def _channel(cfg: ChannelConfig, case: str):
    from .thermo import default_gas
    gas = cfg.gas or default_gas("rotational-linear")
    R = gas.R
    grid = build_grid(T_ref=cfg.T_w, R=R, n=cfg.n_v, span=cfg.span)
    tau = TauLaw("constant", tau=1.0, Kn=cfg.kn)
    pred = predict(cfg.model, cfg.kn, 1.0 * R * cfg.T_w, cfg.T_w, gas)
    if case == "couette":
        ls = cfg.slip if cfg.slip is not None else default_slip(cfg.model, cfg.kn)
    else:
        ls = cfg.jump if cfg.jump is not None else default_jump(cfg.model, cfg.kn)
    if case == "couette":
        lw = WallSpec(cfg.T_w, (0.0, -0.5 * cfg.U, 0.0))
        rw = WallSpec(cfg.T_w, (0.0, 0.5 * cfg.U, 0.0))
    else:
        lw = WallSpec(cfg.T_w - 0.5 * cfg.dT)
        rw = WallSpec(cfg.T_w + 0.5 * cfg.dT)
    mesh = SpatialMesh(cfg.n_cells, -0.5, 0.5, "diffuse-wall", lw, rw)
    x = mesh.x
    shrink = 1.0 / (1.0 + 2.0 * ls)
    u = np.zeros((cfg.n_cells, 3))
    if case == "couette":
        g = cfg.U * shrink
        u[:, 1] = g * x
        # viscous heating: kappa T'' = -mu g^2
        T = cfg.T_w + pred.mu * g * g / (2 * pred.kappa) * (0.25 + ls - x * x)
    else:
        T = cfg.T_w + cfg.dT * shrink * x
    rho = 1.0 / T
    rho = rho / rho.mean()
    if cfg.ce_init:
        gu = np.zeros((cfg.n_cells, 3, 3))
        gT = np.zeros((cfg.n_cells, 3))
        gu[:, 1, 0] = np.gradient(u[:, 1], x)
        gT[:, 0] = np.gradient(T, x)
        state = chapman_enskog_state(rho, u, T, gu, gT, cfg.kn * tau.tau, grid, gas, cfg.model)
    else:
        state = equilibrium_state(rho, u, T, grid, gas)
    return gas, grid, mesh, tau, pred, state


def window_average(solver: Solver, duration, sample_every=10):
    """Replace the solver state by its Hann-weighted time average over ``duration``.

    Oscillating (acoustic) components with periods dividing ``duration / 2``
    cancel, while any steady state is left unchanged.  Used only to prepare
    the initial data of steady runs.
    """
    dt = solver.dt
    n = max(4, int(round(duration / (dt * sample_every))))
    acc = [np.zeros_like(a) for a in solver.state.arrays()]
    wsum = 0.0
    for k in range(1, n):
        solver.advance(sample_every)
        w = np.sin(np.pi * k / n) ** 2
        for a, x in zip(acc, solver.state.arrays()):
            a += w * x
        wsum += w
    solver.state = ReducedState(acc[0] / wsum, [g / wsum for g in acc[1:]])
    return solver


def run_channel(cfg: ChannelConfig, case: str, callback=None) -> ChannelResult:
    """Run Couette or Fourier flow to steady state and fit the NS coefficient.

    Steadiness: the core-averaged flux (``sigma_xy`` or ``q_x``) changes by less
    than ``threshold`` (relative) over ``window`` steps.
    """
    if case not in ("couette", "fourier"):
        raise ValueError(f"unknown channel case {case!r}")
    gas, grid, mesh, tau, pred, state = _channel(cfg, case)
    solver = Solver(gas, grid, mesh, state, cfg.model, tau, cfg.cfl,
                    second_order=cfg.second_order)
    core = _core(mesh.x, cfg.core)
    t0 = time.perf_counter()
    passes = cfg.averaging_passes
    if passes is None:
        passes = 1 if case == "fourier" else 0
    if passes:
        c_s = np.sqrt(float(gas.gamma(cfg.T_w)) * gas.R * cfg.T_w)
        period = 2.0 * (mesh.x_max - mesh.x_min) / c_s
        for _ in range(passes):
            window_average(solver, cfg.averaging_periods * period, cfg.sample_every)
    prev = None
    history = []
    steady = False

    def measure():
        m = solver.moments()
        if case == "couette":
            flux = float(np.mean(m.sigma[core, 0, 1]))
            grad = float(np.polyfit(mesh.x[core], m.u[core, 1], 1)[0])
        else:
            flux = float(np.mean(m.q[core, 0]))
            grad = float(np.polyfit(mesh.x[core], m.T[core], 1)[0])
        return m, flux, grad

    while solver.n_steps < cfg.max_steps:
        solver.advance(cfg.window)
        m, flux, grad = measure()
        history.append((solver.n_steps, solver.t, flux, grad))
        if callback:
            callback(solver, flux, grad)
        if prev is not None and solver.n_steps >= cfg.min_steps:
            change = abs(flux - prev) / abs(flux)
            if change < cfg.threshold:
                steady = True
                break
        prev = flux
    if case == "couette":
        measured = -flux / grad
        predicted = pred.mu
    else:
        measured = -flux / grad
        predicted = pred.kappa
    prof = {"x": mesh.x.tolist(), "rho": m.rho.tolist(), "u_y": m.u[:, 1].tolist(),
            "T": m.T.tolist(), "sigma_xy": m.sigma[:, 0, 1].tolist(), "q_x": m.q[:, 0].tolist()}
    res = ChannelResult(case, cfg.model, cfg.kn, float(measured), float(predicted), flux, grad,
                        solver.n_steps, solver.t, steady, time.perf_counter() - t0, history,
                        prof)
    if not steady:
        log.warning("%s/%s not steady after %d steps", case, cfg.model, solver.n_steps)
    return res


def couette_viscosity(cfg: ChannelConfig, require_steady=True, **kw) -> ChannelResult:
    """Effective viscosity ``-sigma_xy / (du_y/dx)`` from a steady Couette run."""
    res = run_channel(cfg, "couette", **kw)
    if require_steady and not res.steady:
        raise ConvergenceError(f"Couette run not steady after {res.steps} steps")
    return res


def fourier_conductivity(cfg: ChannelConfig, mu_eff=None, require_steady=True, **kw):
    """Effective conductivity ``-q_x / (dT/dx)`` and, given ``mu_eff``, ``Pr_eff``."""
    res = run_channel(cfg, "fourier", **kw)
    if require_steady and not res.steady:
        raise ConvergenceError(f"Fourier run not steady after {res.steps} steps")
    Pr = None
    if mu_eff is not None:
        from .thermo import default_gas
        gas = cfg.gas or default_gas("rotational-linear")
        Pr = float(mu_eff * gas.c_p(cfg.T_w) / res.measured)
    return res, Pr
