"""Reduced kinetic entropy ``H(F, G^1..G^n)``, its derivatives and diagnostics.

Sign convention: ``H`` decreases under collisions.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, RangeError
from .state import ReducedState, equilibrium_state, moments
from .thermo import EnergyModel, Gas
from .vgrid import VelocityGrid, integrate

F_FLOOR = 1e-300


def _as_lists(G_vals, models):
    if isinstance(models, EnergyModel):
        return [G_vals], [models]
    if isinstance(models, Gas):
        models = models.modes
    return list(G_vals), list(models)


def _check_F(F):
    F = np.asarray(F, dtype=float)
    if np.any(F <= 0):
        raise DomainError("entropy density needs F > 0")
    return F


def H_density(F_val, G_vals, models):
    """``F ln F - sum_i F s_int^i(G^i/F) / R`` at each node."""
    F = _check_F(F_val)
    G_vals, models = _as_lists(G_vals, models)
    H = F * np.log(F)
    for G, m in zip(G_vals, models):
        H = H - F * m.s_int(np.asarray(G) / F) / m.R
    return H


def dH(F_val, G_vals, models):
    """Partial derivatives ``(dH/dF, dH/dG^i)``.

    With a single model the second entry is an array, otherwise a list.
    """
    single = isinstance(models, EnergyModel)
    F = _check_F(F_val)
    G_vals, models = _as_lists(G_vals, models)
    D1 = 1.0 + np.log(F)
    D2 = []
    for G, m in zip(G_vals, models):
        e = np.asarray(G) / F
        T = m.T_int(e)
        D1 = D1 + e / (m.R * T) - m.s_int(e) / m.R
        D2.append(-1.0 / (m.R * T))
    return (D1, D2[0]) if single else (D1, D2)


def hessian(F_val, G_vals, models):
    """Hessian of ``H`` in ``(F, G^1, ..., G^n)``; shape ``(..., n+1, n+1)``."""
    F = _check_F(F_val)
    G_vals, models = _as_lists(G_vals, models)
    n = len(models)
    Hs = np.zeros(F.shape + (n + 1, n + 1))
    Hs[..., 0, 0] = 1.0 / F
    for i, (G, m) in enumerate(zip(G_vals, models), start=1):
        G = np.asarray(G, float)
        T = m.T_int(G / F)
        k = 1.0 / (m.c_v_int(T) * m.R * T * T)
        Hs[..., 0, 0] += G * G * k / F ** 3
        Hs[..., 0, i] = Hs[..., i, 0] = -G * k / F ** 2
        Hs[..., i, i] = k / F
    return Hs


def entropy_nodes(state: ReducedState, gas: Gas):
    """Node values of ``H``; nodes with ``F < 1e-300`` contribute zero."""
    F = state.F
    live = F >= F_FLOOR
    out = np.zeros_like(F)
    if not np.any(live):
        return out
    Fl = F[live]
    Gl = [g[live] for g in state.G]
    try:
        out[live] = H_density(Fl, Gl, gas)
    except (DomainError, RangeError) as exc:
        bad = _first_bad_node(state, gas, live)
        raise type(exc)(f"{exc} at node {bad}") from exc
    return out


def _first_bad_node(state, gas, live):
    idx = np.argwhere(live)
    for k in idx:
        k = tuple(k)
        try:
            H_density(state.F[k], [g[k] for g in state.G], gas)
        except (DomainError, RangeError):
            return tuple(int(i) for i in k)
    return None


def H_total(state: ReducedState, grid: VelocityGrid, gas: Gas):
    """``(<H>_v, <v H>_v)`` per leading index."""
    Hn = entropy_nodes(state, gas)
    tot = integrate(grid, Hn)
    flux = np.stack([integrate(grid, vi * Hn) for vi in grid.mesh()], axis=-1)
    return tot, flux


def equilibrium_entropy(rho, T, gas: Gas):
    """Closed-form ``<H>`` of ``(M, e_int(T) M)`` for the continuous Maxwellian."""
    rho = np.asarray(rho, float)
    T = np.asarray(T, float)
    h = rho * np.log(rho / (2 * np.pi * gas.R * T) ** 1.5) - 1.5 * rho
    for m in gas.modes:
        h = h - rho * m.s_int(m.e_int(T)) / m.R
    return h


def minimization_check(state: ReducedState, grid: VelocityGrid, gas: Gas):
    """``H(state) - H(equilibrium with the same rho, u, e)`` per leading index."""
    m = moments(state, grid, gas)
    eq = equilibrium_state(m.rho, m.u, m.T, grid, gas)
    return H_total(state, grid, gas)[0] - H_total(eq, grid, gas)[0]


def hessian_min_det(state: ReducedState, gas: Gas, rel_floor=1e-12):
    """Smallest Hessian determinant over nodes with non-negligible mass."""
    F = state.F
    live = F > rel_floor * F.max()
    Hs = hessian(F[live], [g[live] for g in state.G], gas)
    return float(np.min(np.linalg.det(Hs)))


@dataclass
class EntropyReport:
    step: int
    time: float
    H_total: float
    H_flux: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    dissipation: float = 0.0
    hessian_min_det: float = float("nan")

    def to_json(self):
        return json.dumps(asdict(self))


def report(state, grid, gas, step=0, time=0.0, previous=None, dt=None, with_hessian=False):
    """Build an :class:`EntropyReport` summed over all leading indices.

    ``dissipation`` is ``(H - H_previous)/dt`` when both are given.
    """
    tot, flux = H_total(state, grid, gas)
    H = float(np.sum(tot))
    rate = 0.0
    if previous is not None and dt:
        rate = (H - previous) / dt
    det = hessian_min_det(state, gas) if with_hessian else float("nan")
    fl = np.sum(flux.reshape(-1, 3), axis=0).tolist()
    return EntropyReport(step, float(time), H, fl, rate, det)


def write_jsonl(path, reports):
    with open(path, "a") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")
