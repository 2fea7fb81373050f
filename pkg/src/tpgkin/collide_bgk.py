"""BGK relaxation for ``(F, G^1..G^n)`` with an exact exponential update."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import Moments, ReducedState, moments, project
from .thermo import Gas
from .vgrid import VelocityGrid


@dataclass(frozen=True)
class TauLaw:
    """Relaxation time model.

    ``mode="constant"`` gives ``tau = Kn * tau``.  ``mode="power"`` gives
    ``tau = Kn * mu_ref (T/T_ref)**omega / p``.
    """

    mode: str = "constant"
    tau: float = 1.0
    mu_ref: float = 1.0
    T_ref: float = 1.0
    omega: float = 0.0
    Kn: float = 1.0

    def __post_init__(self):
        if self.mode not in ("constant", "power"):
            raise ValueError(f"unknown tau law {self.mode!r}")
        if self.Kn <= 0 or self.tau <= 0 or self.mu_ref <= 0:
            raise ValueError("Kn, tau and mu_ref must be positive")


def tau_law(m: Moments, law: TauLaw):
    """Effective relaxation time per cell."""
    if law.mode == "constant":
        return np.full_like(np.asarray(m.rho, float), law.Kn * law.tau)
    if np.any(m.p <= 0):
        raise ValueError("tau law needs positive pressure")
    return law.Kn * law.mu_ref * (m.T / law.T_ref) ** law.omega / m.p


def _col(a):
    return np.asarray(a, float)[..., None, None, None]


def equilibrium_targets(m: Moments, grid: VelocityGrid, gas: Gas):
    """``M`` and the mode targets ``e_int^i(T) M``."""
    M = project(m, grid, gas.R)
    return M, [_col(mod.e_int(m.T)) * M for mod in gas.modes]


def bgk_rhs(state: ReducedState, m: Moments, tau_eff, grid: VelocityGrid, gas: Gas):
    """``((M - F)/tau, [(e_int^i(T) M - G^i)/tau])``."""
    M, targets = equilibrium_targets(m, grid, gas)
    it = 1.0 / _col(tau_eff)
    return (M - state.F) * it, [(t - g) * it for t, g in zip(targets, state.G)]


def bgk_step_exact(state: ReducedState, dt, tau_eff, grid: VelocityGrid, gas: Gas,
                   m: Moments | None = None) -> ReducedState:
    """Exact solution of the relaxation ODE over ``dt`` at frozen moments."""
    if np.any(np.asarray(dt) <= 0):
        raise ValueError("dt must be positive")
    if m is None:
        m = moments(state, grid, gas)
    M = project(m, grid, gas.R, full=True)
    d = np.broadcast_to(np.exp(-np.asarray(dt, float) / np.asarray(tau_eff, float)),
                        np.shape(m.rho))
    F = M.blend(np.array(state.F, dtype=float, order="C"), d, 1.0 - d)
    G = [M.blend(np.array(g, dtype=float, order="C"), d, (1.0 - d) * mod.e_int(m.T))
         for g, mod in zip(state.G, gas.modes)]
    return ReducedState(F, G)
