"""Fokker-Planck collisions for ``(F, G^1..G^n)`` in the compact form
``(1/tau) div_v(M grad_v(F/M))`` plus the exchange term ``(2/tau)(e_int F - G)``.

Each velocity axis gets a conservative three-point operator built on the 1D
factors of the projected Maxwellian.  With ``s = v - u`` and face conductances
``C_{k+1/2} = -sum_{j<=k} s_j f_j`` the operator

* has the discrete Maxwellian as its exact null space,
* conserves mass, and momentum whenever ``u`` is the state's own velocity,
* is symmetric in the ``1/M``-weighted inner product, hence dissipative.

Because the projected Maxwellian is separable, the 3D operator is a Kronecker
sum of per-axis matrices and its exponential is the product of per-axis
exponentials.  The discrete energy moment carries an ``O(dv^2)`` defect, which
is returned to the state along a Maxwellian-weighted quadratic direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NumericalError
from .state import (DiscreteMaxwellian, Moments, ReducedState, marginals, moments, project,
                    separable_update)
from .thermo import Gas
from .vgrid import VelocityGrid

_TINY = 1e-300
# below this fraction of a cell's peak F the propagator's round-off dominates
TAIL_REL = 1e-13


def face_conductances(f, s):
    """Interior face conductances ``C_{k+1/2}`` for one axis, shape ``(..., n-1)``.

    Faces left of the bulk velocity use the left partial sum, faces right of it
    the (mathematically equal) right partial sum, so both stay positive.
    """
    sf = s * f
    left = -np.cumsum(sf, axis=-1)[..., :-1]
    right = np.cumsum(sf[..., ::-1], axis=-1)[..., ::-1][..., 1:]
    face_s = 0.5 * (s[..., 1:] + s[..., :-1])
    C = np.where(face_s <= 0, left, right)
    return np.maximum(C, 0.0)


def axis_matrix(f, s, dv):
    """Tridiagonal generator ``L`` of one axis (unit relaxation time)."""
    C = face_conductances(f, s)
    n = f.shape[-1]
    finv = 1.0 / np.maximum(f, _TINY)
    L = np.zeros(f.shape[:-1] + (n, n))
    k = np.arange(n - 1)
    up = C * finv[..., 1:] / dv
    lo = C * finv[..., :-1] / dv
    L[..., k, k + 1] = up
    L[..., k + 1, k] = lo
    diag = np.zeros(f.shape)
    diag[..., :-1] -= lo
    diag[..., 1:] -= up
    L[..., np.arange(n), np.arange(n)] = diag
    return L


def apply_axis(A, y, axis):
    """Apply a per-cell ``(..., n, n)`` matrix along velocity axis 0, 1 or 2."""
    n0, n1, n2 = y.shape[-3:]
    lead = y.shape[:-3]
    if axis == 0:
        return (A @ y.reshape(lead + (n0, n1 * n2))).reshape(y.shape)
    if axis == 1:
        return A[..., None, :, :] @ y
    return y @ np.swapaxes(A, -1, -2)[..., None, :, :]


def _moment_table(f, s, dv, order=4):
    """``sum_k f_k s_k^p dv`` for ``p = 0..order``."""
    return [np.sum(f * s ** p, axis=-1) * dv for p in range(order + 1)]


def _energy_direction(rho, tables):
    """Coefficients ``(a, b, c)`` of ``h = M (a + b.s + c|s|^2)`` with
    ``<h> = 0``, ``<s h> = 0`` and ``<|s|^2 h / 2> = 1``."""
    def mono(p):
        out = rho
        for i in range(3):
            out = out * tables[i][p[i]]
        return out

    # basis psi = (1, s_x, s_y, s_z, |s|^2) as lists of exponent tuples
    e = np.eye(3, dtype=int)
    basis = [[(0, 0, 0)]] + [[tuple(e[i])] for i in range(3)] + [[tuple(2 * e[i]) for i in range(3)]]
    lead = np.shape(rho)
    Gm = np.zeros(lead + (5, 5))
    for a in range(5):
        for b in range(a, 5):
            acc = 0.0
            for pa in basis[a]:
                for pb in basis[b]:
                    acc = acc + mono(tuple(x + y for x, y in zip(pa, pb)))
            Gm[..., a, b] = Gm[..., b, a] = acc
    rhs = np.zeros(lead + (5,))
    rhs[..., 4] = 2.0
    return np.linalg.solve(Gm, rhs[..., None])[..., 0]


@dataclass
class FPOperator:
    """Discrete FP generator of one or many cells at frozen moments.

    Attributes
    ----------
    grid : VelocityGrid
    M : DiscreteMaxwellian
        Projected Maxwellian supplying the face conductances.
    tau : ndarray
        Effective relaxation time per cell.
    L : list of ndarray
        Per-axis generators at unit relaxation time, shape ``(..., n_i, n_i)``.
    """

    grid: VelocityGrid
    M: DiscreteMaxwellian
    tau: np.ndarray
    L: list
    h_coef: np.ndarray
    s: list

    @classmethod
    def build(cls, m: Moments, grid: VelocityGrid, gas: Gas, tau_eff):
        M = project(m, grid, gas.R, full=True)
        return cls.from_maxwellian(M, grid, tau_eff)

    @classmethod
    def from_maxwellian(cls, M: DiscreteMaxwellian, grid: VelocityGrid, tau_eff):
        s = [grid.axes[i] - M.u[..., i:i + 1] for i in range(3)]
        L = [axis_matrix(M.factors[i], s[i], grid.dv[i]) for i in range(3)]
        tables = [_moment_table(M.factors[i], s[i], grid.dv[i]) for i in range(3)]
        h = _energy_direction(M.rho, tables)
        tau = np.broadcast_to(np.asarray(tau_eff, float), np.shape(M.rho))
        return cls(grid, M, tau, L, h, s)

    def apply(self, y):
        """``(1/tau) div_v(M grad_v(y/M))`` of node values ``y``."""
        out = apply_axis(self.L[0], y, 0)
        out = out + apply_axis(self.L[1], y, 1)
        out = out + apply_axis(self.L[2], y, 2)
        return out / self.tau[..., None, None, None]

    def propagators(self, dt):
        """Per-axis ``exp(dt L_i / tau)``."""
        scale = (np.asarray(dt, float) / self.tau)[..., None, None]
        try:
            return [expm(Li * scale) for Li in self.L]
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"matrix exponential failed: {exc}") from exc

    def propagate(self, y, P):
        for i in range(3):
            y = apply_axis(P[i], y, i)
        return y

    def _energy_terms(self, scale):
        # h = M (a + b.s + c|s|^2) as a sum of three separable products
        a, b, c = self.h_coef[..., 0], self.h_coef[..., 1:4], self.h_coef[..., 4]
        f = self.M.factors
        p = [a[..., None] + b[..., 0, None] * self.s[0] + c[..., None] * self.s[0] ** 2,
             b[..., 1, None] * self.s[1] + c[..., None] * self.s[1] ** 2,
             b[..., 2, None] * self.s[2] + c[..., None] * self.s[2] ** 2]
        r = (scale * self.M.rho)[..., None]
        X = [r * p[0] * f[0], r * f[0], r * f[0]]
        Y = [f[1], p[1] * f[1], f[1]]
        Z = [f[2], f[2], p[2] * f[2]]
        return X, Y, Z

    def energy_direction(self):
        """Node values of ``h`` (see module notes)."""
        out = np.zeros(np.shape(self.M.rho) + self.grid.shape)
        return separable_update(out, 1.0, *self._energy_terms(1.0))

    def add_energy(self, F, dE):
        """In place ``F += dE * h``."""
        return separable_update(F, 1.0, *self._energy_terms(np.asarray(dE, float)))

    def energy(self, F, G):
        """Total energy per unit volume ``<|v|^2 F/2> + sum <G>`` per cell."""
        w = self.grid.weight
        xy, xz, _ = marginals(F)
        m1 = [xy.sum(-1), xy.sum(-2), xz.sum(-2)]
        E = sum(0.5 * (m1[i] @ self.grid.axes[i] ** 2) for i in range(3)) * w
        for g in G:
            E = E + np.sum(g, axis=(-3, -2, -1)) * w
        return E


def _col(a):
    return np.asarray(a, float)[..., None, None, None]


def fp_rhs(state: ReducedState, m: Moments, tau_eff, grid: VelocityGrid, gas: Gas,
           op: FPOperator | None = None, energy_fix=True):
    """Time derivative ``(dF, [dG^i])`` of the FP collision operator."""
    if op is None:
        op = FPOperator.build(m, grid, gas, tau_eff)
    it = 1.0 / _col(op.tau)
    dF = op.apply(state.F)
    dG = []
    for g, mod in zip(state.G, gas.modes):
        e = _col(mod.e_int(m.T))
        dG.append(op.apply(g) + 2.0 * it * (e * state.F - g))
    if energy_fix:
        dF = op.add_energy(np.ascontiguousarray(dF), -op.energy(dF, dG))
    return dF, dG


def fp_step(state: ReducedState, dt, tau_eff, grid: VelocityGrid, gas: Gas,
            m: Moments | None = None, energy_fix=True) -> ReducedState:
    """Advance the FP collision operator exactly over ``dt`` at frozen moments.

    The exchange term is integrated together with the diffusion:
    ``G(t) = e_int F(t) + exp(-2t/tau) P_t (G0 - e_int F0)``.
    """
    if np.any(np.asarray(dt) <= 0):
        raise ValueError("dt must be positive")
    if m is None:
        m = moments(state, grid, gas)
    op = FPOperator.build(m, grid, gas, tau_eff)
    P = op.propagators(dt)
    F = op.propagate(state.F, P)
    if not np.all(np.isfinite(F)):
        raise NumericalError("non-finite values in FP step")
    decay = _col(np.exp(-2.0 * np.asarray(dt, float) / op.tau))
    e = [_col(mod.e_int(m.T)) for mod in gas.modes]
    G = [ei * F + decay * op.propagate(g - ei * state.F, P) for g, ei in zip(state.G, e)]
    if energy_fix:
        dE = op.energy(F, G) - op.energy(state.F, state.G)
        F = op.add_energy(np.ascontiguousarray(F), -dE)
    # deep-tail values are propagator round-off: clip F and use the equilibrium ratio G/F
    tail = F < TAIL_REL * F.max(axis=(-3, -2, -1), keepdims=True)
    F[tail] = np.maximum(F[tail], 0.0)
    for g, ei in zip(G, e):
        np.copyto(g, np.broadcast_to(ei, g.shape) * F, where=tail)
    return ReducedState(F, G)


def linear_ops(F1, G1, grid: VelocityGrid):
    """Scaled linearized operators ``(L_F(F1), L_G(F1, G1))``.

    ``grid`` holds the scaled velocity ``V`` (equilibrium at ``u = 0``, ``RT = 1``).
    ``L_F(phi) = (1/M) L(M phi)`` with the discrete generator ``L`` and
    ``L_G(F1, G1) = L_F(G1) + 2 (F1 - G1)``.
    """
    dm = _unit_maxwellian(grid)
    op = FPOperator.from_maxwellian(dm, grid, 1.0)
    M = dm.values()
    LF = op.apply(M * F1) / M
    LG = op.apply(M * G1) / M + 2.0 * (F1 - G1)
    return LF, LG


def _unit_maxwellian(grid):
    from .state import projected_maxwellian
    return projected_maxwellian(np.array(1.0), np.zeros(3), np.array(1.5), grid, full=True)
