"""Reduced distributions ``(F, G^1..G^n)``, their moments, and equilibria.

``F`` carries mass and translational energy, each ``G^i`` the density of one
group of internal modes.  Arrays have the velocity axes last; any leading axes
(typically one spatial axis) are treated as independent cells.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateStateError, ProjectionError
from .thermo import Gas
from .vgrid import VelocityGrid

log = logging.getLogger(__name__)


@dataclass
class ReducedState:
    F: np.ndarray
    G: list = field(default_factory=list)

    def __post_init__(self):
        self.G = list(self.G)
        for g in self.G:
            if g.shape != self.F.shape:
                raise ValueError("every G array must share F's shape")

    @property
    def n_modes(self):
        return len(self.G)

    def copy(self):
        return ReducedState(self.F.copy(), [g.copy() for g in self.G])

    def arrays(self):
        return [self.F] + self.G


@dataclass
class Moments:
    """Macroscopic fields of a reduced state (one entry per leading index)."""

    rho: np.ndarray
    u: np.ndarray
    e_tr: np.ndarray
    e_int_modes: list
    e: np.ndarray
    T: np.ndarray
    T_int_modes: list
    p: np.ndarray
    sigma: np.ndarray
    q: np.ndarray

    @property
    def E(self):
        """Total energy density ``1/2 rho |u|^2 + rho e``."""
        return 0.5 * self.rho * np.sum(self.u ** 2, axis=-1) + self.rho * self.e


def _paired_sum(a):
    """Sum along the last axis, pairing mirror entries first.

    Antisymmetric integrands on symmetric axes then cancel exactly.
    """
    n = a.shape[-1]
    h = n // 2
    s = a[..., :h] + a[..., ::-1][..., :h]
    out = s.sum(axis=-1)
    if n % 2:
        out = out + a[..., h]
    return out


def marginals(X):
    """Two-dimensional marginal sums ``(X_xy, X_xz, X_yz)`` over the third axis."""
    lead, (n0, n1, n2) = X.shape[:-3], X.shape[-3:]
    Xc = np.ascontiguousarray(X, dtype=float).reshape((-1, n0, n1, n2))
    C = Xc.shape[0]
    xy, xz, yz = np.empty((C, n0, n1)), np.zeros((C, n0, n2)), np.zeros((C, n1, n2))
    _kernels.marginals2(Xc, xy, xz, yz)
    return xy.reshape(lead + (n0, n1)), xz.reshape(lead + (n0, n2)), yz.reshape(lead + (n1, n2))


def moments(state: ReducedState, grid: VelocityGrid, gas: Gas, with_T=True) -> Moments:
    """Density, velocity, energies, temperature, stress tensor and heat flux."""
    w = grid.weight
    vx, vy, vz = grid.axes
    Fxy, Fxz, Fyz = marginals(state.F)
    Fx = Fxy.sum(-1)
    Fy = Fxy.sum(-2)
    Fz = Fxz.sum(-2)
    rho = Fx.sum(-1) * w
    if np.any(rho <= 0) or not np.all(np.isfinite(rho)):
        raise DegenerateStateError("non-positive density in %d cell(s)"
                                   % int(np.sum(~(rho > 0))))
    u = np.stack([Fx @ vx, Fy @ vy, Fz @ vz], axis=-1) * w / rho[..., None]
    cs = [vx - u[..., 0:1], vy - u[..., 1:2], vz - u[..., 2:3]]
    # central moments from marginals
    sig = np.empty(rho.shape + (3, 3))
    marg1 = [Fx, Fy, Fz]
    for i in range(3):
        sig[..., i, i] = np.sum(marg1[i] * cs[i] ** 2, axis=-1) * w
    sxy = np.einsum("...a,...ab,...b->...", cs[0], Fxy, cs[1]) * w
    sxz = np.einsum("...a,...ab,...b->...", cs[0], Fxz, cs[2]) * w
    syz = np.einsum("...a,...ab,...b->...", cs[1], Fyz, cs[2]) * w
    sig[..., 0, 1] = sig[..., 1, 0] = sxy
    sig[..., 0, 2] = sig[..., 2, 0] = sxz
    sig[..., 1, 2] = sig[..., 2, 1] = syz
    e_tr = 0.5 * np.trace(sig, axis1=-2, axis2=-1) / rho
    # heat flux: 1/2 sum_j c_j^2 c_i F  +  sum_modes c_i G
    pair = {(0, 1): Fxy, (0, 2): Fxz, (1, 2): Fyz}
    q = np.empty(rho.shape + (3,))
    for i in range(3):
        acc = np.sum(marg1[i] * cs[i] ** 3, axis=-1)
        for j in range(3):
            if j == i:
                continue
            a, b = (i, j) if i < j else (j, i)
            P = pair[(a, b)]
            ca, cb = cs[a], cs[b]
            if a == i:
                acc = acc + np.einsum("...a,...ab,...b->...", ca, P, cb ** 2)
            else:
                acc = acc + np.einsum("...a,...ab,...b->...", ca ** 2, P, cb)
        q[..., i] = 0.5 * acc * w
    e_int_modes = []
    for g in state.G:
        gxy, gxz, _ = marginals(g)
        gx, gy = gxy.sum(-1), gxy.sum(-2)
        gz = gxz.sum(-2)
        e_int_modes.append(gx.sum(-1) * w / rho)
        q[..., 0] += np.sum(gx * cs[0], -1) * w
        q[..., 1] += np.sum(gy * cs[1], -1) * w
        q[..., 2] += np.sum(gz * cs[2], -1) * w
    e = e_tr + sum(e_int_modes)
    if with_T:
        T = gas.T_of_e(e)
        T_int = [m.T_int(ei) for m, ei in zip(gas.modes, e_int_modes)]
    else:
        T = np.full_like(e, np.nan)
        T_int = [np.full_like(e, np.nan) for _ in e_int_modes]
    p = rho * gas.R * T
    return Moments(rho, u, e_tr, e_int_modes, e, T, T_int, p, sig, q)


def maxwellian(rho, u, T, grid: VelocityGrid, R=1.0):
    """Pointwise Maxwellian ``rho/(2 pi R T)^{3/2} exp(-|v-u|^2/(2RT))``."""
    rho = np.asarray(rho, float)
    T = np.asarray(T, float)
    RT = (R * T)[..., None, None, None]
    return rho[..., None, None, None] / (2 * np.pi * RT) ** 1.5 * np.exp(
        -grid.speed2(u) / (2 * RT))


@dataclass
class DiscreteMaxwellian:
    """Separable exponential-family density ``exp(a + b.(v-u) - g |v-u|^2)``.

    ``factors[i]`` holds the normalized 1D profile along axis ``i``; the node
    values are ``rho * f0 (x) f1 (x) f2``.
    """

    rho: np.ndarray
    u: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    factors: list

    def values(self):
        out = np.zeros(np.shape(self.rho) + tuple(f.shape[-1] for f in self.factors))
        return self.blend(out, 0.0, 1.0)

    def blend(self, out, a, b):
        """In place ``out = a * out + b * M`` (``a``, ``b`` per cell)."""
        f0, f1, f2 = self.factors
        return separable_update(out, a, (b * self.rho)[..., None] * f0, f1, f2)


def separable_update(out, a, *terms):
    """In place ``out = a * out + sum_t X_t (x) Y_t (x) Z_t`` over the velocity axes.

    ``terms`` is ``X, Y, Z`` (one product) or three lists of equal length.
    ``a`` and the factors may carry the leading (cell) dimensions of ``out``.
    """
    X, Y, Z = terms
    if not isinstance(X, (list, tuple)):
        X, Y, Z = [X], [Y], [Z]
    lead = out.shape[:-3]
    C = int(np.prod(lead)) if lead else 1
    view = out.reshape((C,) + out.shape[-3:])
    if not np.shares_memory(view, out):
        raise ValueError("output must be contiguous")
    def stack(fs, n):
        return np.stack([np.broadcast_to(f, lead + (n,)).reshape(C, n) for f in fs])
    n0, n1, n2 = out.shape[-3:]
    av = np.broadcast_to(np.asarray(a, float), lead).reshape(C)
    _kernels.separable_update(view, np.ascontiguousarray(av), stack(X, n0), stack(Y, n1),
                              stack(Z, n2))
    return out


def projected_maxwellian(rho, u, e_tr, grid: VelocityGrid, tol=1e-14, max_iter=60,
                         full=False):
    """Exponential-family density whose grid moments are exactly ``(rho, rho u, rho e_tr)``.

    Solved by Newton's method on the separable 1D factors.  Returns node values,
    or the :class:`DiscreteMaxwellian` parameters when ``full`` is set.
    """
    rho = np.asarray(rho, float)
    u = np.asarray(u, float)
    e_tr = np.asarray(e_tr, float)
    lead = rho.shape
    if np.any(e_tr <= 0) or np.any(rho <= 0):
        raise ProjectionError("projection needs positive density and energy")
    if np.any(u < grid.v_min) or np.any(u > grid.v_max):
        raise ProjectionError("bulk velocity outside the velocity grid; "
                              "enlarge span or recentre the grid")
    s = [grid.axes[i] - u[..., i:i + 1] for i in range(3)]
    beta = np.zeros(lead + (3,))
    gamma = 0.75 / e_tr
    def axis_moments(beta, gamma):
        ms = []
        for i in range(3):
            x = beta[..., i:i + 1] * s[i] - gamma[..., None] * s[i] ** 2
            x = x - x.max(axis=-1, keepdims=True)
            wv = np.exp(x)
            Z = _paired_sum(wv)
            m = [_paired_sum(wv * s[i] ** k) / Z for k in (1, 2, 3, 4)]
            ms.append((wv, Z, m))
        return ms

    scale = e_tr
    for it in range(max_iter):
        ms = axis_moments(beta, gamma)
        r = np.empty(lead + (4,))
        J = np.zeros(lead + (4, 4))
        for i, (_, _, (m1, m2, m3, m4)) in enumerate(ms):
            r[..., i] = m1
            J[..., i, i] = m2 - m1 * m1
            J[..., i, 3] = -(m3 - m1 * m2)
            J[..., 3, i] = 0.5 * (m3 - m2 * m1)
            J[..., 3, 3] += -0.5 * (m4 - m2 * m2)
        r[..., 3] = 0.5 * sum(m[2][1] for m in ms) - e_tr
        err = np.max(np.abs(r[..., :3]) / np.sqrt(scale)[..., None], axis=-1)
        err = np.maximum(err, np.abs(r[..., 3]) / scale)
        if np.all(err <= tol):
            break
        try:
            step = np.linalg.solve(J, r[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise ProjectionError("singular moment Jacobian; grid too coarse") from exc
        # keep the width parameter from collapsing in one iteration
        lim = 0.5 * np.abs(gamma) + 0.5 / (scale * 1e3)
        step[..., 3] = np.clip(step[..., 3], -lim, lim)
        beta = beta - step[..., :3]
        gamma = gamma - step[..., 3]
    else:
        if np.any(err > 1e3 * tol) or not np.all(np.isfinite(err)):
            raise ProjectionError(
                "moment projection did not converge (residual %.3g); "
                "use a larger velocity span or more nodes" % float(np.max(err)))
    factors = []
    alpha = np.log(rho)
    for i, (wv, Z, _) in enumerate(ms):
        factors.append(wv / (Z[..., None] * grid.dv[i]))
        x = beta[..., i:i + 1] * s[i] - gamma[..., None] * s[i] ** 2
        alpha = alpha - np.log(Z * grid.dv[i]) - x.max(axis=-1)
    dm = DiscreteMaxwellian(rho, u, alpha, beta, gamma, factors)
    return dm if full else dm.values()


def project(m: Moments, grid: VelocityGrid, R=1.0, full=False):
    """Collision target: projected Maxwellian at ``(rho, u, 3/2 R T)``."""
    return projected_maxwellian(m.rho, m.u, 1.5 * R * m.T, grid, full=full)


def equilibrium_state(rho, u, T, grid: VelocityGrid, gas: Gas) -> ReducedState:
    """The pair ``(M, e_int^i(T) M)`` built on the projected Maxwellian."""
    rho = np.asarray(rho, float)
    T = np.asarray(T, float)
    u = np.broadcast_to(np.asarray(u, float), rho.shape + (3,))
    M = projected_maxwellian(rho, u, 1.5 * gas.R * T, grid)
    G = [np.asarray(m.e_int(T))[..., None, None, None] * M for m in gas.modes]
    return ReducedState(M, G)


def clip_negative(state: ReducedState, where="") -> int:
    """Zero out negative node values; returns how many were clipped."""
    count = 0
    for a in state.arrays():
        neg = a < 0
        k = int(neg.sum())
        if k:
            a[neg] = 0.0
            count += k
    if count:
        log.warning("clipped %d negative node values %s", count, where)
    return count
