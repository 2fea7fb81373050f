"""Uniform Cartesian velocity lattice and midpoint-rule quadrature.

Node values are stored with the three velocity axes last, so an array of shape
``(..., n0, n1, n2)`` holds one distribution per leading index (spatial cell).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VAXES = (-3, -2, -1)


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Bounded uniform velocity lattice with nodes at cell midpoints.

    Attributes
    ----------
    centers : (3,) array
        Midpoint of each axis; nodes are placed symmetrically about it.
    n : (3,) int array
        Nodes per axis.
    dv : (3,) array
        Spacing per axis.
    """

    centers: np.ndarray
    n: tuple
    dv: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=float).reshape(3)
        n = tuple(int(k) for k in np.broadcast_to(self.n, (3,)))
        dv = np.asarray(np.broadcast_to(self.dv, (3,)), dtype=float)
        if min(n) < 8:
            raise ValueError("velocity grids need at least 8 nodes per axis")
        if np.any(dv <= 0):
            raise ValueError("velocity spacing must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "dv", dv)
        # offsets (k - (n-1)/2) dv are exactly antisymmetric about the center
        axes = tuple(c[i] + (np.arange(n[i]) - 0.5 * (n[i] - 1)) * dv[i] for i in range(3))
        object.__setattr__(self, "axes", axes)

    @property
    def v_min(self):
        return self.centers - 0.5 * self.n_arr * self.dv

    @property
    def v_max(self):
        return self.centers + 0.5 * self.n_arr * self.dv

    @property
    def n_arr(self):
        return np.asarray(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return int(np.prod(self.n))

    @property
    def weight(self):
        return float(np.prod(self.dv))

    def mesh(self):
        """Broadcastable node coordinates ``(vx, vy, vz)``."""
        ax = self.axes
        return (ax[0][:, None, None], ax[1][None, :, None], ax[2][None, None, :])

    def speed2(self, u=(0.0, 0.0, 0.0)):
        """``|v - u|**2`` on all nodes; ``u`` may carry leading dimensions."""
        u = np.asarray(u, dtype=float)
        out = 0.0
        for i, vi in enumerate(self.mesh()):
            ui = u[..., i][..., None, None, None]
            out = out + (vi - ui) ** 2
        return out

    @property
    def max_abs_vx(self):
        return float(np.max(np.abs(self.axes[0])))


def build_grid(u_ref=(0.0, 0.0, 0.0), T_ref=1.0, R=1.0, n=32, span=6.0) -> VelocityGrid:
    """Grid covering ``u_ref +/- span*sqrt(R T_ref)`` on each axis.

    ``n`` and ``span`` may be given per axis.
    """
    n = np.broadcast_to(np.asarray(n, dtype=int), (3,))
    span = np.broadcast_to(np.asarray(span, dtype=float), (3,))
    if np.any(n < 8):
        raise ValueError("n must be >= 8")
    if np.any(span < 3):
        raise ValueError("span must be >= 3")
    c = np.sqrt(R * T_ref)
    dv = 2.0 * span * c / n
    return VelocityGrid(np.broadcast_to(np.asarray(u_ref, float), (3,)), tuple(n), dv)


def integrate(grid: VelocityGrid, psi):
    """Midpoint-rule ``<psi>_v`` over the last three axes."""
    return np.sum(psi, axis=VAXES) * grid.weight


def maxwellian0(grid: VelocityGrid):
    """Standard Maxwellian ``M0(V)`` with ``V`` taken as the node coordinates."""
    return np.exp(-0.5 * grid.speed2(grid.centers * 0.0)) / (2.0 * np.pi) ** 1.5


def appendix_a_suite(grid: VelocityGrid, C=None):
    """Check the standard Gaussian moment identities on ``grid``.

    Node coordinates are read as the scaled velocity ``V``.  Returns a list of
    ``(name, measured, expected, abs_error)`` tuples; tensor identities report
    their worst component.
    """
    if C is None:
        C = np.array([[1.0, 2.0, -0.5], [0.3, -1.0, 0.7], [1.5, 0.2, 2.0]])
    C = np.asarray(C, dtype=float)
    M0 = maxwellian0(grid)
    V = grid.mesh()
    V = [np.broadcast_to(Vi, grid.shape) for Vi in V]
    V2 = V[0] ** 2 + V[1] ** 2 + V[2] ** 2
    I = np.eye(3)

    def tensor(fn):
        return np.array([[integrate(grid, fn(i, j)) for j in range(3)] for i in range(3)])

    out = []

    def add(name, measured, expected):
        measured = np.asarray(measured, float)
        expected = np.broadcast_to(np.asarray(expected, float), measured.shape)
        err = float(np.max(np.abs(measured - expected)))
        out.append((name, measured, expected, err))

    add("<M0> = 1", integrate(grid, M0), 1.0)
    add("<Vi M0> = 0", [integrate(grid, V[i] * M0) for i in range(3)], 0.0)
    add("<Vi Vj M0> = delta_ij", tensor(lambda i, j: V[i] * V[j] * M0), I)
    add("<|V|^2 M0> = 3", integrate(grid, V2 * M0), 3.0)
    add("<Vi^2 Vj^2 M0> = 1 + 2 delta_ij",
        tensor(lambda i, j: V[i] ** 2 * V[j] ** 2 * M0), 1.0 + 2.0 * I)
    add("<Vi Vj |V|^2 M0> = 5 delta_ij", tensor(lambda i, j: V[i] * V[j] * V2 * M0), 5.0 * I)
    add("<|V|^4 M0> = 15", integrate(grid, V2 ** 2 * M0), 15.0)
    add("<Vi Vj |V|^4 M0> = 35 delta_ij",
        tensor(lambda i, j: V[i] * V[j] * V2 ** 2 * M0), 35.0 * I)
    add("<|V|^6 M0> = 105", integrate(grid, V2 ** 3 * M0), 105.0)
    add("<|V|^2 Vi M0> = 0 (odd)", [integrate(grid, V2 * V[i] * M0) for i in range(3)], 0.0)
    CVV = sum(C[k, l] * V[k] * V[l] for k in range(3) for l in range(3))
    add("<Vi Vj C_kl Vk Vl M0> = C_ij + C_ji + C_kk delta_ij",
        tensor(lambda i, j: V[i] * V[j] * CVV * M0), C + C.T + np.trace(C) * I)
    return out
