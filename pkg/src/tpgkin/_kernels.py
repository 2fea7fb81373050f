"""Compiled inner loops for the spatial transport."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    if abs(a) < abs(b):
        return a
    return b


@njit(cache=True)
def muscl_update(ext, vx, lam, second_order, out):
    """Finite-volume advection of ``ext`` (with two ghost layers per side).

    ``ext`` has shape ``(N+4, n0, m)``; ``out`` receives the ``N`` interior cells.
    Face values follow the Lax-Wendroff-corrected minmod reconstruction
    ``q_i + (1 - nu)/2 * slope_i`` on the upwind side.
    """
    Np4, n0, m = ext.shape
    N = Np4 - 4
    flux = np.empty((N + 1, m))
    for a in range(n0):
        v = vx[a]
        nu = abs(v) * lam
        k = 0.5 * (1.0 - nu) if second_order else 0.0
        for f in range(N + 1):
            # face between ext[f+1] and ext[f+2]
            if v >= 0.0:
                for c in range(m):
                    q = ext[f + 1, a, c]
                    s = _minmod(q - ext[f, a, c], ext[f + 2, a, c] - q)
                    flux[f, c] = v * (q + k * s)
            else:
                for c in range(m):
                    q = ext[f + 2, a, c]
                    s = _minmod(q - ext[f + 1, a, c], ext[f + 3, a, c] - q)
                    flux[f, c] = v * (q - k * s)
        for i in range(N):
            for c in range(m):
                out[i, a, c] = ext[i + 2, a, c] - lam * (flux[i + 1, c] - flux[i, c])


@njit(cache=True)
def separable_update(out, a, X, Y, Z):
    """In place ``out[c] = a[c] * out[c] + sum_t X[t,c] (x) Y[t,c] (x) Z[t,c]``.

    ``out`` has shape ``(C, n0, n1, n2)``; ``X`` is ``(T, C, n0)`` and so on.
    """
    C, n0, n1, n2 = out.shape
    nt = X.shape[0]
    for c in range(C):
        ac = a[c]
        for i in range(n0):
            for j in range(n1):
                for t in range(nt):
                    xy = X[t, c, i] * Y[t, c, j]
                    if t == 0:
                        for k in range(n2):
                            out[c, i, j, k] = ac * out[c, i, j, k] + xy * Z[t, c, k]
                    else:
                        for k in range(n2):
                            out[c, i, j, k] += xy * Z[t, c, k]


@njit(cache=True)
def marginals2(X, xy, xz, yz):
    """One-pass sums of ``X (C, n0, n1, n2)`` over each single velocity axis."""
    C, n0, n1, n2 = X.shape
    for c in range(C):
        for i in range(n0):
            for j in range(n1):
                acc = 0.0
                for k in range(n2):
                    x = X[c, i, j, k]
                    acc += x
                    xz[c, i, k] += x
                    yz[c, j, k] += x
                xy[c, i, j] = acc
