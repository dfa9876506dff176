"""Numba leapfrog kernels on the Yee lattice.

Fields are stored in normalised form: E in V/m and ``Z0 * H``, so the curl
updates only need the Courant number. H arrays carry one ghost layer on both
sides of each transverse axis; ghosts implement PMC mirror planes.

Index map (cell units, origin at node 0):
    ex[i, j, k]     -> Ex(i+1/2, j, k)
    ey[i, j, k]     -> Ey(i, j+1/2, k)
    ez[i, j, k]     -> Ez(i, j, k+1/2)
    hx[i, j+1, k+1] -> Hx(i, j+1/2, k+1/2)
    hy[i+1, j, k+1] -> Hy(i+1/2, j, k+1/2)
    hz[i+1, j+1, k] -> Hz(i+1/2, j+1/2, k)

Every loop writes disjoint cells, so results do not depend on thread count.
"""

from __future__ import annotations

import numba as nb
from numba import prange


@nb.njit(parallel=True, cache=True, fastmath=False)
def update_e(ex, ey, ez, hx, hy, hz, iex, iey, iez, s, kex, key, kez):
    """E += S/eps * curl(Z0 H), with 1/kappa stretching per axis."""
    nx = ex.shape[0]
    ny = ey.shape[1]
    nz = ez.shape[2]
    for i in prange(nx + 1):
        for j in range(ny + 1):
            for k in range(nz + 1):
                if i < nx:
                    c = s * iex[i, j]
                    ex[i, j, k] += c * (
                        (hz[i + 1, j + 1, k] - hz[i + 1, j, k]) * key[j]
                        - (hy[i + 1, j, k + 1] - hy[i + 1, j, k]) * kez[k]
                    )
                if j < ny:
                    c = s * iey[i, j]
                    ey[i, j, k] += c * (
                        (hx[i, j + 1, k + 1] - hx[i, j + 1, k]) * kez[k]
                        - (hz[i + 1, j + 1, k] - hz[i, j + 1, k]) * kex[i]
                    )
                if k < nz:
                    c = s * iez[i, j]
                    ez[i, j, k] += c * (
                        (hy[i + 1, j, k + 1] - hy[i, j, k + 1]) * kex[i]
                        - (hx[i, j + 1, k + 1] - hx[i, j, k + 1]) * key[j]
                    )


@nb.njit(parallel=True, cache=True, fastmath=False)
def update_h(ex, ey, ez, hx, hy, hz, s, khx, khy, khz):
    """Z0 H -= S * curl(E), with 1/kappa stretching per axis."""
    nx = ex.shape[0]
    ny = ey.shape[1]
    nz = ez.shape[2]
    for i in prange(nx + 1):
        for j in range(ny + 1):
            for k in range(nz + 1):
                if j < ny and k < nz:
                    hx[i, j + 1, k + 1] -= s * (
                        (ez[i, j + 1, k] - ez[i, j, k]) * khy[j] - (ey[i, j, k + 1] - ey[i, j, k]) * khz[k]
                    )
                if i < nx and k < nz:
                    hy[i + 1, j, k + 1] -= s * (
                        (ex[i, j, k + 1] - ex[i, j, k]) * khz[k] - (ez[i + 1, j, k] - ez[i, j, k]) * khx[i]
                    )
                if i < nx and j < ny:
                    hz[i + 1, j + 1, k] -= s * (
                        (ey[i + 1, j, k] - ey[i, j, k]) * khx[i] - (ex[i, j + 1, k] - ex[i, j, k]) * khy[j]
                    )


# ---------------------------------------------------------------------------
# CPML auxiliary fields. Each psi array spans only the absorbing slabs along
# its derivative axis; ``idx`` maps slab entries to lattice indices.
# ---------------------------------------------------------------------------


@nb.njit(parallel=True, cache=True)
def cpml_e_x(ey, ez, hy, hz, iey, iez, s, psi_eyx, psi_ezx, idx, b, a):
    """x-derivative corrections for Ey (-dHz/dx) and Ez (+dHy/dx)."""
    ny = ey.shape[1]
    nz = ez.shape[2]
    for t in prange(idx.shape[0]):
        i = idx[t]
        for j in range(ny + 1):
            for k in range(nz + 1):
                if j < ny:
                    d = hz[i + 1, j + 1, k] - hz[i, j + 1, k]
                    psi_eyx[t, j, k] = b[t] * psi_eyx[t, j, k] + a[t] * d
                    ey[i, j, k] -= s * iey[i, j] * psi_eyx[t, j, k]
                if k < nz:
                    d = hy[i + 1, j, k + 1] - hy[i, j, k + 1]
                    psi_ezx[t, j, k] = b[t] * psi_ezx[t, j, k] + a[t] * d
                    ez[i, j, k] += s * iez[i, j] * psi_ezx[t, j, k]


@nb.njit(parallel=True, cache=True)
def cpml_e_y(ex, ez, hx, hz, iex, iez, s, psi_exy, psi_ezy, idx, b, a):
    """y-derivative corrections for Ex (+dHz/dy) and Ez (-dHx/dy)."""
    nx = ex.shape[0]
    nz = ez.shape[2]
    for i in prange(nx + 1):
        for t in range(idx.shape[0]):
            j = idx[t]
            for k in range(nz + 1):
                if i < nx:
                    d = hz[i + 1, j + 1, k] - hz[i + 1, j, k]
                    psi_exy[i, t, k] = b[t] * psi_exy[i, t, k] + a[t] * d
                    ex[i, j, k] += s * iex[i, j] * psi_exy[i, t, k]
                if k < nz:
                    d = hx[i, j + 1, k + 1] - hx[i, j, k + 1]
                    psi_ezy[i, t, k] = b[t] * psi_ezy[i, t, k] + a[t] * d
                    ez[i, j, k] -= s * iez[i, j] * psi_ezy[i, t, k]


@nb.njit(parallel=True, cache=True)
def cpml_e_z(ex, ey, hx, hy, iex, iey, s, psi_exz, psi_eyz, idx, b, a):
    """z-derivative corrections for Ex (-dHy/dz) and Ey (+dHx/dz)."""
    nx = ex.shape[0]
    ny = ey.shape[1]
    for i in prange(nx + 1):
        for j in range(ny + 1):
            for t in range(idx.shape[0]):
                k = idx[t]
                if i < nx:
                    d = hy[i + 1, j, k + 1] - hy[i + 1, j, k]
                    psi_exz[i, j, t] = b[t] * psi_exz[i, j, t] + a[t] * d
                    ex[i, j, k] -= s * iex[i, j] * psi_exz[i, j, t]
                if j < ny:
                    d = hx[i, j + 1, k + 1] - hx[i, j + 1, k]
                    psi_eyz[i, j, t] = b[t] * psi_eyz[i, j, t] + a[t] * d
                    ey[i, j, k] += s * iey[i, j] * psi_eyz[i, j, t]


@nb.njit(parallel=True, cache=True)
def cpml_h_x(ey, ez, hy, hz, s, psi_hyx, psi_hzx, idx, b, a):
    """x-derivative corrections for Hy (+dEz/dx) and Hz (-dEy/dx)."""
    ny = ey.shape[1]
    nz = ez.shape[2]
    for t in prange(idx.shape[0]):
        i = idx[t]
        for j in range(ny + 1):
            for k in range(nz + 1):
                if k < nz:
                    d = ez[i + 1, j, k] - ez[i, j, k]
                    psi_hyx[t, j, k] = b[t] * psi_hyx[t, j, k] + a[t] * d
                    hy[i + 1, j, k + 1] += s * psi_hyx[t, j, k]
                if j < ny:
                    d = ey[i + 1, j, k] - ey[i, j, k]
                    psi_hzx[t, j, k] = b[t] * psi_hzx[t, j, k] + a[t] * d
                    hz[i + 1, j + 1, k] -= s * psi_hzx[t, j, k]


@nb.njit(parallel=True, cache=True)
def cpml_h_y(ex, ez, hx, hz, s, psi_hxy, psi_hzy, idx, b, a):
    """y-derivative corrections for Hx (-dEz/dy) and Hz (+dEx/dy)."""
    nx = ex.shape[0]
    nz = ez.shape[2]
    for i in prange(nx + 1):
        for t in range(idx.shape[0]):
            j = idx[t]
            for k in range(nz + 1):
                if k < nz:
                    d = ez[i, j + 1, k] - ez[i, j, k]
                    psi_hxy[i, t, k] = b[t] * psi_hxy[i, t, k] + a[t] * d
                    hx[i, j + 1, k + 1] -= s * psi_hxy[i, t, k]
                if i < nx:
                    d = ex[i, j + 1, k] - ex[i, j, k]
                    psi_hzy[i, t, k] = b[t] * psi_hzy[i, t, k] + a[t] * d
                    hz[i + 1, j + 1, k] += s * psi_hzy[i, t, k]


@nb.njit(parallel=True, cache=True)
def cpml_h_z(ex, ey, hx, hy, s, psi_hxz, psi_hyz, idx, b, a):
    """z-derivative corrections for Hx (+dEy/dz) and Hy (-dEx/dz)."""
    nx = ex.shape[0]
    ny = ey.shape[1]
    for i in prange(nx + 1):
        for j in range(ny + 1):
            for t in range(idx.shape[0]):
                k = idx[t]
                if j < ny:
                    d = ey[i, j, k + 1] - ey[i, j, k]
                    psi_hxz[i, j, t] = b[t] * psi_hxz[i, j, t] + a[t] * d
                    hx[i, j + 1, k + 1] += s * psi_hxz[i, j, t]
                if i < nx:
                    d = ex[i, j, k + 1] - ex[i, j, k]
                    psi_hyz[i, j, t] = b[t] * psi_hyz[i, j, t] + a[t] * d
                    hy[i + 1, j, k + 1] -= s * psi_hyz[i, j, t]


@nb.njit(cache=True)
def max_abs(a):
    m = 0.0
    for v in a.ravel():
        av = abs(v)
        if av > m or av != av:
            m = av if av == av else float("inf")
    return m
