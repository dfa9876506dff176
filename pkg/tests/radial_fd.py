"""Finite-difference radial eigen-solver for transverse H, used as a test oracle.

Unknowns: F = H_r on integer nodes r_j = j h and G = -i H_phi on half nodes.
The operator is beta^2 H_t = k0^2 eps H_t + grad(div H_t) - eps grad(psi/eps) x z
with psi the z component of curl H_t (up to a factor i). It shares no code
with the Bessel-function solver.
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigs


def _eps(r, radii, indices):
    out = np.full(r.shape, indices[-1] ** 2)
    for R, n in zip(reversed(radii), reversed(indices[:-1])):
        out = np.where(r < R, n**2, out)
    return out


def _eps_avg(r, h, radii, indices):
    """Cell-averaged permittivity over [r - h/2, r + h/2] (linear measure)."""
    lo, hi = r - h / 2, r + h / 2
    out = np.zeros_like(r)
    edges = [0.0, *radii, np.inf]
    for (a, b), n in zip(zip(edges[:-1], edges[1:]), indices):
        out += np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0, None) * n**2
    return out / h


def n_eff_fd(radii, indices, wavelength, m, guess, h, r_max):
    k0 = 2 * np.pi / wavelength
    N = int(round(r_max / h))
    rj = np.arange(1, N) * h  # F nodes j = 1..N-1
    rh = (np.arange(N) + 0.5) * h  # G nodes j+1/2, j = 0..N-1
    nF, nG = N - 1, N
    iF = lambda j: j - 1  # noqa: E731
    iG = lambda j: nF + j  # noqa: E731
    eps_j = _eps_avg(rj, h, radii, indices)
    eps_h = _eps_avg(rh, h, radii, indices)
    # D on half nodes: (r_{j+1}F_{j+1} - r_j F_j)/(h r_{j+1/2}) - m G_{j+1/2}/r_{j+1/2}
    Dm = sp.lil_matrix((N, nF + nG))
    for j in range(N):
        if j + 1 <= N - 1:
            Dm[j, iF(j + 1)] += (j + 1) * h / (h * rh[j])
        if j >= 1:
            Dm[j, iF(j)] -= j * h / (h * rh[j])
        Dm[j, iG(j)] -= m / rh[j]
    # psi on integer nodes 0..N (endpoints zero): E_z vanishes on axis for m >= 1
    Pm = sp.lil_matrix((N + 1, nF + nG))
    for j in range(1, N):
        r = j * h
        Pm[j, iG(j)] += rh[j] / (h * r)
        Pm[j, iG(j - 1)] -= rh[j - 1] / (h * r)
        Pm[j, iF(j)] -= m / r
    Dm, Pm = Dm.tocsr(), Pm.tocsr()
    eps_nodes = np.concatenate([[indices[0] ** 2], eps_j, [indices[-1] ** 2]])
    A = sp.lil_matrix((nF + nG, nF + nG))
    A = sp.diags(np.concatenate([k0**2 * eps_j, k0**2 * eps_h])).tolil()
    # F rows
    dD = (Dm[1:N] - Dm[0 : N - 1]) / h
    rowsF = dD + sp.diags(m / rj) @ Pm[1:N]
    # G rows
    Pe = sp.diags(1 / eps_nodes) @ Pm
    rowsG = sp.diags(m / rh) @ Dm + sp.diags(eps_h / h) @ (Pe[1 : N + 1] - Pe[0:N])
    A = A.tocsr() + sp.vstack([rowsF, rowsG]).tocsr()
    vals = eigs(A, k=1, sigma=(k0 * guess) ** 2, return_eigenvectors=False)
    return float(np.sqrt(vals[0].real) / k0)


def n_eff_extrapolated(radii, indices, wavelength, m, guess, h=1.0, r_max=4000.0):
    """Richardson extrapolation over h, h/2 assuming second-order convergence."""
    a = n_eff_fd(radii, indices, wavelength, m, guess, h, r_max)
    b = n_eff_fd(radii, indices, wavelength, m, guess, h / 2, r_max)
    return b + (b - a) / 3.0, a, b
