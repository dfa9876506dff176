"""Exact vectorial guided modes of step-index cylindrical waveguides.

The field in every homogeneous region is written with cylindrical Bessel
functions for the longitudinal components; tangential continuity at each
interface gives a square matching matrix whose determinant vanishes on a
guided mode. Columns are normalised to unit length, so the determinant is
bounded by one and doubles as a scale-free dispersion residual.

Conventions: fields vary as ``exp(i(beta z + m phi - omega t))``. A mode of
azimuthal order ``m >= 1`` is returned as two real-azimuth members, ``even``
(``e_r ~ cos m phi``) and ``odd`` (``e_r ~ sin m phi``). Field samples are SI
(V/m, A/m) and normalised to 1 W of forward power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .scene import Z0, LayeredCylinderProfile

J0_FIRST_ZERO = special.jn_zeros(0, 1)[0]  # 2.404825...

SCAN_POINTS = 2000
ROOT_SEPARATION = 1e-9
RESIDUAL_ACCEPT = 1e-8


class NoGuidanceError(ValueError):
    """Raised when the core index does not exceed the cladding index."""


def v_number(diameter: float, n_core: float, n_clad: float, wavelength: float) -> float:
    """Normalised frequency ``(pi d / lambda) sqrt(n_core^2 - n_clad^2)``."""
    if n_core <= n_clad:
        raise NoGuidanceError(f"core index {n_core} must exceed cladding index {n_clad}")
    if diameter < 0 or wavelength <= 0:
        raise ValueError("diameter must be >= 0 and wavelength > 0")
    return math.pi * diameter / wavelength * math.sqrt(n_core**2 - n_clad**2)


def size_parameter(diameter: float, wavelength: float) -> float:
    """Fiber size parameter ``k a = pi d / lambda``."""
    return math.pi * diameter / wavelength


# ---------------------------------------------------------------------------
# radial basis functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Basis:
    """One radial solution ``Z(r)`` of order ``m`` in a region, with a fixed scale.

    kind: 'J', 'Y' (oscillatory, argument kappa r) or 'I', 'K' (evanescent,
    argument gamma r). ``ref`` is the radius at which exponential scaling is
    anchored so the same column can be used at two interfaces.
    """

    kind: str
    q: float  # kappa or gamma, rad/nm
    ref: float

    def value(self, m: int, r):
        """Return (Z, dZ/dr) at ``r`` (nm)."""
        x = self.q * np.asarray(r, dtype=float)
        q = self.q
        if self.kind == "J":
            z = special.jv(m, x)
            dz = 0.5 * q * (special.jv(m - 1, x) - special.jv(m + 1, x))
        elif self.kind == "Y":
            z = special.yv(m, x)
            dz = 0.5 * q * (special.yv(m - 1, x) - special.yv(m + 1, x))
        elif self.kind == "I":
            s = np.exp(x - q * self.ref)
            z = special.ive(m, x) * s
            dz = 0.5 * q * (special.ive(m - 1, x) + special.ive(m + 1, x)) * s
        else:  # K
            s = np.exp(-(x - q * self.ref))
            z = special.kve(m, x) * s
            dz = -0.5 * q * (special.kve(m - 1, x) + special.kve(m + 1, x)) * s
        return z, dz


def _region_bases(radii, indices, k0, beta):
    """Radial bases per region, innermost first; the last region is the cladding."""
    nreg = len(indices)
    out = []
    for l in range(nreg):
        kappa2 = (k0 * indices[l]) ** 2 - beta**2
        q = math.sqrt(abs(kappa2))
        r_lo = radii[l - 1] if l > 0 else 0.0
        r_hi = radii[l] if l < len(radii) else None
        if l == nreg - 1:
            out.append((kappa2, [_Basis("K", q, r_lo)]))
        elif kappa2 > 0:
            bases = [_Basis("J", q, 0.0)] if l == 0 else [_Basis("J", q, 0.0), _Basis("Y", q, 0.0)]
            out.append((kappa2, bases))
        else:
            bases = [_Basis("I", q, r_hi)] if l == 0 else [_Basis("I", q, r_hi), _Basis("K", q, r_lo)]
            out.append((kappa2, bases))
    return out


def _matching_matrix(radii, indices, k0, m, beta):
    """Column-normalised tangential-continuity matrix and column bookkeeping.

    Rows per interface: E_z, H_z, E_phi, H_phi (H scaled by Z0, imaginary
    unit factored out). Columns: (a, b) pairs per basis function, carrying
    the E_z and H_z amplitudes.
    """
    regions = _region_bases(radii, indices, k0, beta)
    cols = []  # (region, basis index, 'a'|'b')
    for l, (_, bases) in enumerate(regions):
        for j in range(len(bases)):
            cols.append((l, j, "a"))
            cols.append((l, j, "b"))
    ncol = len(cols)
    M = np.zeros((4 * len(radii), ncol))
    for i, R in enumerate(radii):
        for c, (l, j, ab) in enumerate(cols):
            if l not in (i, i + 1):
                continue
            kappa2, bases = regions[l]
            n2 = indices[l] ** 2
            z, dz = bases[j].value(m, R)
            sgn = 1.0 if l == i else -1.0
            if ab == "a":
                entry = (kappa2 * z, 0.0, -(m * beta / R) * z, k0 * n2 * dz)
            else:
                entry = (0.0, kappa2 * z, k0 * dz, -(m * beta / R) * z)
            # |kappa^2| scaling of the physical column keeps every entry finite
            s = sgn if kappa2 > 0 else -sgn
            M[4 * i : 4 * i + 4, c] = s * np.asarray(entry)
    norms = np.linalg.norm(M, axis=0)
    norms[norms == 0] = 1.0
    return M / norms, norms, cols, regions


def dispersion_residual(profile: LayeredCylinderProfile, wavelength: float, m: int, n_eff: float) -> float:
    """Signed determinant of the column-normalised matching matrix."""
    k0 = 2 * math.pi / wavelength
    M, *_ = _matching_matrix(profile.radii, profile.indices, k0, m, k0 * n_eff)
    return float(np.linalg.det(M))


# ---------------------------------------------------------------------------
# modes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GuidedMode:
    """A bound eigenmode; ``field_sampler`` gives SI fields normalised to 1 W."""

    family: str
    m: int
    radial_order: int
    beta: float  # rad/nm
    n_eff: float
    wavelength: float
    parity: str  # 'even' / 'odd' for m >= 1, '' for m = 0
    radii: tuple[float, ...]
    indices: tuple[float, ...]
    coeffs: tuple[tuple[tuple[float, float], ...], ...] = field(repr=False)
    bases: tuple[tuple[_Basis, ...], ...] = field(repr=False)
    scale: float = field(default=1.0, repr=False)
    residual: float = 0.0
    near_degenerate: bool = False

    @property
    def name(self) -> str:
        base = f"{self.family}{self.m}{self.radial_order}"
        return f"{base}{'_' + self.parity if self.parity else ''}"

    @property
    def key(self) -> tuple:
        return (self.family, self.m, self.radial_order, self.parity)

    @property
    def carried_power(self) -> float:
        return 1.0

    def radial_amplitudes(self, r):
        """Radial profiles (A, B, C, D, F, G) of the exp(i m phi) field, SI units.

        E_z = A, E_r = iB, E_phi = C, H_z = iD, H_r = F, H_phi = iG.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        k0 = 2 * math.pi / self.wavelength
        beta, m = self.beta, self.m
        out = np.zeros((6,) + r.shape)
        edges = (0.0,) + self.radii + (np.inf,)
        for l in range(len(self.indices)):
            sel = (r >= edges[l]) & (r < edges[l + 1]) if l else (r < edges[1])
            if not np.any(sel):
                continue
            rr = np.maximum(r[sel], 1e-9)
            n2 = self.indices[l] ** 2
            kappa2 = (k0 * self.indices[l]) ** 2 - beta**2
            A = np.zeros_like(rr)
            dA = np.zeros_like(rr)
            D = np.zeros_like(rr)
            dD = np.zeros_like(rr)
            for basis, (a, b) in zip(self.bases[l], self.coeffs[l]):
                z, dz = basis.value(m, rr)
                A += a * z
                dA += a * dz
                D += b * z
                dD += b * dz
            B = (beta * dA - k0 * m * D / rr) / kappa2
            C = (-(m * beta / rr) * A + k0 * dD) / kappa2
            F = (-beta * dD + k0 * n2 * m * A / rr) / kappa2
            G = (-(m * beta / rr) * D + k0 * n2 * dA) / kappa2
            out[:, sel] = np.array([A, B, C, D / Z0, F / Z0, G / Z0])
        return out * self.scale

    def fields(self, r, phi):
        """Complex (e_r, e_phi, e_z, h_r, h_phi, h_z) at polar points; shape (6, ...)."""
        r = np.asarray(r, dtype=float)
        phi = np.broadcast_to(np.asarray(phi, dtype=float), r.shape)
        A, B, C, D, F, G = self.radial_amplitudes(r.ravel())
        m = self.m
        shape = r.shape
        cm = np.cos(m * phi).ravel()
        sm = np.sin(m * phi).ravel()
        if self.parity == "odd" or (m == 0 and self.family == "TE"):
            out = np.array([B * sm, -C * cm, -1j * A * sm, -F * cm, G * sm, -1j * D * cm])
        else:
            out = np.array([B * cm, C * sm, -1j * A * cm, F * sm, G * cm, 1j * D * sm])
        return out.reshape((6,) + shape)

    def cartesian_fields(self, x, y):
        """Complex (Ex, Ey, Ez, Hx, Hy, Hz) at Cartesian points (nm)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        phi = np.arctan2(y, x)
        er, ep, ez, hr, hp, hz = self.fields(r, phi)
        c, s = np.cos(phi), np.sin(phi)
        return np.array([er * c - ep * s, er * s + ep * c, ez, hr * c - hp * s, hr * s + hp * c, hz])

    def field_sampler(self, r, phi):
        return self.fields(r, phi)


def mode_field(mode: GuidedMode, r, phi):
    """Normalised complex 6-vector (e_r, e_phi, e_z, h_r, h_phi, h_z) of ``mode``."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be non-negative")
    return mode.fields(r, phi)


@dataclass(frozen=True)
class ModeSpectrum:
    profile: LayeredCylinderProfile
    wavelength: float
    modes: tuple[GuidedMode, ...]

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return len(self.modes)

    def names(self) -> list[str]:
        return [m.name for m in self.modes]

    def find(self, family: str, m: int, radial_order: int = 1, parity: str | None = None) -> GuidedMode:
        for mode in self.modes:
            if (mode.family, mode.m, mode.radial_order) == (family, m, radial_order):
                if parity is None or mode.parity == parity:
                    return mode
        raise KeyError(f"{family}{m}{radial_order} not in spectrum {self.names()}")

    @property
    def is_single_mode(self) -> bool:
        return {(m.family, m.m) for m in self.modes} == {("HE", 1)}

    def rows(self) -> list[dict]:
        """One row per mode (degenerate members listed once) for CSV output."""
        seen = set()
        rows = []
        for mode in self.modes:
            key = (mode.family, mode.m, mode.radial_order)
            if key in seen:
                continue
            seen.add(key)
            rows.append(
                {
                    "family": mode.family,
                    "m": mode.m,
                    "radial_order": mode.radial_order,
                    "n_eff": mode.n_eff,
                    "beta_rad_per_nm": mode.beta,
                }
            )
        return rows


def _scan_grid(lo: float, hi: float, n: int) -> np.ndarray:
    span = hi - lo
    uniform = np.linspace(lo, hi, n + 2)[1:-1]
    # near-cutoff roots crowd against the cladding index
    edge = lo + span * np.logspace(-11, math.log10(1.0 / n), 120)
    top = hi - span * np.logspace(-11, math.log10(1.0 / n), 40)
    return np.unique(np.concatenate([uniform, edge, top]))


def _roots_for_order(profile, wavelength, m):
    k0 = 2 * math.pi / wavelength
    radii, indices = profile.radii, profile.indices
    lo, hi = indices[-1], max(indices[:-1])
    if hi <= lo:
        return []

    def det(n):
        M, *_ = _matching_matrix(radii, indices, k0, m, k0 * n)
        return np.linalg.det(M)

    grid = _scan_grid(lo, hi, SCAN_POINTS)
    vals = np.array([det(n) for n in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            continue
        if np.sign(vals[i]) == np.sign(vals[i + 1]):
            continue
        n_root = optimize.brentq(det, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        res = abs(det(n_root))
        if res > RESIDUAL_ACCEPT:
            continue  # sign flip across a basis switch, not a zero
        if any(abs(n_root - n) < 1e-8 for n in indices):
            continue  # spurious zero where a region's transverse wavenumber vanishes
        roots.append((n_root, res))
    return roots


def _null_vector(M):
    _, _, vh = np.linalg.svd(M)
    return vh[-1]


def _build_mode(profile, wavelength, m, n_eff, residual):
    k0 = 2 * math.pi / wavelength
    beta = k0 * n_eff
    radii, indices = profile.radii, profile.indices
    M, norms, cols, regions = _matching_matrix(radii, indices, k0, m, beta)
    x = _null_vector(M)
    phys = x / norms
    coeffs = [[[0.0, 0.0] for _ in bases] for _, bases in regions]
    for c, (l, j, ab) in enumerate(cols):
        kappa2 = regions[l][0]
        coeffs[l][j][0 if ab == "a" else 1] = phys[c] * abs(kappa2)
    bases = tuple(tuple(b) for _, b in regions)
    coeffs_t = tuple(tuple((a, b) for a, b in reg) for reg in coeffs)
    proto = GuidedMode("?", m, 0, beta, n_eff, wavelength, "", radii, indices, coeffs_t, bases, 1.0, residual)

    # classify by transverse field content: HE ~ order m-1 dominant, EH ~ m+1
    a_energy = sum(abs(a) for reg in coeffs_t for a, _ in reg)
    b_energy = sum(abs(b) for reg in coeffs_t for _, b in reg)
    power, minus, plus = _radial_integrals(proto)
    if m == 0:
        family = "TE" if a_energy < 1e-9 * b_energy else "TM"
    else:
        family = "HE" if minus > plus else "EH"
    ang = 2 * math.pi if m == 0 else math.pi
    scale = 1.0 / math.sqrt(0.5 * ang * power * 1e-18)
    return family, proto, scale


def _radial_integrals(mode):
    """(integral of (B G - C F) r dr, order m-1 and m+1 transverse content).

    Uses the ``exp(i m phi)`` radial functions, Gauss-Legendre per region.
    """
    k0 = 2 * math.pi / mode.wavelength
    gamma = k0 * math.sqrt(max(mode.n_eff**2 - mode.indices[-1] ** 2, 1e-30))
    edges = (0.0,) + mode.radii
    segments = [(a, b, 96) for a, b in zip(edges[:-1], edges[1:])]
    outer = mode.radii[-1]
    # tail split into growing pieces; the integrand decays like exp(-2 gamma r)
    bounds = outer + np.array([0.0, 0.5, 2.0, 6.0, 15.0, 40.0]) / gamma
    segments += [(a, b, 64) for a, b in zip(bounds[:-1], bounds[1:])]
    power = minus = plus = 0.0
    for a, b, npts in segments:
        x, w = np.polynomial.legendre.leggauss(npts)
        r = 0.5 * (b - a) * x + 0.5 * (a + b)
        w = 0.5 * (b - a) * w
        A, B, C, D, F, G = mode.radial_amplitudes(r)
        power += np.sum(w * (B * G - C * F) * r)
        minus += np.sum(w * (B - C) ** 2 * r)
        plus += np.sum(w * (B + C) ** 2 * r)
    return power, minus, plus


def _solve(profile: LayeredCylinderProfile, wavelength: float, m_max: int) -> ModeSpectrum:
    found = []
    for m in range(m_max + 1):
        for n_eff, res in _roots_for_order(profile, wavelength, m):
            family, proto, scale = _build_mode(profile, wavelength, m, n_eff, res)
            found.append((family, m, n_eff, proto, scale, res))
    found.sort(key=lambda t: -t[2])
    counters: dict[tuple[str, int], int] = {}
    n_all = [f[2] for f in found]
    modes = []
    for family, m, n_eff, proto, scale, res in found:
        order = counters.get((family, m), 0) + 1
        counters[(family, m)] = order
        near = sum(abs(n_eff - other) < ROOT_SEPARATION for other in n_all) > 1
        parities = ("even", "odd") if m >= 1 else ("",)
        for par in parities:
            modes.append(
                GuidedMode(
                    family, m, order, proto.beta, n_eff, wavelength, par, proto.radii, proto.indices,
                    proto.coeffs, proto.bases, scale, res, near,
                )
            )
    return ModeSpectrum(profile, wavelength, tuple(modes))


def solve_two_layer(profile: LayeredCylinderProfile, wavelength: float, m_max: int = 3) -> ModeSpectrum:
    """All guided modes with ``m <= m_max`` of a solid step-index fiber."""
    if len(profile.layers) != 1:
        raise ValueError("two-layer solver needs a single-layer profile")
    return _solve(profile, wavelength, m_max)


def solve_three_layer(profile: LayeredCylinderProfile, wavelength: float, m_max: int = 3) -> ModeSpectrum:
    """All guided modes with ``m <= m_max`` of a core/annulus/cladding fiber."""
    if len(profile.layers) != 2:
        raise ValueError("three-layer solver needs a two-layer profile")
    return _solve(profile, wavelength, m_max)


def solve_modes(profile: LayeredCylinderProfile, wavelength: float, m_max: int = 3) -> ModeSpectrum:
    return _solve(profile, wavelength, m_max)
