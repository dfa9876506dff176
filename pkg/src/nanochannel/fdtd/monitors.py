"""Single-frequency DFT monitors on lattice planes and closed flux boxes.

A plane normal to ``axis`` stores the two tangential E components and the two
tangential H components. With (u, v, axis) right handed, Eu is paired with Hv
on the lattice (u half, v integer) and Ev with Hu on (u integer, v half). H is
averaged over the half planes either side of the E plane so that each pair is
collocated. Phasors follow the exp(-i omega t) convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..scene import Z0
from .grid import YeeGrid

TANGENTIAL = {0: (1, 2), 1: (2, 0), 2: (0, 1)}
E_NAMES = ("ex", "ey", "ez")
H_NAMES = ("hx", "hy", "hz")


def mirror_parity(component_axis: int, plane_axis: int, kind: str, magnetic: bool) -> int:
    """Sign picked up by a field component when reflected through a mirror plane."""
    normal = component_axis == plane_axis
    even = normal if kind == "pec" else not normal
    if magnetic:
        even = not even
    return 1 if even else -1


def _lattice_weights(n: int, half: bool, dx: float) -> np.ndarray:
    """Quadrature weights: midpoint on half lattices, trapezoid on nodes."""
    if half:
        return np.full(n, dx)
    w = np.full(n, dx)
    w[0] = w[-1] = 0.5 * dx
    return w


def _unfold(arr: np.ndarray, axis: int, half: bool, sign: int) -> np.ndarray:
    """Extend ``arr`` to negative coordinates by mirroring about index 0."""
    if half:
        mirrored = sign * np.flip(arr, axis=axis)
    else:
        mirrored = sign * np.flip(np.take(arr, np.arange(1, arr.shape[axis]), axis=axis), axis=axis)
    return np.concatenate([mirrored, arr], axis=axis)


@dataclass
class PlaneData:
    """Normalised tangential phasors on one plane (E in V/m, H in A/m).

    ``mirrored`` lists the tangential axes (0 for u, 1 for v) whose low edge
    is a mirror plane, with its kind; unfolding removes the entries.
    """

    axis: int
    position: float
    u_half: np.ndarray
    u_int: np.ndarray
    v_half: np.ndarray
    v_int: np.ndarray
    eu: np.ndarray
    hv: np.ndarray
    ev: np.ndarray
    hu: np.ndarray
    dx: float
    mirrored: dict = field(default_factory=dict)

    def unfold(self) -> "PlaneData":
        """Full-plane copy with mirror images filled in."""
        data = self
        ua, va = TANGENTIAL[self.axis]
        for t, kind in sorted(self.mirrored.items()):
            plane_axis = (ua, va)[t]
            ax = t
            eu = _unfold(data.eu, ax, t == 0, mirror_parity(ua, plane_axis, kind, False))
            hv = _unfold(data.hv, ax, t == 0, mirror_parity(va, plane_axis, kind, True))
            ev = _unfold(data.ev, ax, t == 1, mirror_parity(va, plane_axis, kind, False))
            hu = _unfold(data.hu, ax, t == 1, mirror_parity(ua, plane_axis, kind, True))
            if t == 0:
                u_half = np.concatenate([-data.u_half[::-1], data.u_half])
                u_int = np.concatenate([-data.u_int[:0:-1], data.u_int])
                data = replace(data, u_half=u_half, u_int=u_int, eu=eu, hv=hv, ev=ev, hu=hu)
            else:
                v_half = np.concatenate([-data.v_half[::-1], data.v_half])
                v_int = np.concatenate([-data.v_int[:0:-1], data.v_int])
                data = replace(data, v_half=v_half, v_int=v_int, eu=eu, hv=hv, ev=ev, hu=hu)
        return replace(data, mirrored={})

    def weights(self, images: bool = True):
        """Area weights (m^2) for the (Eu, Hv) and (Ev, Hu) lattices.

        With ``images`` the weights also count the mirror copies of the plane.
        """
        s = 1e-9
        wu_h = _lattice_weights(len(self.u_half), True, self.dx * s)
        wu_i = _lattice_weights(len(self.u_int), False, self.dx * s)
        wv_h = _lattice_weights(len(self.v_half), True, self.dx * s)
        wv_i = _lattice_weights(len(self.v_int), False, self.dx * s)
        scale = 2.0 ** len(self.mirrored) if images else 1.0
        return scale * np.outer(wu_h, wv_i), scale * np.outer(wu_i, wv_h)

    def flux(self, mask_a: np.ndarray | None = None, mask_b: np.ndarray | None = None, images: bool = True) -> float:
        """Time-averaged power through the plane along +axis (W)."""
        wa, wb = self.weights(images)
        sa = self.eu * np.conj(self.hv)
        sb = self.ev * np.conj(self.hu)
        if mask_a is not None:
            wa = wa * mask_a
            wb = wb * mask_b
        return float(0.5 * np.real(np.sum(wa * sa) - np.sum(wb * sb)))

    def aperture_flux(self, radius: float, center=(0.0, 0.0)) -> float:
        """Flux through the disk of ``radius`` nm around ``center`` in (u, v)."""
        if self.mirrored:
            return self.unfold().aperture_flux(radius, center)
        ua, ub = np.meshgrid(self.u_half - center[0], self.v_int - center[1], indexing="ij")
        va, vb = np.meshgrid(self.u_int - center[0], self.v_half - center[1], indexing="ij")
        mask_a = (np.hypot(ua, ub) <= radius).astype(float)
        mask_b = (np.hypot(va, vb) <= radius).astype(float)
        return self.flux(mask_a, mask_b)


class PlaneMonitor:
    """Accumulates the DFT of tangential fields on node plane ``index``.

    ``bounds`` gives inclusive integer-node ranges ``((u0, u1), (v0, v1))``.
    """

    def __init__(self, grid: YeeGrid, axis: int, index: int, bounds, name: str = ""):
        self.grid = grid
        self.axis = axis
        self.index = int(index)
        self.name = name
        (self.u0, self.u1), (self.v0, self.v1) = bounds
        ua, va = TANGENTIAL[axis]
        self.ua, self.va = ua, va
        nu_h, nu_i = self.u1 - self.u0, self.u1 - self.u0 + 1
        nv_h, nv_i = self.v1 - self.v0, self.v1 - self.v0 + 1
        self.acc = {
            "eu": np.zeros((nu_h, nv_i), complex),
            "hv": np.zeros((nu_h, nv_i), complex),
            "ev": np.zeros((nu_i, nv_h), complex),
            "hu": np.zeros((nu_i, nv_h), complex),
        }
        self._build_slices()

    def _sel(self, comp_axis_slices: dict) -> tuple:
        sel = [None, None, None]
        for a, s in comp_axis_slices.items():
            sel[a] = s
        return tuple(sel)

    def _build_slices(self):
        a, ua, va, p = self.axis, self.ua, self.va, self.index
        u_half = slice(self.u0, self.u1)
        u_int = slice(self.u0, self.u1 + 1)
        v_half = slice(self.v0, self.v1)
        v_int = slice(self.v0, self.v1 + 1)
        # H arrays carry a ghost layer along their two transverse axes
        u_half_g = slice(self.u0 + 1, self.u1 + 1)
        v_half_g = slice(self.v0 + 1, self.v1 + 1)
        self.s_eu = self._sel({a: p, ua: u_half, va: v_int})
        self.s_ev = self._sel({a: p, ua: u_int, va: v_half})
        self.s_hv = [self._sel({a: q, ua: u_half_g, va: v_int}) for q in (p, p + 1)]
        self.s_hu = [self._sel({a: q, ua: u_int, va: v_half_g}) for q in (p, p + 1)]
        f = self.grid.fields
        # slices come out in array-axis order; (u, v) = (z, x) needs a transpose
        self.flip = ua > va
        self.n_eu, self.n_ev = E_NAMES[ua], E_NAMES[va]
        self.n_hu, self.n_hv = H_NAMES[ua], H_NAMES[va]
        # sanity: shapes line up
        self.acc_t = {k: (v.T if self.flip else v) for k, v in self.acc.items()}
        assert f[self.n_eu][self.s_eu].shape == self.acc_t["eu"].shape
        assert f[self.n_hv][self.s_hv[0]].shape == self.acc_t["hv"].shape
        assert f[self.n_ev][self.s_ev].shape == self.acc_t["ev"].shape
        assert f[self.n_hu][self.s_hu[0]].shape == self.acc_t["hu"].shape

    def accumulate(self, phase_e: complex, phase_h: complex) -> None:
        f = self.grid.fields
        acc = self.acc_t  # views of self.acc in array-axis order
        acc["eu"] += f[self.n_eu][self.s_eu] * phase_e
        acc["ev"] += f[self.n_ev][self.s_ev] * phase_e
        hv = f[self.n_hv]
        hu = f[self.n_hu]
        acc["hv"] += (hv[self.s_hv[0]] + hv[self.s_hv[1]]) * (0.5 * phase_h)
        acc["hu"] += (hu[self.s_hu[0]] + hu[self.s_hu[1]]) * (0.5 * phase_h)

    def data(self, scale: complex) -> PlaneData:
        """Phasors multiplied by ``scale`` (dt and source normalisation)."""
        g = self.grid
        ua, va = self.ua, self.va
        mirrored = {}
        sym = g.symmetry_planes()
        for t, ax in enumerate((ua, va)):
            lo = (self.u0, self.v0)[t]
            name = "xyz"[ax]
            if name in sym and lo == 0:
                mirrored[t] = sym[name]
        cu_i = g.coords(ua, False)[self.u0 : self.u1 + 1]
        cu_h = g.coords(ua, True)[self.u0 : self.u1]
        cv_i = g.coords(va, False)[self.v0 : self.v1 + 1]
        cv_h = g.coords(va, True)[self.v0 : self.v1]
        return PlaneData(
            axis=self.axis,
            position=float(g.coords(self.axis, False)[self.index]),
            u_half=cu_h,
            u_int=cu_i,
            v_half=cv_h,
            v_int=cv_i,
            eu=self.acc["eu"] * scale,
            hv=self.acc["hv"] * scale / Z0,
            ev=self.acc["ev"] * scale,
            hu=self.acc["hu"] * scale / Z0,
            dx=g.dx,
            mirrored=mirrored,
        )


class PowerBox:
    """Closed box of plane monitors around a point; reports outgoing power.

    ``lo``/``hi`` are inclusive integer node indices per axis. A low face lying
    on a mirror plane is left out, since no power crosses a mirror.
    """

    def __init__(self, grid: YeeGrid, lo, hi):
        self.grid = grid
        self.lo, self.hi = tuple(int(v) for v in lo), tuple(int(v) for v in hi)
        sym = grid.symmetry_planes()
        self.faces: list[tuple[int, PlaneMonitor]] = []
        self.images = 2 ** sum(1 for a in range(3) if "xyz"[a] in sym and self.lo[a] == 0)
        for axis in range(3):
            ua, va = TANGENTIAL[axis]
            bounds = ((self.lo[ua], self.hi[ua]), (self.lo[va], self.hi[va]))
            if not ("xyz"[axis] in sym and self.lo[axis] == 0):
                self.faces.append((-1, PlaneMonitor(grid, axis, self.lo[axis], bounds, f"box{'xyz'[axis]}-")))
            self.faces.append((+1, PlaneMonitor(grid, axis, self.hi[axis], bounds, f"box{'xyz'[axis]}+")))

    @property
    def monitors(self) -> list[PlaneMonitor]:
        return [m for _, m in self.faces]

    def power(self, scale: complex) -> float:
        """Total outgoing power (W) including mirror images."""
        total = 0.0
        for sign, mon in self.faces:
            total += sign * mon.data(scale).flux(images=False)
        return self.images * total


def centre_phases(omega: float, dt: float, n: int) -> tuple[complex, complex]:
    """DFT kernels for E at (n+1) dt and H at (n+1/2) dt, times dt."""
    return (
        complex(math.cos(omega * (n + 1) * dt), math.sin(omega * (n + 1) * dt)) * dt,
        complex(math.cos(omega * (n + 0.5) * dt), math.sin(omega * (n + 0.5) * dt)) * dt,
    )
