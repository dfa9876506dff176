"""Yee lattice container, boundary faces and CPML coefficient profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..scene import C0

FACES = ("x-", "x+", "y-", "y+", "z-", "z+")

# CPML defaults: cubic grading, kappa_max 5, CFS shift at a tenth of the
# design frequency. Normalised sigma_max uses the usual optimum 0.8 (m+1).
PML_ORDER = 3
PML_KAPPA_MAX = 5.0
PML_SIGMA_SCALE = 1.0
PML_ALPHA_FRACTION = 0.1


class DivergedError(RuntimeError):
    """Raised when the field amplitude blows up during time stepping."""


@dataclass
class Boundaries:
    """Per-face boundary kind: 'pml' (CPML backed by PEC), 'pec' or 'pmc'."""

    kinds: dict[str, str] = field(default_factory=lambda: {f: "pml" for f in FACES})
    pml_cells: int = 10

    def __post_init__(self):
        for f, kind in self.kinds.items():
            if f not in FACES or kind not in ("pml", "pec", "pmc"):
                raise ValueError(f"bad boundary {f}={kind}")

    def kind(self, face: str) -> str:
        return self.kinds[face]

    def npml(self, face: str) -> int:
        return self.pml_cells if self.kinds[face] == "pml" else 0


@dataclass
class AxisPML:
    """1/kappa arrays for E- and H-positions plus slab psi coefficients."""

    kinv_e: np.ndarray
    kinv_h: np.ndarray
    idx_e: np.ndarray
    b_e: np.ndarray
    a_e: np.ndarray
    idx_h: np.ndarray
    b_h: np.ndarray
    a_h: np.ndarray


def _grading(depth, s_courant, omega_dt):
    """sigma*dt/eps0, kappa and alpha*dt/eps0 at normalised depth in [0, 1]."""
    sigma_max = PML_SIGMA_SCALE * 0.8 * (PML_ORDER + 1) * s_courant
    sigma = sigma_max * depth**PML_ORDER
    kappa = 1.0 + (PML_KAPPA_MAX - 1.0) * depth**PML_ORDER
    alpha = PML_ALPHA_FRACTION * omega_dt * (1.0 - depth)
    return sigma, kappa, alpha


def _coefficients(sigma, kappa, alpha):
    b = np.exp(-(sigma / kappa + alpha))
    denom = sigma * kappa + kappa * kappa * alpha
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(denom > 0, sigma / denom * (b - 1.0), 0.0)
    return b, a


def axis_pml(n_cells: int, lo: int, hi: int, s_courant: float, omega_dt: float) -> AxisPML:
    """CPML data for one axis with ``lo``/``hi`` absorbing cells at each end.

    E-derivatives along the axis sit on integer nodes 0..n, H-derivatives on
    half nodes 0.5..n-0.5.
    """
    pos_e = np.arange(n_cells + 1, dtype=float)
    pos_h = np.arange(n_cells, dtype=float) + 0.5

    def depth(p):
        d = np.zeros_like(p)
        if lo:
            d = np.where(p < lo, (lo - p) / lo, d)
        if hi:
            d = np.where(p > n_cells - hi, (p - (n_cells - hi)) / hi, d)
        return np.clip(d, 0.0, 1.0)

    de, dh = depth(pos_e), depth(pos_h)
    se, ke, ae = _grading(de, s_courant, omega_dt)
    sh, kh, ah = _grading(dh, s_courant, omega_dt)
    be, ce = _coefficients(se, ke, ae)
    bh, ch = _coefficients(sh, kh, ah)
    ie = np.nonzero(de > 0)[0].astype(np.int64)
    ih = np.nonzero(dh > 0)[0].astype(np.int64)
    return AxisPML(1.0 / ke, 1.0 / kh, ie, be[ie], ce[ie], ih, bh[ih], ch[ih])


@dataclass
class YeeGrid:
    """Staggered E/H arrays on ``(nx, ny, nz)`` cells of size ``dx`` nm.

    ``origin`` is the physical position (nm) of node (0, 0, 0). Permittivity
    maps are stored per E component in the xy-plane because every scene here
    is translation invariant along z.
    """

    shape: tuple[int, int, int]
    dx: float
    courant: float
    origin: tuple[float, float, float]
    boundaries: Boundaries
    omega: float
    inv_eps: tuple[np.ndarray, np.ndarray, np.ndarray] = field(init=False, repr=False)
    fields: dict = field(init=False, repr=False)
    pml: tuple = field(init=False, repr=False)
    psi: dict = field(init=False, repr=False)
    step_count: int = field(init=False, default=0)

    def __post_init__(self):
        nx, ny, nz = self.shape
        self.inv_eps = (
            np.ones((nx, ny + 1)),
            np.ones((nx + 1, ny)),
            np.ones((nx + 1, ny + 1)),
        )
        self.fields = {
            "ex": np.zeros((nx, ny + 1, nz + 1)),
            "ey": np.zeros((nx + 1, ny, nz + 1)),
            "ez": np.zeros((nx + 1, ny + 1, nz)),
            "hx": np.zeros((nx + 1, ny + 2, nz + 2)),
            "hy": np.zeros((nx + 2, ny + 1, nz + 2)),
            "hz": np.zeros((nx + 2, ny + 2, nz + 1)),
        }
        omega_dt = self.omega * self.dt
        b = self.boundaries
        self.pml = tuple(
            axis_pml(n, b.npml(f"{ax}-"), b.npml(f"{ax}+"), self.courant, omega_dt)
            for ax, n in zip("xyz", self.shape)
        )
        px, py, pz = self.pml
        self.psi = {
            "eyx": np.zeros((len(px.idx_e), ny + 1, nz + 1)),
            "ezx": np.zeros((len(px.idx_e), ny + 1, nz + 1)),
            "hyx": np.zeros((len(px.idx_h), ny + 1, nz + 1)),
            "hzx": np.zeros((len(px.idx_h), ny + 1, nz + 1)),
            "exy": np.zeros((nx + 1, len(py.idx_e), nz + 1)),
            "ezy": np.zeros((nx + 1, len(py.idx_e), nz + 1)),
            "hxy": np.zeros((nx + 1, len(py.idx_h), nz + 1)),
            "hzy": np.zeros((nx + 1, len(py.idx_h), nz + 1)),
            "exz": np.zeros((nx + 1, ny + 1, len(pz.idx_e))),
            "eyz": np.zeros((nx + 1, ny + 1, len(pz.idx_e))),
            "hxz": np.zeros((nx + 1, ny + 1, len(pz.idx_h))),
            "hyz": np.zeros((nx + 1, ny + 1, len(pz.idx_h))),
        }

    @property
    def dt(self) -> float:
        return self.courant * self.dx * 1e-9 / C0

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.shape))

    def coords(self, axis: int, half: bool) -> np.ndarray:
        """Physical node (or half-node) coordinates along ``axis`` in nm."""
        n = self.shape[axis]
        idx = np.arange(n) + 0.5 if half else np.arange(n + 1, dtype=float)
        return self.origin[axis] + idx * self.dx

    def interior_bounds(self, axis: int) -> tuple[float, float]:
        """Physical extent of the non-absorbing region along ``axis``."""
        ax = "xyz"[axis]
        lo = self.boundaries.npml(f"{ax}-")
        hi = self.shape[axis] - self.boundaries.npml(f"{ax}+")
        return self.origin[axis] + lo * self.dx, self.origin[axis] + hi * self.dx

    def node_index(self, axis: int, coord: float) -> float:
        """Fractional integer-node index of a physical coordinate."""
        return (coord - self.origin[axis]) / self.dx

    def symmetry_planes(self) -> dict[str, str]:
        """Low faces configured as mirror planes ('pec'/'pmc'), keyed by axis."""
        out = {}
        for ax in "xyz":
            kind = self.boundaries.kind(f"{ax}-")
            if kind in ("pec", "pmc"):
                out[ax] = kind
        return out

    def memory_bytes(self) -> int:
        arrays = list(self.fields.values()) + list(self.psi.values()) + list(self.inv_eps)
        return int(sum(a.nbytes for a in arrays))
