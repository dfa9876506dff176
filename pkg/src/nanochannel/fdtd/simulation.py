"""Scene-level FDTD driver: lattice setup, time loop and normalised outputs."""

from __future__ import annotations

import logging
import math
import struct
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..scene import C0, DipoleSource, LayeredCylinderProfile, SimulationDomain
from . import kernels
from .grid import Boundaries, DivergedError, YeeGrid
from .materials import rasterize
from .monitors import PlaneData, PlaneMonitor, PowerBox, centre_phases
from .source import PULSE_DELAY_WIDTHS, PointDipole
from .stepper import step

log = logging.getLogger(__name__)

# Abort once any field exceeds this multiple of the largest single-step
# source kick: a stable lossless run never gets near it.
DIVERGENCE_FACTOR = 1e12
# Stationarity: monitored powers may drift at most this fraction of the box
# power between the snapshot and the end of the run.
STATIONARITY_TOLERANCE = 1e-3
STATIONARITY_SNAPSHOT = 0.9
# Extra settling time after the pulse has crossed the domain, in envelope widths.
SETTLE_WIDTHS = 5.0
# Upper bound on the guided group index used for the transit estimate.
MAX_GROUP_INDEX = 1.7

DUMP_MAGIC = b"NCFD"
DUMP_VERSION = 1


class NotConvergedWarning(UserWarning):
    """The monitored powers were still changing when the step budget ran out."""


def mirror_planes(source: DipoleSource, allow: bool = True) -> dict[str, str]:
    """Mirror planes compatible with a dipole on the x axis of a centred fiber.

    The plane y = 0 always contains the axis and a dipole at azimuth 0; the
    plane x = 0 is usable only for a dipole on the axis itself.
    """
    if not allow or abs(source.azimuth) > 0.0:
        return {}
    planes = {}
    d = source.direction
    # E of an in-plane dipole is even across a plane containing it (PMC);
    # a dipole normal to the plane makes tangential E odd (PEC).
    planes["y"] = "pec" if abs(d[1]) > 0.5 else "pmc"
    if source.r_in == 0.0:
        planes["x"] = "pec" if abs(d[0]) > 0.5 else "pmc"
    return planes


def build_grid(
    domain: SimulationDomain,
    source: DipoleSource,
    profile: LayeredCylinderProfile | None,
    symmetry: bool | None = None,
) -> YeeGrid:
    """Yee grid covering ``domain`` around the fiber axis and the dipole."""
    use = domain.use_symmetry if symmetry is None else symmetry
    planes = mirror_planes(source, use)
    nx, ny, nz = domain.cells()
    p = domain.pml_cells
    dx = domain.dx
    kinds = {f: "pml" for f in ("x-", "x+", "y-", "y+", "z-", "z+")}
    shape, origin = [], []
    for ax, n in zip("xyz", (nx, ny, nz)):
        if ax in planes:
            kinds[f"{ax}-"] = planes[ax]
            shape.append(n // 2 + p)
            origin.append(0.0)
        else:
            shape.append(n + 2 * p)
            origin.append(-(n // 2 + p) * dx)
    origin[2] += source.z
    grid = YeeGrid(tuple(shape), dx, domain.courant_factor, tuple(origin), Boundaries(kinds, p), source.omega)
    rasterize(profile, grid)
    return grid


def default_steps(grid: YeeGrid, source: DipoleSource, domain: SimulationDomain) -> int:
    """Pulse duration plus domain transit plus a settling margin."""
    sigma = source.pulse_width
    half_z = 0.5 * domain.extents[2] * 1e-9
    half_t = 0.5 * math.hypot(domain.extents[0], domain.extents[1]) * 1e-9
    transit = (MAX_GROUP_INDEX * half_z + 1.5 * half_t) / C0
    t_end = 2 * PULSE_DELAY_WIDTHS * sigma + transit + SETTLE_WIDTHS * sigma
    return int(math.ceil(t_end / grid.dt))


@dataclass
class FDTDResult:
    """Normalised monitor data for a continuous-wave dipole of the source amplitude."""

    planes: dict[str, PlaneData]
    box_power: float
    steps: int
    dt: float
    cells: int
    elapsed: float
    mirror_planes: dict[str, str]
    drift: float = 0.0
    warnings: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.drift <= STATIONARITY_TOLERANCE


class Simulation:
    """Time loop for one dipole in one scene.

    ``plane_z`` maps monitor names to z offsets (nm) relative to the dipole.
    Plane monitors span the whole non-absorbing cross-section.
    """

    def __init__(
        self,
        domain: SimulationDomain,
        source: DipoleSource,
        profile: LayeredCylinderProfile | None,
        plane_z: dict[str, float] | None = None,
        symmetry: bool | None = None,
        steps: int | None = None,
        box_cells: int | None = None,
    ):
        self.domain = domain
        self.source = source
        self.profile = profile
        if profile is not None:
            source.check_inside(profile)
        self.grid = build_grid(domain, source, profile, symmetry)
        self.dipole = PointDipole(source, self.grid)
        g = self.grid
        self.steps = steps or domain.total_steps or default_steps(g, source, domain)
        self.planes: dict[str, PlaneMonitor] = {}
        if plane_z is None:
            plane_z = {f"z{z:+.0f}": z for z in domain.monitor_z_offsets}
        bx = self._interior_nodes(0)
        by = self._interior_nodes(1)
        for name, z in plane_z.items():
            k = int(round(g.node_index(2, source.z + z)))
            self.planes[name] = PlaneMonitor(g, 2, k, (bx, by), name)
        self.box = self._make_box(domain.box_cells if box_cells is None else box_cells)

    def _interior_nodes(self, axis: int) -> tuple[int, int]:
        ax = "xyz"[axis]
        b = self.grid.boundaries
        return b.npml(f"{ax}-"), self.grid.shape[axis] - b.npml(f"{ax}+")

    def _make_box(self, half: int) -> PowerBox:
        g = self.grid
        sym = g.symmetry_planes()
        lo, hi = [], []
        for a in range(3):
            c = g.node_index(a, self.source.position[a])
            l0, h0 = math.floor(c + 1e-9) - half, math.ceil(c - 1e-9) + half
            if "xyz"[a] in sym:
                l0 = max(l0, 0)
            i0, i1 = self._interior_nodes(a)
            if l0 < i0 or h0 > i1:
                raise ValueError("power box does not fit inside the non-absorbing region")
            lo.append(l0)
            hi.append(h0)
        return PowerBox(g, lo, hi)

    @property
    def monitors(self) -> list[PlaneMonitor]:
        return list(self.planes.values()) + self.box.monitors

    def normalisation(self) -> complex:
        """Factor turning accumulated DFT sums into fields of a CW dipole.

        The lattice current is a centred difference of p, whose transform
        differs from i omega p by sin(x)/x with x = omega dt / 2.
        """
        x = 0.5 * self.source.omega * self.grid.dt
        spec = self.dipole.spectrum(self.source.omega, self.steps) * (math.sin(x) / x)
        return self.source.amplitude / spec

    def _snapshot(self, scale: complex) -> np.ndarray:
        vals = [self.box.power(scale)]
        vals += [m.data(scale).flux() for m in self.planes.values()]
        return np.array(vals)

    def run(self, progress=None) -> FDTDResult:
        g = self.grid
        omega = self.source.omega
        dt = g.dt
        kick = max(float(np.max(np.abs(c))) for _, _, c in self.dipole.taps)
        limit = DIVERGENCE_FACTOR * kick * self.source.amplitude * omega * dt
        monitors = self.monitors
        snap_step = int(STATIONARITY_SNAPSHOT * self.steps)
        snap = None
        scale = self.normalisation()
        t_start = time.perf_counter()
        for n in range(self.steps):
            step(g, self.dipole)
            pe, ph = centre_phases(omega, dt, n)
            for m in monitors:
                m.accumulate(pe, ph)
            if n % 200 == 199 or n == self.steps - 1:
                worst = max(kernels.max_abs(g.fields[k]) for k in ("ex", "ey", "ez"))
                if not worst < limit:
                    raise DivergedError(f"field magnitude {worst:.3e} exceeded {limit:.3e} at step {n + 1}")
                if progress is not None:
                    progress(n + 1, self.steps)
            if n + 1 == snap_step:
                snap = self._snapshot(scale)
        elapsed = time.perf_counter() - t_start
        final = self._snapshot(scale)
        box_power = float(final[0])
        drift = 0.0
        messages = []
        if snap is not None and box_power > 0:
            drift = float(np.max(np.abs(final - snap)) / abs(box_power))
        if drift > STATIONARITY_TOLERANCE:
            msg = f"not converged: monitored power drifted by {drift:.2e} of the total over the last 10% of steps"
            warnings.warn(msg, NotConvergedWarning, stacklevel=2)
            messages.append(msg)
        planes = {name: m.data(scale) for name, m in self.planes.items()}
        log.info("fdtd run: %d steps, %d cells, %.1f s", self.steps, g.cell_count, elapsed)
        return FDTDResult(
            planes=planes,
            box_power=box_power,
            steps=self.steps,
            dt=dt,
            cells=g.cell_count,
            elapsed=elapsed,
            mirror_planes=g.symmetry_planes(),
            drift=drift,
            warnings=messages,
        )

    def run_steps(self, count: int) -> None:
        """Advance without monitors (used for snapshots and kernel tests)."""
        for _ in range(count):
            step(self.grid, self.dipole)


def dump_fields(grid: YeeGrid, path, components=("ex", "ey", "ez")) -> None:
    """Write raw field snapshots.

    Layout (little endian): magic ``NCFD``, u32 version, u32 component count,
    f64 dx (nm), f64 time (s), then per component an 8-byte ASCII-padded name,
    three u32 dimensions and the float32 values in C order.
    """
    with open(path, "wb") as fh:
        fh.write(DUMP_MAGIC)
        fh.write(struct.pack("<IIdd", DUMP_VERSION, len(components), grid.dx, grid.step_count * grid.dt))
        for name in components:
            arr = np.ascontiguousarray(grid.fields[name], dtype="<f4")
            fh.write(name.encode().ljust(8, b"\0"))
            fh.write(struct.pack("<III", *arr.shape))
            fh.write(arr.tobytes())


def load_fields(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a file written by :func:`dump_fields`."""
    with open(path, "rb") as fh:
        if fh.read(4) != DUMP_MAGIC:
            raise ValueError("not a field dump")
        version, count, dx, t = struct.unpack("<IIdd", fh.read(24))
        out = {}
        for _ in range(count):
            name = fh.read(8).rstrip(b"\0").decode()
            shape = struct.unpack("<III", fh.read(12))
            n = int(np.prod(shape))
            out[name] = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(shape)
    return {"version": version, "dx": dx, "time": t}, out
