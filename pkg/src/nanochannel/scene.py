"""Materials, cylindrical waveguide geometry, dipole source and FDTD domain.

All lengths are in nanometres. Refractive indices are real constants at the
design wavelength (620 nm); every value here is overridable from the run
configuration and is echoed into result metadata.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

C0 = 299_792_458.0  # m/s
EPS0 = 8.8541878128e-12  # F/m
MU0 = 1.25663706212e-6  # H/m
Z0 = math.sqrt(MU0 / EPS0)

DESIGN_WAVELENGTH_NM = 620.0

N_SILICA = 1.4537
N_WATER = 1.3330
N_VACUUM = 1.0

ORIENTATIONS = ("radial", "azimuthal", "axial")


class GeometryError(ValueError):
    """Raised for degenerate or inconsistent waveguide geometry."""


class SourceError(ValueError):
    """Raised for an invalid dipole placement or orientation."""


@dataclass(frozen=True)
class Material:
    name: str
    n: float

    def __post_init__(self):
        n = self.n
        if isinstance(n, complex):
            if n.imag != 0:
                raise ValueError(f"material {self.name!r} must be lossless, got n={n}")
            object.__setattr__(self, "n", float(n.real))
        if not np.isfinite(self.n) or self.n < 1.0:
            raise ValueError(f"material {self.name!r}: refractive index must be >= 1, got {self.n}")

    @property
    def eps(self) -> float:
        return self.n * self.n


SILICA = Material("silica", N_SILICA)
WATER = Material("water", N_WATER)
VACUUM = Material("vacuum", N_VACUUM)

_NAMED = {"silica": SILICA, "water": WATER, "vacuum": VACUUM}


def material(name: str, overrides: dict | None = None) -> Material:
    """Look up a named material, honouring index overrides from a config."""
    key = name.lower()
    if overrides and key in overrides:
        return Material(key, float(overrides[key]))
    try:
        return _NAMED[key]
    except KeyError:
        raise ValueError(f"unknown material {name!r}; known: {sorted(_NAMED)}") from None


@dataclass(frozen=True)
class LayeredCylinderProfile:
    """Concentric step-index layers along z, innermost first.

    ``layers`` holds ``(outer_radius_nm, Material)`` pairs; the background
    material fills everything beyond the last radius.
    """

    layers: tuple[tuple[float, Material], ...]
    background: Material

    def __post_init__(self):
        layers = tuple((float(r), m) for r, m in self.layers)
        if not layers:
            raise GeometryError("profile needs at least one layer")
        radii = [r for r, _ in layers]
        if radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
            raise GeometryError(f"layer radii must be positive and strictly increasing, got {radii}")
        object.__setattr__(self, "layers", layers)

    @property
    def radii(self) -> tuple[float, ...]:
        return tuple(r for r, _ in self.layers)

    @property
    def diameters(self) -> tuple[float, ...]:
        return tuple(2.0 * r for r, _ in self.layers)

    @property
    def indices(self) -> tuple[float, ...]:
        """Indices from the innermost layer outwards, background last."""
        return tuple(m.n for _, m in self.layers) + (self.background.n,)

    @property
    def outer_radius(self) -> float:
        return self.layers[-1][0]

    @property
    def kind(self) -> str:
        return "onf" if len(self.layers) == 1 else "ncf"

    def index_at(self, r):
        """Refractive index at radial distance ``r`` (scalar or array).

        Points exactly on an interface belong to the inner layer.
        """
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, self.background.n)
        for radius, mat in reversed(self.layers):
            out = np.where(r <= radius, mat.n, out)
        return out if out.ndim else float(out)

    def eps_at(self, r):
        n = self.index_at(r)
        return n * n

    def to_dict(self) -> dict:
        return {
            "layers": [[r, m.name, m.n] for r, m in self.layers],
            "background": [self.background.name, self.background.n],
        }


def make_onf(diameter: float, clad: Material = VACUUM, silica: Material = SILICA) -> LayeredCylinderProfile:
    """Solid silica nanofiber of the given diameter in ``clad``."""
    if not diameter > 0:
        raise GeometryError(f"nanofiber diameter must be positive, got {diameter}")
    return LayeredCylinderProfile(((diameter / 2.0, silica),), clad)


def make_ncf(
    d_in: float,
    d_out: float,
    core: Material = WATER,
    background: Material = VACUUM,
    silica: Material = SILICA,
) -> LayeredCylinderProfile:
    """Nanocapillary fiber: ``core``-filled hole inside a silica annulus."""
    if not 0 < d_in < d_out:
        raise GeometryError(f"need 0 < d_in < d_out, got d_in={d_in}, d_out={d_out}")
    return LayeredCylinderProfile(((d_in / 2.0, core), (d_out / 2.0, silica)), background)


def orientation_vector(orientation: str, azimuth: float) -> np.ndarray:
    """Cartesian unit vector for a radial/azimuthal/axial dipole at ``azimuth``."""
    c, s = math.cos(azimuth), math.sin(azimuth)
    if orientation == "radial":
        return np.array([c, s, 0.0])
    if orientation == "azimuthal":
        return np.array([-s, c, 0.0])
    if orientation == "axial":
        return np.array([0.0, 0.0, 1.0])
    raise SourceError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")


@dataclass(frozen=True)
class DipoleSource:
    """Classical point dipole with a Gaussian-modulated temporal envelope.

    ``fractional_bandwidth`` is the FWHM of the emitted power spectrum
    divided by the centre frequency.
    """

    r_in: float = 0.0
    orientation: str = "radial"
    wavelength: float = DESIGN_WAVELENGTH_NM
    azimuth: float = 0.0
    z: float = 0.0
    fractional_bandwidth: float = 0.1
    amplitude: float = 1e-29  # C*m

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise SourceError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")
        if not self.wavelength > 0:
            raise SourceError(f"wavelength must be positive, got {self.wavelength}")
        if self.r_in < 0:
            raise SourceError(f"radial offset must be >= 0, got {self.r_in}")
        if not 0 < self.fractional_bandwidth < 1:
            raise SourceError("fractional bandwidth must lie in (0, 1)")

    @property
    def direction(self) -> np.ndarray:
        return orientation_vector(self.orientation, self.azimuth)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.r_in * math.cos(self.azimuth), self.r_in * math.sin(self.azimuth), self.z])

    @property
    def omega(self) -> float:
        """Angular frequency in rad/s."""
        return 2.0 * math.pi * C0 / (self.wavelength * 1e-9)

    @property
    def k0(self) -> float:
        """Vacuum wavenumber in rad/nm."""
        return 2.0 * math.pi / self.wavelength

    @property
    def pulse_width(self) -> float:
        """Gaussian envelope standard deviation in seconds."""
        return 2.0 * math.sqrt(math.log(2.0)) / (self.fractional_bandwidth * self.omega)

    def check_inside(self, profile: LayeredCylinderProfile) -> None:
        """For a capillary, the emitter must sit within the filled hole; the wall itself is allowed."""
        if profile.kind == "ncf" and not self.r_in <= profile.radii[0]:
            raise SourceError(
                f"dipole at r={self.r_in} nm is outside the capillary hole (radius {profile.radii[0]} nm)"
            )


def surface_source(profile: LayeredCylinderProfile, orientation: str, gap: float = 10.0, **kw) -> DipoleSource:
    """Dipole just outside the outer surface, ``gap`` nm into the cladding."""
    return DipoleSource(r_in=profile.outer_radius + gap, orientation=orientation, **kw)


@dataclass(frozen=True)
class SimulationDomain:
    """Uniform-grid FDTD box centred on the fiber axis and the dipole.

    ``extents`` are the physical sizes (nm) of the interior region, PML
    excluded. Monitor offsets are signed z distances from the dipole.
    """

    extents: tuple[float, float, float] = (3000.0, 3000.0, 9000.0)
    dx: float = 10.0
    pml_cells: int = 10
    courant_factor: float = 0.5
    monitor_z_offsets: tuple[float, ...] = (-4000.0, 4000.0)
    total_steps: int | None = None
    box_cells: int = 5
    use_symmetry: bool = True

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "monitor_z_offsets", tuple(float(z) for z in self.monitor_z_offsets))
        if not self.dx > 0:
            raise ValueError(f"cell size must be positive, got {self.dx}")
        if not 0 < self.courant_factor <= 1 / math.sqrt(3):
            raise ValueError(f"courant factor must lie in (0, 1/sqrt(3)], got {self.courant_factor}")
        if self.pml_cells < 8:
            raise ValueError(f"PML must be at least 8 cells thick, got {self.pml_cells}")
        half_z = self.extents[2] / 2.0
        for z in self.monitor_z_offsets:
            if not 0 < abs(z) < half_z:
                raise ValueError(f"monitor at z={z} nm must lie strictly between source and PML (|z| < {half_z})")

    @property
    def dt(self) -> float:
        """Time step in seconds."""
        return self.courant_factor * self.dx * 1e-9 / C0

    def cells(self) -> tuple[int, int, int]:
        """Interior cell counts, rounded up to even numbers."""
        return tuple(2 * math.ceil(e / (2 * self.dx)) for e in self.extents)

    def to_dict(self) -> dict:
        return asdict(self)


def scene_hash(*parts) -> str:
    """Stable content hash of JSON-serialisable scene descriptions."""
    blob = json.dumps([_plain(p) for p in parts], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    return obj


@dataclass(frozen=True)
class IndexConstants:
    silica: float = N_SILICA
    water: float = N_WATER
    vacuum: float = N_VACUUM

    def to_dict(self) -> dict:
        return {"n_silica": self.silica, "n_water": self.water, "n_vacuum": self.vacuum}


DEFAULT_CONSTANTS = IndexConstants()
