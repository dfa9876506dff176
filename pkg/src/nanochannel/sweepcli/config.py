"""Run configuration files (YAML) and resolution tiers.

Example::

    schema_version: 1
    geometry: {kind: ncf, d_in_nm: 100, d_out_nm: 360, core: water, background: vacuum}
    source: {orientation: radial, r_in_nm: 0, wavelength_nm: 620}
    domain: {dx_nm: 10, extents_um: [3, 3, 9], pml_cells: 10}
    tier: accurate

For a solid fiber the dipole sits ``surface_gap_nm`` outside the surface
unless ``r_in_nm`` is given. Keys left out of ``domain`` come from the tier.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..scene import (
    DEFAULT_CONSTANTS,
    IndexConstants,
    DipoleSource,
    LayeredCylinderProfile,
    Material,
    SimulationDomain,
    make_ncf,
    make_onf,
)

SCHEMA_VERSION = 1
TIERS = ("fast", "accurate")
DEFAULT_SURFACE_GAP_NM = 10.0

# Fast: 20 nm cells in a reduced box. Accurate: the desk-scale box with the
# per-geometry cell size (10 nm for capillaries, 20 nm for solid fibers).
TIER_DOMAINS = {
    "fast": {"extents_um": [2.4, 2.4, 5.0], "monitor_z_um": [-2.0, 2.0], "dx_nm": {"onf": 20.0, "ncf": 20.0}},
    "accurate": {"extents_um": [3.0, 3.0, 9.0], "monitor_z_um": [-4.0, 4.0], "dx_nm": {"onf": 20.0, "ncf": 10.0}},
}

_ALLOWED = {
    "geometry": {"kind", "diameter_nm", "d_in_nm", "d_out_nm", "core", "background", "clad"},
    "source": {"orientation", "r_in_nm", "wavelength_nm", "azimuth_rad", "surface_gap_nm", "bandwidth"},
    "domain": {"dx_nm", "extents_um", "pml_cells", "monitor_z_um", "courant_factor", "symmetry", "total_steps"},
    "materials": {"silica", "water", "vacuum"},
    "sweep": {"parameter", "values", "start", "stop", "step"},
}
_TOP = {"schema_version", "tier", "output", "cross_check", "m_max", *_ALLOWED}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass
class RunConfig:
    """Fully resolved description of one channeling run."""

    geometry: dict
    source: dict = field(default_factory=dict)
    domain: dict = field(default_factory=dict)
    materials: dict = field(default_factory=dict)
    tier: str = "fast"
    m_max: int = 3

    def __post_init__(self):
        if self.tier not in TIERS:
            raise ConfigError(f"tier must be one of {TIERS}, got {self.tier!r}")
        kind = self.geometry.get("kind")
        if kind not in ("onf", "ncf"):
            raise ConfigError(f"geometry.kind must be 'onf' or 'ncf', got {kind!r}")

    @property
    def kind(self) -> str:
        return self.geometry["kind"]

    def constants(self) -> IndexConstants:
        base = DEFAULT_CONSTANTS
        m = self.materials
        return IndexConstants(
            silica=float(m.get("silica", base.silica)),
            water=float(m.get("water", base.water)),
            vacuum=float(m.get("vacuum", base.vacuum)),
        )

    def material(self, name: str) -> Material:
        c = self.constants()
        table = {"silica": c.silica, "water": c.water, "vacuum": c.vacuum}
        if name not in table:
            raise ConfigError(f"unknown material {name!r}; choose from {sorted(table)}")
        return Material(name, table[name])

    @property
    def medium(self) -> str:
        """The exchangeable medium: the cladding of a solid fiber, the core of a capillary."""
        g = self.geometry
        if self.kind == "onf":
            return g.get("background", g.get("clad", "vacuum"))
        return g.get("core", "water")

    def profile(self) -> LayeredCylinderProfile:
        g = self.geometry
        silica = self.material("silica")
        try:
            if self.kind == "onf":
                return make_onf(float(g["diameter_nm"]), self.material(self.medium), silica)
            return make_ncf(
                float(g["d_in_nm"]),
                float(g["d_out_nm"]),
                self.material(self.medium),
                self.material(g.get("background", "vacuum")),
                silica,
            )
        except KeyError as exc:
            raise ConfigError(f"geometry is missing {exc.args[0]!r}") from None

    def dipole(self) -> DipoleSource:
        s = self.source
        prof = self.profile()
        if "r_in_nm" in s:
            r_in = float(s["r_in_nm"])
        elif self.kind == "onf":
            r_in = prof.outer_radius + float(s.get("surface_gap_nm", DEFAULT_SURFACE_GAP_NM))
        else:
            r_in = 0.0
        return DipoleSource(
            r_in=r_in,
            orientation=s.get("orientation", "radial"),
            wavelength=float(s.get("wavelength_nm", 620.0)),
            azimuth=float(s.get("azimuth_rad", 0.0)),
            fractional_bandwidth=float(s.get("bandwidth", 0.1)),
        )

    def simulation_domain(self) -> SimulationDomain:
        preset = TIER_DOMAINS[self.tier]
        d = self.domain
        dx = float(d.get("dx_nm", preset["dx_nm"][self.kind]))
        extents = [1000.0 * float(e) for e in d.get("extents_um", preset["extents_um"])]
        monitors = [1000.0 * float(z) for z in d.get("monitor_z_um", preset["monitor_z_um"])]
        if len(extents) != 3:
            raise ConfigError("domain.extents_um needs three values")
        return SimulationDomain(
            extents=tuple(extents),
            dx=dx,
            pml_cells=int(d.get("pml_cells", 10)),
            courant_factor=float(d.get("courant_factor", 0.5)),
            monitor_z_offsets=tuple(monitors),
            total_steps=d.get("total_steps"),
            use_symmetry=bool(d.get("symmetry", True)),
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "geometry": self.geometry,
            "source": self.source,
            "domain": self.domain,
            "materials": self.materials,
            "tier": self.tier,
            "m_max": self.m_max,
        }

    def with_value(self, parameter: str, value) -> "RunConfig":
        """Copy with one swept parameter replaced."""
        cfg = copy.deepcopy(self)
        if parameter == "diameter":
            cfg.geometry["diameter_nm"] = float(value)
        elif parameter == "d_in":
            cfg.geometry["d_in_nm"] = float(value)
        elif parameter == "d_out":
            cfg.geometry["d_out_nm"] = float(value)
        elif parameter == "r_in":
            cfg.source["r_in_nm"] = float(value)
        elif parameter == "orientation":
            cfg.source["orientation"] = str(value)
        elif parameter == "medium":
            cfg.geometry["background" if cfg.kind == "onf" else "core"] = str(value)
        else:
            raise ConfigError(f"cannot sweep {parameter!r}")
        return cfg

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def build(self):
        """(profile, source, domain) with all validation applied."""
        prof = self.profile()
        src = self.dipole()
        src.check_inside(prof)
        return prof, src, self.simulation_domain()


def parse_config(data: dict, tier: str | None = None) -> tuple[RunConfig, dict]:
    """Validate a loaded mapping. Returns the run config and the raw sweep block."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    unknown = set(data) - _TOP
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    for section, allowed in _ALLOWED.items():
        block = data.get(section, {}) or {}
        if not isinstance(block, dict):
            raise ConfigError(f"{section} must be a mapping")
        extra = set(block) - allowed
        if extra:
            raise ConfigError(f"unknown keys in {section}: {sorted(extra)}")
    if "geometry" not in data:
        raise ConfigError("geometry section is required")
    cfg = RunConfig(
        geometry=dict(data["geometry"]),
        source=dict(data.get("source") or {}),
        domain=dict(data.get("domain") or {}),
        materials=dict(data.get("materials") or {}),
        tier=tier or data.get("tier", "fast"),
        m_max=int(data.get("m_max", 3)),
    )
    return cfg, dict(data.get("sweep") or {})


def load_config(path: str | Path, tier: str | None = None) -> tuple[RunConfig, dict]:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data, tier)
