"""Channeling efficiency from FDTD runs: total power, guided power, normalisation.

The total power P comes from a closed box around the dipole. The guided power
is obtained by projecting the monitor-plane fields onto the exact guided modes,
which separates guided from radiated power a few microns from the source. The
vacuum power P0 comes from a matched vacuum run on the same lattice, cached on
disk by content hash.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import oracle
from .fdtd.monitors import PlaneData
from .fdtd.simulation import FDTDResult, Simulation, dump_fields
from .modesolver import GuidedMode, ModeSpectrum, solve_modes
from .scene import (
    C0,
    DEFAULT_CONSTANTS,
    EPS0,
    DipoleSource,
    IndexConstants,
    LayeredCylinderProfile,
    SimulationDomain,
    scene_hash,
)

log = logging.getLogger(__name__)

ESTIMATOR = "mode-projection"
# Projection planes must capture this share of every mode's power.
CAPTURE_REQUIRED = 0.99
# Aperture of the raw-flux estimator encloses this share of the HE11 power.
APERTURE_CAPTURE = 0.99
# Tolerated excess of guided over total power before flagging the run.
POWER_SLACK = 0.03
# Free-space margin around the power box in the vacuum reference run (nm).
REFERENCE_MARGIN = 620.0
CACHE_ENV = "NANOCHANNEL_CACHE_DIR"
CACHE_VERSION = 1


class TruncatedProjectionWarning(UserWarning):
    """Monitor plane too small to hold the mode field."""


class MissingReferenceError(ValueError):
    """A vacuum reference power is required but was not supplied."""


@dataclass
class EfficiencyResult:
    P: float
    P0: float
    Pc_forward: float
    Pc_backward: float
    eta: float
    purcell: float
    per_mode_power: dict[str, float] = field(default_factory=dict)
    eta_flux: float | None = None
    eta_hybrid: float | None = None
    runtime_s: float = 0.0
    metadata: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def Pc(self) -> float:
        return self.Pc_forward + self.Pc_backward

    def to_dict(self) -> dict:
        return asdict(self)


def analytic_dipole_power(source: DipoleSource) -> float:
    """Free-space power (W) of a dipole of the source amplitude at its frequency."""
    return source.omega**4 * source.amplitude**2 / (12.0 * math.pi * EPS0 * C0**3)


def purcell_factor(P: float, P0: float | None) -> float:
    if P0 is None:
        raise MissingReferenceError("no vacuum reference power; run vacuum_reference() first")
    if not P0 > 0:
        raise ValueError(f"vacuum reference power must be positive, got {P0}")
    return P / P0


def average_random_orientation(eta_r: float, eta_phi: float, eta_z: float) -> float:
    """Efficiency of an isotropically oriented dipole.

    The mean is taken over the shortest decimal form of each input and rounded
    once, so tabulated values such as (0.52, 0.52, 0.01) give exactly 0.35.
    """
    for v in (eta_r, eta_phi, eta_z):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"efficiencies must lie in [0, 1], got {v}")
    return float(sum(Fraction(repr(float(v))) for v in (eta_r, eta_phi, eta_z)) / 3)


# ---------------------------------------------------------------------------
# projection
# ---------------------------------------------------------------------------


def _mode_on_plane(mode: GuidedMode, plane: PlaneData):
    """Mode fields on the two collocation lattices of an unfolded z plane."""
    xa, ya = np.meshgrid(plane.u_half, plane.v_int, indexing="ij")
    xb, yb = np.meshgrid(plane.u_int, plane.v_half, indexing="ij")
    fa = mode.cartesian_fields(xa, ya)
    fb = mode.cartesian_fields(xb, yb)
    # (ex, hy) on lattice a, (ey, hx) on lattice b
    return fa[0], fa[4], fb[1], fb[3]


def mode_capture(mode: GuidedMode, plane: PlaneData) -> float:
    """Share of the mode's 1 W carried through the plane's area."""
    full = plane.unfold() if plane.mirrored else plane
    ex, hy, ey, hx = _mode_on_plane(mode, full)
    wa, wb = full.weights()
    return float(0.5 * np.real(np.sum(wa * ex * np.conj(hy)) - np.sum(wb * ey * np.conj(hx))))


def project_guided(plane: PlaneData, spectrum: ModeSpectrum, direction: int = +1) -> dict[str, float]:
    """Power (W) carried by each guided mode along ``direction`` (+1 or -1 in z).

    Uses the overlap ``|int (E x h* + e* x H) . z dA|^2 / (8 int Re(e x h*) . z dA)``
    with mode fields sampled on the monitor lattice. Backward modes share e_t
    with the forward ones and have h_t reversed.
    """
    if plane.axis != 2:
        raise ValueError("projection needs a plane normal to the fiber axis")
    full = plane.unfold() if plane.mirrored else plane
    wa, wb = full.weights()
    out = {}
    for mode in spectrum.modes:
        ex, hy, ey, hx = _mode_on_plane(mode, full)
        hy_d, hx_d = direction * hy, direction * hx
        norm = np.real(np.sum(wa * ex * np.conj(hy)) - np.sum(wb * ey * np.conj(hx)))
        if norm < CAPTURE_REQUIRED * 2.0 * mode.carried_power:
            warnings.warn(
                f"monitor plane holds only {norm / 2:.4f} of mode {mode.name}; projection is truncated",
                TruncatedProjectionWarning,
                stacklevel=2,
            )
        overlap = np.sum(wa * (full.eu * np.conj(hy_d) + np.conj(ex) * full.hv)) - np.sum(
            wb * (full.ev * np.conj(hx_d) + np.conj(ey) * full.hu)
        )
        out[mode.name] = float(abs(overlap) ** 2 / (8.0 * abs(norm)))
    return out


def aperture_radius(mode: GuidedMode, plane: PlaneData, capture: float = APERTURE_CAPTURE) -> tuple[float, float]:
    """Smallest lattice radius whose disk carries ``capture`` of the mode power.

    Returns (radius nm, captured share on the lattice).
    """
    full = plane.unfold() if plane.mirrored else plane
    ex, hy, ey, hx = _mode_on_plane(mode, full)
    wa, wb = full.weights()
    xa, ya = np.meshgrid(full.u_half, full.v_int, indexing="ij")
    xb, yb = np.meshgrid(full.u_int, full.v_half, indexing="ij")
    r = np.concatenate([np.hypot(xa, ya).ravel(), np.hypot(xb, yb).ravel()])
    s = np.concatenate([(0.5 * wa * np.real(ex * np.conj(hy))).ravel(), (-0.5 * wb * np.real(ey * np.conj(hx))).ravel()])
    order = np.argsort(r, kind="stable")
    cum = np.cumsum(s[order])
    total = mode.carried_power
    k = int(np.searchsorted(cum, capture * total))
    k = min(k, len(cum) - 1)
    radius = r[order][k]
    # points tied at this radius all fall inside the aperture disk
    return float(radius), float(np.sum(s[r <= radius]) / total)


# ---------------------------------------------------------------------------
# vacuum reference
# ---------------------------------------------------------------------------


def cache_dir() -> Path:
    root = os.environ.get(CACHE_ENV)
    path = Path(root) if root else Path.home() / ".cache" / "nanochannel"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _reference_setup(source: DipoleSource, domain: SimulationDomain):
    """Compact vacuum domain with the dipole at the same lattice offset.

    For the usual azimuth-0 placements the dipole is moved to within one cell
    of the axis, keeping its sub-cell offset so the lattice sees the same
    source. Other azimuths keep the true position and widen the box instead.
    """
    dx = domain.dx
    x, _, _ = source.position
    half = (domain.box_cells + 1) * dx + REFERENCE_MARGIN
    if source.azimuth == 0.0:
        ref_source = replace(source, r_in=x - dx * math.floor(x / dx), z=0.0)
    else:
        ref_source = replace(source, z=0.0)
        half += source.r_in
    side = 2 * dx * math.ceil(half / dx) + 2 * dx
    ref_domain = SimulationDomain(
        extents=(side, side, side),
        dx=dx,
        pml_cells=domain.pml_cells,
        courant_factor=domain.courant_factor,
        monitor_z_offsets=(side / 4,),
        box_cells=domain.box_cells,
        use_symmetry=domain.use_symmetry,
    )
    return ref_source, ref_domain


def vacuum_reference(source: DipoleSource, domain: SimulationDomain, use_cache: bool = True) -> dict:
    """Matched vacuum power P0 for this source on this lattice (cached)."""
    ref_source, ref_domain = _reference_setup(source, domain)
    key = scene_hash(
        {"v": CACHE_VERSION, "kind": "vacuum-reference"},
        ref_domain,
        {
            "orientation_vector": [round(float(c), 12) for c in ref_source.direction],
            "position": [round(float(c), 9) for c in ref_source.position],
            "wavelength": ref_source.wavelength,
            "bandwidth": ref_source.fractional_bandwidth,
            "amplitude": ref_source.amplitude,
        },
    )
    path = cache_dir() / f"p0-{key}.json"
    if use_cache and path.exists():
        try:
            data = json.loads(path.read_text())
            if data.get("key") == key:
                return data
        except (OSError, json.JSONDecodeError):
            log.warning("ignoring unreadable cache entry %s", path)
    sim = Simulation(ref_domain, ref_source, None, plane_z={})
    res = sim.run()
    data = {
        "key": key,
        "P0": res.box_power,
        "analytic_P0": analytic_dipole_power(ref_source),
        "steps": res.steps,
        "cells": res.cells,
        "runtime_s": res.elapsed,
        "domain": ref_domain.to_dict(),
    }
    # round-trip so fresh and cached entries compare equal
    data = json.loads(json.dumps(data))
    if use_cache:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".p0-", suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(data, fh, sort_keys=True, indent=1)
        os.replace(tmp, path)
    return data


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------


def default_domain(profile: LayeredCylinderProfile | None) -> SimulationDomain:
    """Desk-scale default: 10 nm cells for capillaries, 20 nm for solid fibers."""
    dx = 10.0 if profile is not None and profile.kind == "ncf" else 20.0
    return SimulationDomain(dx=dx)


def efficiency_from_fdtd(
    fd: FDTDResult,
    spectrum: ModeSpectrum,
    P0: float | None,
    forward: str,
    backward: str,
) -> EfficiencyResult:
    """Assemble an EfficiencyResult from monitor data."""
    notes = list(fd.warnings)
    fwd = project_guided(fd.planes[forward], spectrum, +1)
    bwd = project_guided(fd.planes[backward], spectrum, -1)
    P = fd.box_power
    pc_f, pc_b = float(sum(fwd.values())), float(sum(bwd.values()))
    per_mode = {name: fwd.get(name, 0.0) + bwd.get(name, 0.0) for name in spectrum.names()}
    eta = (pc_f + pc_b) / P
    if pc_f + pc_b > P * (1.0 + POWER_SLACK):
        notes.append(f"guided power exceeds total power by {(pc_f + pc_b) / P - 1:.3%}")
    eta_flux = None
    if spectrum.modes:
        he11 = spectrum.modes[0]
        r_ap, share = aperture_radius(he11, fd.planes[forward])
        flux = fd.planes[forward].aperture_flux(r_ap) - fd.planes[backward].aperture_flux(r_ap)
        eta_flux = flux / share / P
    return EfficiencyResult(
        P=P,
        P0=P0 if P0 is not None else float("nan"),
        Pc_forward=pc_f,
        Pc_backward=pc_b,
        eta=eta,
        purcell=purcell_factor(P, P0) if P0 is not None else float("nan"),
        per_mode_power=per_mode,
        eta_flux=eta_flux,
        warnings=notes,
    )


def run_channeling(
    profile: LayeredCylinderProfile,
    source: DipoleSource,
    domain: SimulationDomain | None = None,
    *,
    symmetry: bool | None = None,
    cross_check: bool = False,
    m_max: int = 3,
    constants: IndexConstants = DEFAULT_CONSTANTS,
    use_cache: bool = True,
    dump_path: str | os.PathLike | None = None,
    progress=None,
) -> EfficiencyResult:
    """Channeling efficiency of one dipole into the guided modes of ``profile``.

    eta counts both propagation directions: the guided power is the sum of the
    projections at the forward and backward monitor planes.
    """
    domain = domain or default_domain(profile)
    t0 = time.perf_counter()
    spectrum = solve_modes(profile, source.wavelength, m_max)
    zs = sorted(domain.monitor_z_offsets)
    if zs[0] >= 0 or zs[-1] <= 0:
        raise ValueError("need monitor planes on both sides of the dipole")
    planes = {"backward": zs[0], "forward": zs[-1]}
    sim = Simulation(domain, source, profile, plane_z=planes, symmetry=symmetry)
    fd = sim.run(progress=progress)
    if dump_path is not None:
        dump_fields(sim.grid, dump_path)
    ref = vacuum_reference(source, domain, use_cache=use_cache)
    res = efficiency_from_fdtd(fd, spectrum, ref["P0"], "forward", "backward")
    if cross_check:
        rates = oracle.guided_rates(spectrum, source)
        res.eta_hybrid = oracle.hybrid_eta(rates, res.purcell)
    res.runtime_s = time.perf_counter() - t0
    res.metadata = {
        "scene_hash": scene_hash(profile, source, domain, constants),
        "dx_nm": domain.dx,
        "domain": domain.to_dict(),
        "grid_shape": list(sim.grid.shape),
        "mirror_planes": fd.mirror_planes,
        "steps": fd.steps,
        "index_constants": constants.to_dict(),
        "estimator": ESTIMATOR,
        "eta_convention": "both directions",
        "modes": spectrum.names(),
        "stationarity_drift": fd.drift,
        "reference": {k: ref[k] for k in ("key", "P0", "analytic_P0", "steps")},
        "fdtd_runtime_s": fd.elapsed,
    }
    return res
