"""Semi-analytic guided emission rates from the exact mode fields.

A point dipole ``p`` at ``r0`` launches each guided mode with amplitude
``i omega p . e_m*(r0) / 4`` (modes normalised to 1 W), so the power into one
mode and one direction is ``omega^2 |p . e_m*|^2 / 16``. Both directions and
both members of each degenerate pair are summed, and the result is divided by
the free-space dipole power ``omega^4 |p|^2 / (12 pi eps0 c^3)``.

The total emission rate is not computed here: combining the guided rate with
an FDTD Purcell factor gives an efficiency estimate that is independent of the
FDTD flux monitors and of the mode projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modesolver import GuidedMode, ModeSpectrum
from .scene import C0, EPS0, DipoleSource


@dataclass(frozen=True)
class GuidedRateEstimate:
    per_mode_rate: dict[str, float] = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.per_mode_rate.values()))

    def guided_fraction_given_total(self, total_rate: float) -> float:
        """Guided share of an externally supplied total rate (vacuum-normalised)."""
        return hybrid_eta(self, total_rate)


def guided_rate(mode: GuidedMode, source: DipoleSource) -> float:
    """Emission rate into ``mode`` (both directions) in units of the vacuum rate."""
    if not math.isclose(mode.wavelength, source.wavelength, rel_tol=1e-12):
        raise ValueError("mode and source wavelengths differ")
    x, y, _ = source.position
    e = mode.cartesian_fields(np.array([x]), np.array([y]))[:3, 0]
    overlap = abs(np.dot(source.direction, np.conj(e))) ** 2
    omega = source.omega
    guided = 2.0 * omega**2 * overlap / 16.0  # W per (C m)^2, two directions
    vacuum = omega**4 / (12.0 * math.pi * EPS0 * C0**3)
    return float(guided / vacuum)


def guided_rates(spectrum: ModeSpectrum, source: DipoleSource) -> GuidedRateEstimate:
    return GuidedRateEstimate({m.name: guided_rate(m, source) for m in spectrum.modes})


def hybrid_eta(rate: GuidedRateEstimate, purcell: float) -> float:
    """Channeling efficiency from analytic guided rates and an FDTD total rate."""
    if not purcell > 0:
        raise ValueError(f"Purcell factor must be positive, got {purcell}")
    return rate.total / purcell
