"""Point-dipole current source with trilinear spreading onto the Yee lattice."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..scene import EPS0, DipoleSource, SourceError
from .grid import YeeGrid

# Envelope delay in units of the Gaussian width; the envelope is below 1e-8
# at t = 0 so the switch-on transient is negligible.
PULSE_DELAY_WIDTHS = 6.1

# half-integer offsets of each E component's lattice, (x, y, z)
E_OFFSETS = {"ex": (0.5, 0.0, 0.0), "ey": (0.0, 0.5, 0.0), "ez": (0.0, 0.0, 0.5)}


class InvalidSourceError(SourceError):
    """Dipole placed where the solver cannot represent it (PML, outside grid)."""


def gaussian_pulse(t, omega: float, sigma: float, amplitude: float = 1.0, delay: float | None = None):
    """Dipole moment p(t) = A exp(-(t-t0)^2 / 2 sigma^2) sin(omega (t-t0))."""
    t0 = PULSE_DELAY_WIDTHS * sigma if delay is None else delay
    tau = np.asarray(t, dtype=float) - t0
    return amplitude * np.exp(-0.5 * (tau / sigma) ** 2) * np.sin(omega * tau)


@dataclass
class PointDipole:
    """Current J = dp/dt spread over the eight nearest sites of each E lattice.

    Sites that fall behind a low-face mirror plane are dropped: the mirror
    supplies their image contribution. The moment is sampled at integer
    steps and the current at half steps, ``J^{n+1/2} = (p^{n+1} - p^n)/dt``.
    """

    source: DipoleSource
    grid: YeeGrid

    def __post_init__(self):
        g = self.grid
        pos = self.source.position
        for axis in range(3):
            lo, hi = g.interior_bounds(axis)
            if not lo <= pos[axis] <= hi:
                raise InvalidSourceError(
                    f"dipole coordinate {pos[axis]:.1f} nm along {'xyz'[axis]} is outside the "
                    f"non-absorbing region [{lo:.1f}, {hi:.1f}]"
                )
        dv = (g.dx * 1e-9) ** 3
        self.taps: list[tuple[str, tuple, np.ndarray]] = []
        direction = self.source.direction
        for c, name in enumerate(("ex", "ey", "ez")):
            if abs(direction[c]) < 1e-15:
                continue
            arr = g.fields[name]
            inv_eps = g.inv_eps[c]
            frac = [g.node_index(a, pos[a]) - E_OFFSETS[name][a] for a in range(3)]
            base = [math.floor(f) for f in frac]
            rem = [f - b for f, b in zip(frac, base)]
            idx, coef = [], []
            for corner in np.ndindex(2, 2, 2):
                w = 1.0
                node = []
                for a in range(3):
                    w *= rem[a] if corner[a] else 1.0 - rem[a]
                    node.append(base[a] + corner[a])
                if w < 1e-14:
                    continue
                if any(n < 0 or n >= arr.shape[a] for a, n in enumerate(node)):
                    continue
                i, j, k = node
                idx.append(node)
                coef.append(-w * direction[c] * inv_eps[i, j] / (EPS0 * dv))
            if idx:
                self.taps.append((name, tuple(np.array(idx).T), np.array(coef)))
        if not self.taps:
            raise InvalidSourceError("dipole does not touch any lattice site")
        omega = self.source.omega
        self.sigma = self.source.pulse_width
        self._omega = omega

    def moment(self, n) -> np.ndarray:
        """p at integer step(s) n (C m)."""
        t = np.asarray(n, dtype=float) * self.grid.dt
        return gaussian_pulse(t, self._omega, self.sigma, self.source.amplitude)

    @property
    def duration_steps(self) -> int:
        """Steps until the envelope has decayed on the far side."""
        return int(math.ceil(2 * PULSE_DELAY_WIDTHS * self.sigma / self.grid.dt))

    def inject(self, n: int) -> None:
        """Apply the current of the E update from step n to n+1."""
        dp = float(self.moment(n + 1) - self.moment(n))
        if dp == 0.0:
            return
        f = self.grid.fields
        for name, idx, coef in self.taps:
            f[name][idx] += coef * dp

    def spectrum(self, omega: float, steps: int) -> complex:
        """Discrete-time Fourier transform of p over the run, with exp(+i w t)."""
        n = np.arange(steps + 1)
        return complex(np.sum(self.moment(n) * np.exp(1j * omega * n * self.grid.dt)) * self.grid.dt)
