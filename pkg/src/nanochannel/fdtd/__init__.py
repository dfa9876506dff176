"""Three-dimensional Yee FDTD with CPML, mirror planes and DFT monitors."""

from .grid import Boundaries, DivergedError, YeeGrid
from .materials import rasterize
from .source import InvalidSourceError, PointDipole, gaussian_pulse
from .stepper import step

__all__ = [
    "Boundaries",
    "DivergedError",
    "InvalidSourceError",
    "PointDipole",
    "YeeGrid",
    "gaussian_pulse",
    "rasterize",
    "step",
]
