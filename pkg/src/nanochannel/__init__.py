"""Dipole channeling efficiency into nanofibers and nanocapillary fibers."""

import os as _os

# The TBB layer warns on import when the runtime is older than numba wants;
# OpenMP is always shipped with numba wheels and is deterministic here.
_os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from .scene import (  # noqa: E402
    DipoleSource,
    GeometryError,
    LayeredCylinderProfile,
    Material,
    SimulationDomain,
    SourceError,
    make_ncf,
    make_onf,
    surface_source,
)

__version__ = "0.1.0"

__all__ = [
    "DipoleSource",
    "GeometryError",
    "LayeredCylinderProfile",
    "Material",
    "SimulationDomain",
    "SourceError",
    "make_ncf",
    "make_onf",
    "surface_source",
]
