import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanochannel.scene import (
    N_SILICA,
    N_VACUUM,
    N_WATER,
    VACUUM,
    WATER,
    DipoleSource,
    GeometryError,
    Material,
    SimulationDomain,
    SourceError,
    make_ncf,
    make_onf,
    orientation_vector,
    surface_source,
)


def test_onf_vacuum_280():
    p = make_onf(280.0, VACUUM)
    assert len(p.layers) == 1
    assert p.radii == (140.0,)
    assert p.background.n == 1.0
    assert p.kind == "onf"


def test_onf_water_430():
    p = make_onf(430.0, WATER)
    assert p.radii == (215.0,)
    assert p.background.n == N_WATER


@pytest.mark.parametrize("d", [0.0, -5.0])
def test_onf_rejects_degenerate(d):
    with pytest.raises(GeometryError):
        make_onf(d)


def test_ncf_radii_and_indices():
    p = make_ncf(100.0, 360.0, WATER, VACUUM)
    assert p.radii == (50.0, 180.0)
    assert p.indices == (N_WATER, N_SILICA, N_VACUUM)
    assert make_ncf(250.0, 380.0).radii == (125.0, 190.0)


@pytest.mark.parametrize("d_in,d_out", [(360.0, 360.0), (400.0, 360.0), (0.0, 360.0)])
def test_ncf_rejects_bad_annulus(d_in, d_out):
    with pytest.raises(GeometryError):
        make_ncf(d_in, d_out)


def test_material_invariants():
    with pytest.raises(ValueError):
        Material("bad", 0.9)
    assert Material("x", 1.5).eps == pytest.approx(2.25)


@given(st.floats(min_value=1.0, max_value=5000.0))
def test_diameter_radius_round_trip(d):
    p = make_onf(d)
    assert p.diameters[0] == 2 * p.radii[0]
    assert p.radii[0] * 2 == d


@settings(max_examples=50)
@given(st.floats(min_value=50.0, max_value=2000.0), st.floats(min_value=0.0, max_value=3000.0))
def test_vanishing_core_matches_solid_fiber_pointwise(d_out, r):
    onf = make_onf(d_out, VACUUM)
    ncf = make_ncf(1e-9, d_out, WATER, VACUUM)
    if r > 1e-9:
        assert ncf.eps_at(r) == onf.eps_at(r)


@given(st.floats(min_value=-10.0, max_value=10.0))
def test_orientation_vectors_orthonormal(phi):
    basis = np.array([orientation_vector(o, phi) for o in ("radial", "azimuthal", "axial")])
    assert np.allclose(basis @ basis.T, np.eye(3), atol=1e-14)


def test_source_validation():
    with pytest.raises(SourceError):
        DipoleSource(orientation="diagonal")
    with pytest.raises(SourceError):
        DipoleSource(wavelength=0.0)
    with pytest.raises(SourceError):
        DipoleSource(r_in=-1.0)
    p = make_ncf(100.0, 360.0)
    DipoleSource(r_in=49.0).check_inside(p)
    DipoleSource(r_in=50.0).check_inside(p)
    with pytest.raises(SourceError):
        DipoleSource(r_in=50.5).check_inside(p)


def test_surface_source_position():
    p = make_onf(280.0)
    s = surface_source(p, "azimuthal", gap=10.0)
    assert s.r_in == 150.0
    assert np.allclose(s.direction, [0, 1, 0])


def test_pulse_bandwidth():
    s = DipoleSource()
    # power spectrum exp(-(dw sigma)^2) has FWHM 2 sqrt(ln 2)/sigma
    fwhm = 2 * math.sqrt(math.log(2)) / s.pulse_width
    assert fwhm / s.omega == pytest.approx(0.1)


def test_domain_validation():
    SimulationDomain()
    with pytest.raises(ValueError):
        SimulationDomain(courant_factor=0.6)
    with pytest.raises(ValueError):
        SimulationDomain(pml_cells=6)
    with pytest.raises(ValueError):
        SimulationDomain(monitor_z_offsets=(-5000.0, 4000.0))
    with pytest.raises(ValueError):
        SimulationDomain(dx=0.0)
    assert SimulationDomain(extents=(3000, 3000, 9000), dx=20).cells() == (150, 150, 450)
