import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanochannel.modesolver import solve_modes
from nanochannel.oracle import GuidedRateEstimate, guided_rate, guided_rates, hybrid_eta
from nanochannel.scene import VACUUM, WATER, DipoleSource, Material, make_ncf, make_onf

LAMBDA = 620.0


@pytest.fixture(scope="module")
def ncf_spectrum():
    return solve_modes(make_ncf(100.0, 360.0, WATER, VACUUM), LAMBDA)


def test_axial_dipole_on_axis_barely_couples(ncf_spectrum):
    radial = guided_rates(ncf_spectrum, DipoleSource(orientation="radial")).total
    axial = guided_rates(ncf_spectrum, DipoleSource(orientation="axial")).total
    assert radial > 0
    assert axial < 1e-6 * radial


def test_radial_and_azimuthal_equal_on_axis(ncf_spectrum):
    radial = guided_rates(ncf_spectrum, DipoleSource(orientation="radial")).total
    azimuthal = guided_rates(ncf_spectrum, DipoleSource(orientation="azimuthal")).total
    assert azimuthal == pytest.approx(radial, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.0, max_value=2 * math.pi))
def test_on_axis_rate_invariant_under_azimuth(phi):
    spec = _cached_ncf()
    ref = guided_rates(spec, DipoleSource(orientation="radial")).total
    rot = guided_rates(spec, DipoleSource(orientation="radial", azimuth=phi)).total
    assert rot == pytest.approx(ref, rel=1e-10)


_NCF = {}


def _cached_ncf():
    if "s" not in _NCF:
        _NCF["s"] = solve_modes(make_ncf(100.0, 360.0, WATER, VACUUM), LAMBDA)
    return _NCF["s"]


def test_rate_decays_monotonically_outside_fiber():
    spec = solve_modes(make_onf(280.0, VACUUM), LAMBDA)
    radii = np.linspace(150.0, 420.0, 12)
    rates = [guided_rates(spec, DipoleSource(r_in=r, orientation="radial")).total for r in radii]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert rates[-1] < 0.1 * rates[0]


@settings(max_examples=10, deadline=None)
@given(st.floats(min_value=0.5, max_value=2.0))
def test_rate_is_scale_invariant(s):
    base = guided_rates(solve_modes(make_onf(280.0, VACUUM), LAMBDA), DipoleSource(r_in=150.0)).total
    spec = solve_modes(make_onf(280.0 * s, VACUUM), LAMBDA * s)
    scaled = guided_rates(spec, DipoleSource(r_in=150.0 * s, wavelength=LAMBDA * s)).total
    assert scaled == pytest.approx(base, rel=1e-8)


def test_rates_are_nonnegative_per_mode():
    spec = solve_modes(make_onf(600.0, VACUUM), LAMBDA)
    for orient in ("radial", "azimuthal", "axial"):
        est = guided_rates(spec, DipoleSource(r_in=310.0, orientation=orient))
        assert set(est.per_mode_rate) == set(spec.names())
        assert all(v >= 0 for v in est.per_mode_rate.values())


def test_wavelength_mismatch_rejected():
    mode = solve_modes(make_onf(280.0), LAMBDA).modes[0]
    with pytest.raises(ValueError):
        guided_rate(mode, DipoleSource(wavelength=600.0))


def test_hybrid_eta_consistency_limit():
    # when every emitted photon is guided, the total rate equals the guided rate
    est = GuidedRateEstimate({"HE11_even": 0.7, "HE11_odd": 0.5})
    assert hybrid_eta(est, est.total) == pytest.approx(1.0)
    assert est.guided_fraction_given_total(2.4) == pytest.approx(0.5)


@pytest.mark.parametrize("purcell", [0.0, -1.0, float("nan")])
def test_hybrid_eta_rejects_bad_purcell(purcell):
    with pytest.raises(ValueError):
        hybrid_eta(GuidedRateEstimate({"a": 1.0}), purcell)


def test_homogeneous_limit_rate_matches_weak_guidance():
    # a fiber barely denser than its surroundings carries a vanishing share
    # of the emission of a dipole placed far from it
    weak = make_onf(280.0, VACUUM, silica=Material("weak", 1.01))
    spec = solve_modes(weak, LAMBDA)
    assert guided_rates(spec, DipoleSource(r_in=2000.0)).total < 1e-3
