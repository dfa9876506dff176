import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nanochannel.channeling import analytic_dipole_power
from nanochannel.fdtd import Boundaries, InvalidSourceError, PointDipole, YeeGrid, rasterize, step
from nanochannel.fdtd.materials import disk_rect_area, eps_maps
from nanochannel.fdtd.monitors import PowerBox, centre_phases
from nanochannel.fdtd.simulation import Simulation, build_grid, dump_fields, load_fields
from nanochannel.scene import (
    N_SILICA,
    N_WATER,
    VACUUM,
    WATER,
    DipoleSource,
    GeometryError,
    SimulationDomain,
    make_ncf,
    make_onf,
)

OMEGA = DipoleSource().omega
ALL_PEC = {f: "pec" for f in ("x-", "x+", "y-", "y+", "z-", "z+")}


def pec_box(shape, dx=20.0, courant=0.5):
    return YeeGrid(shape, dx, courant, (0.0, 0.0, 0.0), Boundaries(dict(ALL_PEC), 10), OMEGA)


def small_domain(**kw):
    base = dict(extents=(800.0, 800.0, 800.0), dx=20.0, monitor_z_offsets=(-300.0, 300.0), box_cells=5)
    base.update(kw)
    return SimulationDomain(**base)


# --- lattice kernels ---------------------------------------------------------


def test_zero_fields_stay_zero():
    g = pec_box((8, 9, 10))
    for _ in range(20):
        step(g)
    assert all(not np.any(a) for a in g.fields.values())


@pytest.mark.parametrize("shape,m,n", [((24, 24, 2), 1, 1), ((30, 17, 2), 3, 2), ((16, 40, 2), 5, 7)])
def test_cavity_mode_follows_yee_dispersion(shape, m, n):
    # A TM_mn cavity mode sampled on the Ez lattice is an exact eigenvector of
    # the discrete curl-curl operator, so the recorded time series obeys
    # E^{n+1} + E^{n-1} = 2 cos(w dt) E^n with the closed-form Yee frequency.
    g = pec_box(shape)
    nx, ny, _ = shape
    i = np.arange(nx + 1)[:, None, None]
    j = np.arange(ny + 1)[None, :, None]
    g.fields["ez"][:] = np.sin(m * math.pi * i / nx) * np.sin(n * math.pi * j / ny)
    probe = np.unravel_index(np.argmax(np.abs(g.fields["ez"])), g.fields["ez"].shape)
    series = []
    for _ in range(400):
        step(g)
        series.append(g.fields["ez"][probe])
    e = np.array(series)
    s = g.courant
    sin_half = s * math.sqrt(math.sin(m * math.pi / (2 * nx)) ** 2 + math.sin(n * math.pi / (2 * ny)) ** 2)
    two_cos = 2 * math.cos(2 * math.asin(sin_half))
    mid = np.abs(e[1:-1]) > 0.1 * np.max(np.abs(e))
    measured = (e[2:] + e[:-2])[mid] / e[1:-1][mid]
    assert np.max(np.abs(measured - two_cos)) < 1e-10


def test_cpml_reflection_below_1e6():
    # probe the field near the absorber and compare with a run in a domain twice
    # as large, in which no reflection can return within the time window
    src = DipoleSource(orientation="axial")

    def trace(extent, steps):
        dom = SimulationDomain(extents=(extent,) * 3, dx=20.0, monitor_z_offsets=(-100.0, 100.0), box_cells=2)
        sim = Simulation(dom, src, None, symmetry=False, steps=steps, plane_z={})
        g = sim.grid
        k = [int(round(g.node_index(a, 0.0))) for a in range(3)]
        probe = (k[0] + 12, k[1], k[2])
        out = []
        for _ in range(steps):
            step(g, sim.dipole)
            out.append(g.fields["ez"][probe])
        return np.array(out)

    steps = 1400
    small = trace(640.0, steps)
    big = trace(1280.0 + 400.0, steps)
    reflected = np.sum((small - big) ** 2)
    incident = np.sum(big**2)
    assert reflected / incident < 1e-6


def test_long_run_stays_finite():
    sim = Simulation(small_domain(), DipoleSource(), None)
    sim.run_steps(2 * sim.steps)
    assert all(np.all(np.isfinite(a)) for a in sim.grid.fields.values())


# --- materials ---------------------------------------------------------------


def test_vacuum_rasterizes_to_one():
    g = build_grid(small_domain(), DipoleSource(), None)
    assert all(np.all(e == 1.0) for e in eps_maps(g))


def test_deep_interior_is_bulk_silica():
    g = build_grid(small_domain(), DipoleSource(), make_onf(280.0, VACUUM), symmetry=False)
    ez = eps_maps(g)[2]
    i = int(round(g.node_index(0, 0.0)))
    j = int(round(g.node_index(1, 0.0)))
    assert ez[i, j] == N_SILICA**2
    assert eps_maps(g)[0][0, 0] == 1.0


def _subsampled_eps(profile, x, y, dx, n=200):
    # the profile is z invariant, so in-plane midpoint samples suffice; ten
    # per axis misses the sliver of cells whose edge is tangent to a circle
    s = (np.arange(n) + 0.5) / n - 0.5
    X, Y = np.meshgrid(x + s * dx, y + s * dx, indexing="ij")
    return float(np.mean(profile.eps_at(np.hypot(X, Y))))


def test_straddling_cells_match_subsampling_oracle():
    prof = make_ncf(100.0, 360.0, WATER, VACUUM)
    g = build_grid(small_domain(), DipoleSource(), prof, symmetry=False)
    eps = eps_maps(g)[2]
    xs, ys = g.coords(0, False), g.coords(1, False)
    checked = 0
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            near = math.hypot(max(abs(x) - 10, 0), max(abs(y) - 10, 0))
            far = math.hypot(abs(x) + 10, abs(y) + 10)
            if near < 50.0 < far:
                assert N_WATER**2 < eps[i, j] < N_SILICA**2
                assert eps[i, j] == pytest.approx(_subsampled_eps(prof, x, y, 20.0), abs=1e-3)
                checked += 1
    assert checked > 8


@settings(max_examples=200, deadline=None)
@given(
    st.floats(1.0, 200.0),
    st.floats(-250.0, 250.0),
    st.floats(-250.0, 250.0),
    st.floats(1.0, 100.0),
    st.floats(1.0, 100.0),
)
def test_disk_rect_area_bounded_and_additive(R, x0, y0, w, h):
    a = disk_rect_area(R, x0, x0 + w, y0, y0 + h)
    assert -1e-9 <= a <= min(w * h, math.pi * R * R) + 1e-9
    left = disk_rect_area(R, x0, x0 + w / 2, y0, y0 + h)
    right = disk_rect_area(R, x0 + w / 2, x0 + w, y0, y0 + h)
    assert left + right == pytest.approx(a, abs=1e-7 * R * R)


@pytest.mark.parametrize("edge", ["top", "bottom", "left", "right"])
def test_disk_rect_area_with_edge_tangent_to_circle(edge):
    # the circle touches the cell edge at one point and cuts the opposite one
    rect = {"top": (-10, 10, 30, 50), "bottom": (-10, 10, -50, -30), "left": (-50, -30, -10, 10), "right": (30, 50, -10, 10)}
    x0, x1, y0, y1 = rect[edge]
    n = 2000
    s = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(x0 + s * (x1 - x0), y0 + s * (y1 - y0))
    sampled = np.mean(X**2 + Y**2 <= 2500.0) * 400.0
    assert disk_rect_area(50.0, x0, x1, y0, y1) == pytest.approx(sampled, abs=0.05)


def test_disk_rect_area_whole_disk():
    assert disk_rect_area(7.0, -10, 10, -10, 10) == pytest.approx(math.pi * 49)


def test_profile_larger_than_domain_rejected():
    with pytest.raises(GeometryError):
        build_grid(small_domain(), DipoleSource(), make_onf(900.0))


# --- source ------------------------------------------------------------------


def _tap_components(source, symmetry=False):
    g = build_grid(small_domain(), source, None, symmetry)
    return {name for name, _, _ in PointDipole(source, g).taps}


def test_axial_dipole_drives_only_ez():
    assert _tap_components(DipoleSource(orientation="axial")) == {"ez"}


def test_radial_dipole_at_zero_azimuth_drives_only_ex():
    assert _tap_components(DipoleSource(r_in=30.0)) == {"ex"}


def test_dipole_in_pml_rejected():
    src = DipoleSource(r_in=450.0)
    g = build_grid(small_domain(), src, None, symmetry=False)
    with pytest.raises(InvalidSourceError):
        PointDipole(src, g)


# --- monitors and energy -----------------------------------------------------


@pytest.fixture(scope="module")
def vacuum_run():
    sim = Simulation(small_domain(), DipoleSource(r_in=7.0, z=3.0), None, symmetry=False)
    inner = sim.box
    outer = PowerBox(sim.grid, [v - 8 for v in inner.lo], [v + 8 for v in inner.hi])
    extra = {}
    for f in (0.95, 1.05):
        extra[f] = PowerBox(sim.grid, inner.lo, inner.hi)
    g = sim.grid
    omega, dt = sim.source.omega, g.dt
    scale = sim.normalisation()
    monitors = sim.monitors + outer.monitors
    for n in range(sim.steps):
        step(g, sim.dipole)
        pe, ph = centre_phases(omega, dt, n)
        for m in monitors:
            m.accumulate(pe, ph)
        for f, box in extra.items():
            pe2, ph2 = centre_phases(f * omega, dt, n)
            for m in box.monitors:
                m.accumulate(pe2, ph2)
    x = lambda w: 0.5 * w * dt  # noqa: E731
    side = {}
    for f, box in extra.items():
        w = f * omega
        s = sim.source.amplitude / (sim.dipole.spectrum(w, sim.steps) * math.sin(x(w)) / x(w))
        side[f] = box.power(s)
    return sim, inner.power(scale), outer.power(scale), side


def test_vacuum_dipole_power_matches_analytic(vacuum_run):
    sim, inner, _, _ = vacuum_run
    assert inner / analytic_dipole_power(sim.source) == pytest.approx(1.0, abs=0.02)


def test_nested_boxes_agree(vacuum_run):
    _, inner, outer, _ = vacuum_run
    assert outer == pytest.approx(inner, rel=0.01)


def test_radiated_spectrum_follows_omega_to_the_fourth(vacuum_run):
    sim, inner, _, side = vacuum_run
    for f, p in side.items():
        assert p / inner == pytest.approx(f**4, rel=0.02)


def test_box_faces_radiate_outward(vacuum_run):
    sim, _, _, _ = vacuum_run
    scale = sim.normalisation()
    for sign, mon in sim.box.faces:
        assert sign * mon.data(scale).flux() > 0


def test_all_zero_plane_flux_is_zero():
    sim = Simulation(small_domain(), DipoleSource(), None, steps=1)
    assert sim.box.power(1.0) == 0.0
    assert all(m.data(1.0).flux() == 0.0 for m in sim.planes.values())


def _powers(res):
    return np.array([res.box_power] + [p.flux() for p in res.planes.values()])


@pytest.mark.filterwarnings("ignore::nanochannel.fdtd.simulation.NotConvergedWarning")
def test_linearity_in_source_amplitude():
    dom = small_domain(total_steps=900)
    prof = make_onf(280.0, VACUUM)
    a = Simulation(dom, DipoleSource(r_in=150.0), prof).run()
    b = Simulation(dom, DipoleSource(r_in=150.0, amplitude=2e-29), prof).run()
    assert np.allclose(_powers(b), 4 * _powers(a), rtol=1e-10, atol=0)


@pytest.mark.filterwarnings("ignore::nanochannel.fdtd.simulation.NotConvergedWarning")
def test_mirror_image_scene_gives_identical_powers():
    dom = small_domain(total_steps=700)
    prof = make_onf(280.0, VACUUM)
    a = Simulation(dom, DipoleSource(r_in=150.0), prof, symmetry=False).run()
    b = Simulation(dom, DipoleSource(r_in=150.0, azimuth=math.pi), prof, symmetry=False).run()
    assert np.allclose(_powers(a), _powers(b), rtol=1e-12, atol=0)


@pytest.mark.filterwarnings("ignore::nanochannel.fdtd.simulation.NotConvergedWarning")
@pytest.mark.parametrize("orientation", ["radial", "azimuthal", "axial"])
def test_symmetry_planes_reproduce_full_domain(orientation):
    dom = small_domain(total_steps=700)
    prof = make_ncf(100.0, 360.0, WATER, VACUUM)
    src = DipoleSource(orientation=orientation)
    full = Simulation(dom, src, prof, symmetry=False).run()
    half = Simulation(dom, src, prof, symmetry=True).run()
    assert half.mirror_planes
    assert np.allclose(_powers(half), _powers(full), rtol=1e-9, atol=0)


THREAD_SCRIPT = """
import json, numpy as np
from nanochannel.fdtd.simulation import Simulation
from nanochannel.scene import DipoleSource, SimulationDomain, make_onf
dom = SimulationDomain(extents=(800.0, 800.0, 800.0), dx=20.0, monitor_z_offsets=(-300.0, 300.0), total_steps=500)
res = Simulation(dom, DipoleSource(r_in=150.0), make_onf(280.0)).run()
print(json.dumps([res.box_power.hex()] + [p.flux().hex() for p in res.planes.values()]))
"""


def test_thread_count_bit_stability():
    out = []
    for threads in ("1", "2"):
        env = dict(os.environ, NUMBA_NUM_THREADS=threads)
        proc = subprocess.run([sys.executable, "-c", THREAD_SCRIPT], env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(proc.stdout.strip().splitlines()[-1]))
    assert out[0] == out[1]


def test_field_dump_round_trip(tmp_path):
    sim = Simulation(small_domain(), DipoleSource(), None, steps=50)
    sim.run_steps(50)
    path = tmp_path / "fields.bin"
    dump_fields(sim.grid, path)
    header, arrays = load_fields(path)
    assert header["dx"] == 20.0
    assert header["time"] == pytest.approx(50 * sim.grid.dt)
    assert set(arrays) == {"ex", "ey", "ez"}
    for k, v in arrays.items():
        assert v.dtype == np.dtype("<f4")
        assert np.array_equal(v, sim.grid.fields[k].astype("<f4"))
