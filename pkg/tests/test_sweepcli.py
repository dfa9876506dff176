import csv
import io
import json

import pytest
import yaml

from nanochannel.channeling import EfficiencyResult
from nanochannel.sweepcli import cli
from nanochannel.sweepcli.config import ConfigError, RunConfig, load_config, parse_config
from nanochannel.sweepcli.figures import FIGURES, UnknownFigureError, figure_specs, reproduce_figure
from nanochannel.sweepcli.plot import PlotError, plot, read_series, render_svg
from nanochannel.sweepcli.sweep import CSV_COLUMNS, SweepSpec, journal_path, run_sweep, values_from_block

BASE = {
    "schema_version": 1,
    "geometry": {"kind": "ncf", "d_in_nm": 100, "d_out_nm": 360, "core": "water", "background": "vacuum"},
    "source": {"orientation": "radial"},
    "sweep": {"parameter": "d_out", "start": 300, "stop": 400, "step": 20},
}


def fake_runner(cfg, cross_check):
    """Deterministic stand-in for an FDTD run: a smooth function of the scene."""
    g = cfg.geometry
    d = float(g.get("d_out_nm", g.get("diameter_nm")))
    eta = 0.5 - ((d - 360.0) / 400.0) ** 2
    P, P0 = 2.0e-12, 1.0e-12
    res = EfficiencyResult(
        P=P,
        P0=P0,
        Pc_forward=eta * P / 2,
        Pc_backward=eta * P / 2,
        eta=eta,
        purcell=P / P0,
        metadata={"estimator": "mode-projection"},
    )
    if cross_check:
        res.eta_hybrid = eta + 0.01
    return res


class Interrupt(BaseException):
    pass


def interrupting_runner(limit):
    calls = []

    def run(cfg, cross_check):
        if len(calls) == limit:
            raise Interrupt()
        calls.append(cfg)
        return fake_runner(cfg, cross_check)

    return run


def sweep_spec(tmp_path, name="out.csv", values=None, cross_check=False):
    cfg, block = parse_config(BASE)
    vals = values if values is not None else values_from_block(block)
    return SweepSpec(cfg, "d_out", vals, tmp_path / name, cross_check)


# --- configuration -----------------------------------------------------------


def test_config_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(BASE))
    cfg, block = load_config(path, "accurate")
    prof, src, dom = cfg.build()
    assert prof.radii == (50.0, 180.0)
    assert src.r_in == 0.0 and src.orientation == "radial"
    assert dom.dx == 10.0 and dom.extents == (3000.0, 3000.0, 9000.0)
    assert block["parameter"] == "d_out"
    assert values_from_block(block) == [300.0, 320.0, 340.0, 360.0, 380.0, 400.0]
    assert values_from_block(block, step=50) == [300.0, 350.0, 400.0]


def test_onf_dipole_sits_on_the_surface():
    cfg = RunConfig(geometry={"kind": "onf", "diameter_nm": 280, "background": "vacuum"})
    assert cfg.dipole().r_in == 150.0
    assert cfg.medium == "vacuum"


def test_materials_override_reaches_profile():
    cfg = RunConfig(geometry=BASE["geometry"], materials={"water": 1.34})
    assert cfg.profile().indices[0] == 1.34
    assert cfg.constants().water == 1.34


@pytest.mark.parametrize(
    "mutate,match",
    [
        (lambda d: d.pop("schema_version"), "schema_version"),
        (lambda d: d.update(colour="red"), "unknown top-level"),
        (lambda d: d["geometry"].update(radius=3), "unknown keys in geometry"),
        (lambda d: d["geometry"].update(kind="slab"), "kind"),
        (lambda d: d.update(tier="medium"), "tier"),
        (lambda d: d["geometry"].pop("d_out_nm"), "d_out_nm"),
        (lambda d: d["geometry"].update(core="glycerol"), "unknown material"),
    ],
)
def test_config_errors(mutate, match):
    data = json.loads(json.dumps(BASE))
    mutate(data)
    with pytest.raises(ConfigError, match=match):
        cfg, _ = parse_config(data)
        cfg.build()


def test_config_hash_tracks_content():
    a, _ = parse_config(BASE)
    b, _ = parse_config(BASE)
    assert a.config_hash() == b.config_hash()
    assert a.with_value("d_out", 380).config_hash() != a.config_hash()


# --- sweeps ------------------------------------------------------------------


def test_sweep_rejects_invalid_values(tmp_path):
    with pytest.raises(ConfigError):
        sweep_spec(tmp_path, values=[300, 340, 320])
    with pytest.raises(ValueError):
        sweep_spec(tmp_path, values=[80, 300])  # d_out below d_in
    with pytest.raises(ConfigError):
        sweep_spec(tmp_path, values=[])


def test_sweep_csv_columns_and_order(tmp_path):
    spec = sweep_spec(tmp_path, values=[400, 380, 360, 340])
    records = run_sweep(spec, runner=fake_runner)
    assert [r.value for r in records] == [340.0, 360.0, 380.0, 400.0]
    rows = list(csv.DictReader(io.StringIO(spec.output.read_text())))
    assert tuple(rows[0]) == tuple(c for c in CSV_COLUMNS if c != "eta_hybrid")
    assert [r["swept_value"] for r in rows] == ["340", "360", "380", "400"]
    assert rows[1]["eta"] == "0.5" and rows[1]["status"] == "ok"
    assert rows[0]["d_in_nm"] == "100" and rows[0]["medium"] == "water"


def test_cross_check_adds_hybrid_column(tmp_path):
    spec = sweep_spec(tmp_path, values=[360], cross_check=True)
    run_sweep(spec, runner=fake_runner)
    rows = list(csv.DictReader(io.StringIO(spec.output.read_text())))
    assert "eta_hybrid" in rows[0] and float(rows[0]["eta_hybrid"]) == pytest.approx(0.51)


def test_interrupted_sweep_resumes_to_identical_csv(tmp_path):
    reference = sweep_spec(tmp_path, "ref.csv")
    run_sweep(reference, runner=fake_runner)
    spec = sweep_spec(tmp_path, "resumed.csv")
    with pytest.raises(Interrupt):
        run_sweep(spec, runner=interrupting_runner(3))
    assert not spec.output.exists()
    assert len(journal_path(spec.output).read_text().splitlines()) == 3
    # a torn final line from the interruption is ignored
    with open(journal_path(spec.output), "a") as fh:
        fh.write('{"key": "380", "sta')
    calls = []
    run_sweep(spec, runner=lambda c, x: calls.append(c) or fake_runner(c, x))
    assert len(calls) == 3
    assert spec.output.read_bytes() == reference.output.read_bytes()


def test_failed_point_is_recorded_and_retried(tmp_path):
    def flaky(cfg, cross_check):
        if cfg.geometry["d_out_nm"] == 340.0:
            raise RuntimeError("solver exploded")
        return fake_runner(cfg, cross_check)

    spec = sweep_spec(tmp_path, values=[320, 340, 360])
    records = run_sweep(spec, runner=flaky)
    assert records[1].status.startswith("failed: RuntimeError: solver exploded")
    rows = list(csv.DictReader(io.StringIO(spec.output.read_text())))
    assert rows[1]["eta"] == "" and rows[2]["eta"] != ""
    calls = []
    run_sweep(spec, runner=lambda c, x: calls.append(c.geometry["d_out_nm"]) or fake_runner(c, x))
    assert calls == [340.0]


def test_worker_count_does_not_change_output(tmp_path):
    serial = sweep_spec(tmp_path, "serial.csv")
    parallel = sweep_spec(tmp_path, "parallel.csv")
    run_sweep(serial, runner=fake_runner, workers=1)
    run_sweep(parallel, runner=fake_runner, workers=2)
    assert serial.output.read_bytes() == parallel.output.read_bytes()


def test_single_value_sweep_matches_direct_run(tmp_path):
    spec = sweep_spec(tmp_path, values=[360])
    (record,) = run_sweep(spec, runner=fake_runner)
    direct = fake_runner(spec.base.with_value("d_out", 360), False)
    assert record.result.to_dict() == direct.to_dict()


def test_orientation_sweep_keeps_given_order(tmp_path):
    cfg, _ = parse_config(BASE)
    spec = SweepSpec(cfg, "orientation", ["axial", "radial"], tmp_path / "o.csv")
    records = run_sweep(spec, runner=fake_runner)
    assert [r.row("orientation")["orientation"] for r in records] == ["axial", "radial"]


# --- figures -----------------------------------------------------------------


def test_every_figure_has_its_curve_set(tmp_path):
    expected = {"3a": 3, "3b": 3, "4a": 4, "4b": 4, "5a": 4, "5b": 6}
    for fig, n in expected.items():
        specs = figure_specs(fig, "fast", tmp_path)
        assert len(specs) == n
        assert len({(s.base.medium, s.base.dipole().orientation) for s in specs}) == n


def test_figure_4b_grid():
    specs = figure_specs("4b", "fast", __import__("pathlib").Path("/tmp"))
    assert specs[0].values[0] == 300.0 and specs[0].values[-1] == 1000.0
    assert all(s.base.geometry["d_in_nm"] == 100.0 for s in specs)


def test_unknown_figure():
    with pytest.raises(UnknownFigureError, match="3a, 3b, 4a, 4b, 5a, 5b"):
        figure_specs("7", "fast", None)
    assert set(FIGURES) == {"3a", "3b", "4a", "4b", "5a", "5b"}


def test_reproduce_figure_with_fake_runner(tmp_path):
    csv_path, svg_path, failed = reproduce_figure("4b", "fast", tmp_path, step=100, runner=fake_runner)
    assert not failed
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert {(r["medium"], r["orientation"]) for r in rows} == {
        ("water", "radial"),
        ("vacuum", "radial"),
        ("water", "axial"),
        ("vacuum", "axial"),
    }
    svg = svg_path.read_text()
    assert "outer diameter d_out (nm)" in svg
    first = svg_path.read_bytes()
    reproduce_figure("4b", "fast", tmp_path, step=100, runner=fake_runner)
    assert svg_path.read_bytes() == first


# --- plotting ----------------------------------------------------------------

HEADER = ",".join(c for c in CSV_COLUMNS if c != "eta_hybrid")


def _csv(*rows):
    lines = [HEADER]
    for medium, orient, x, eta in rows:
        row = dict.fromkeys(CSV_COLUMNS, "")
        row.update(swept_param="d_out", swept_value=x, medium=medium, orientation=orient, eta=eta, status="ok")
        lines.append(",".join(str(row[c]) for c in CSV_COLUMNS if c != "eta_hybrid"))
    return "\n".join(lines) + "\n"


def test_plot_is_deterministic(tmp_path):
    text = _csv(("water", "radial", 340, 0.4), ("water", "radial", 360, 0.5), ("vacuum", "axial", 340, 0.1))
    path = tmp_path / "s.csv"
    path.write_text(text)
    a = plot(path).read_bytes()
    b = plot(path).read_bytes()
    assert a == b
    assert a.count(b"<polyline") == 1  # the single-point series gets no line


def test_plot_empty_data_gives_axes_only():
    svg = render_svg(HEADER + "\n")
    assert "<svg" in svg and "<polyline" not in svg and "<rect" in svg


def test_plot_single_point():
    svg = render_svg(_csv(("water", "radial", 360, 0.5)))
    assert "<polyline" not in svg
    points = svg.split('<g class="points">')[1].split("</g>")[0].strip().splitlines()
    assert len(points) == 1


@pytest.mark.parametrize(
    "text,line",
    [
        ("", "line 1"),
        ("a,b\n1,2\n", "line 1"),
        (HEADER + "\n" + "d_out,360,water\n", "line 2"),
        (_csv(("water", "radial", 360, 0.5)) + _csv(("water", "radial", "x", 0.5)).splitlines()[1] + "\n", "line 3"),
    ],
)
def test_plot_reports_malformed_line(text, line):
    with pytest.raises(PlotError, match=line):
        read_series(text)


# --- command line ------------------------------------------------------------


def test_cli_unknown_figure_exits_2(capsys):
    assert cli.main(["reproduce-figure", "9z"]) == 2
    assert "valid ids" in capsys.readouterr().err


def test_cli_bad_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("schema_version: 3\n")
    assert cli.main(["modes", "--config", str(path)]) == 2
    assert "schema_version" in capsys.readouterr().err


def test_cli_modes_csv(tmp_path):
    data = json.loads(json.dumps(BASE))
    data["geometry"] = {"kind": "onf", "diameter_nm": 600, "background": "vacuum"}
    path = tmp_path / "onf.yaml"
    path.write_text(yaml.safe_dump(data))
    out = tmp_path / "modes.csv"
    assert cli.main(["modes", "--config", str(path), "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["family"] + r["m"] for r in rows] == ["HE1", "TE0", "TM0", "HE2"]
    assert float(rows[0]["V"]) == pytest.approx(3.2076, abs=1e-3)
    assert 1.0 < float(rows[0]["n_eff"]) < 1.4537


def test_cli_plot(tmp_path, capsys):
    path = tmp_path / "s.csv"
    path.write_text(_csv(("water", "radial", 340, 0.4), ("water", "radial", 360, 0.5)))
    assert cli.main(["plot", str(path)]) == 0
    assert (tmp_path / "s.svg").exists()
    path.write_text("nonsense\n")
    assert cli.main(["plot", str(path)]) == 2
