"""Built-in sweep definitions for the published efficiency curves."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .plot import plot
from .sweep import SweepSpec, default_runner, rows_to_csv, run_sweep, values_from_block


@dataclass(frozen=True)
class Figure:
    title: str
    geometry: dict
    parameter: str
    grid: dict  # start/stop/step in nm
    series: tuple[tuple[str, str], ...]  # (medium, orientation)


_ONF_ORIENT = ("radial", "azimuthal", "axial")
_NCF_SERIES = (("water", "radial"), ("vacuum", "radial"), ("water", "axial"), ("vacuum", "axial"))

FIGURES = {
    "3a": Figure(
        "solid fiber in vacuum, dipole on the surface",
        {"kind": "onf", "diameter_nm": 280.0, "background": "vacuum"},
        "diameter",
        {"start": 200.0, "stop": 600.0, "step": 20.0},
        tuple(("vacuum", o) for o in _ONF_ORIENT),
    ),
    "3b": Figure(
        "solid fiber in water, dipole on the surface",
        {"kind": "onf", "diameter_nm": 430.0, "background": "water"},
        "diameter",
        {"start": 300.0, "stop": 800.0, "step": 20.0},
        tuple(("water", o) for o in _ONF_ORIENT),
    ),
    "4a": Figure(
        "capillary, d_out = 360 nm, dipole on axis",
        {"kind": "ncf", "d_in_nm": 100.0, "d_out_nm": 360.0, "core": "water", "background": "vacuum"},
        "d_in",
        {"start": 10.0, "stop": 300.0, "step": 20.0},
        _NCF_SERIES,
    ),
    "4b": Figure(
        "capillary, d_in = 100 nm, dipole on axis",
        {"kind": "ncf", "d_in_nm": 100.0, "d_out_nm": 360.0, "core": "water", "background": "vacuum"},
        "d_out",
        {"start": 300.0, "stop": 1000.0, "step": 20.0},
        _NCF_SERIES,
    ),
    "5a": Figure(
        "capillary, d_in = 250 nm, dipole on axis",
        {"kind": "ncf", "d_in_nm": 250.0, "d_out_nm": 380.0, "core": "water", "background": "vacuum"},
        "d_out",
        {"start": 300.0, "stop": 1000.0, "step": 20.0},
        _NCF_SERIES,
    ),
    "5b": Figure(
        "capillary (100, 360): dipole offset inside the hole",
        {"kind": "ncf", "d_in_nm": 100.0, "d_out_nm": 360.0, "core": "water", "background": "vacuum"},
        "r_in",
        {"start": 0.0, "stop": 50.0, "step": 10.0},
        tuple((m, o) for m in ("water", "vacuum") for o in _ONF_ORIENT),
    ),
}


class UnknownFigureError(KeyError):
    def __str__(self):
        return f"unknown figure {self.args[0]!r}; valid ids: {', '.join(sorted(FIGURES))}"


def figure_specs(fig_id: str, tier: str, out_dir: Path, step: float | None = None, cross_check: bool = False):
    """One SweepSpec per curve of the figure."""
    if fig_id not in FIGURES:
        raise UnknownFigureError(fig_id)
    fig = FIGURES[fig_id]
    values = values_from_block(fig.grid, step)
    specs = []
    for medium, orient in fig.series:
        base = RunConfig(geometry=dict(fig.geometry), source={"orientation": orient}, tier=tier)
        base = base.with_value("medium", medium)
        vals = values
        if fig.parameter == "d_out" and base.kind == "ncf":
            vals = [v for v in values if v > base.geometry["d_in_nm"]]
        out = out_dir / f"fig{fig_id}" / f"{medium}-{orient}.csv"
        specs.append(SweepSpec(base, fig.parameter, vals, out, cross_check))
    return specs


def reproduce_figure(
    fig_id: str,
    tier: str = "fast",
    out_dir: str | Path = "results",
    step: float | None = None,
    cross_check: bool = False,
    runner=default_runner,
    workers: int = 1,
) -> tuple[Path, Path, bool]:
    """Run every curve of a figure; returns (csv, svg, any point failed)."""
    out_dir = Path(out_dir)
    rows, failed = [], False
    specs = figure_specs(fig_id, tier, out_dir, step, cross_check)
    for spec in specs:
        records = run_sweep(spec, runner=runner, workers=workers)
        rows += [r.row(spec.parameter) for r in records]
        failed |= any(r.status.startswith("failed") for r in records)
    csv_path = out_dir / f"fig{fig_id}.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(rows_to_csv(rows, cross_check))
    svg_path = plot(csv_path, title=f"Figure {fig_id}: {FIGURES[fig_id].title} ({tier} tier)")
    return csv_path, svg_path, failed
