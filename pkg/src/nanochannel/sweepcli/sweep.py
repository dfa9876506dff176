"""Declarative one-parameter sweeps with a resumable journal and sorted CSV."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .. import __version__
from ..channeling import EfficiencyResult, run_channeling
from .config import ConfigError, RunConfig

log = logging.getLogger(__name__)

PARAMETERS = ("diameter", "d_in", "d_out", "r_in", "orientation", "medium")
NUMERIC = ("diameter", "d_in", "d_out", "r_in")
CSV_COLUMNS = (
    "swept_param",
    "swept_value",
    "medium",
    "orientation",
    "d_in_nm",
    "d_out_nm",
    "r_in_nm",
    "eta",
    "P_W",
    "P0_W",
    "Pc_fwd_W",
    "Pc_bwd_W",
    "purcell",
    "dx_nm",
    "estimator",
    "eta_hybrid",
    "runtime_s",
    "status",
)


@dataclass
class SweepSpec:
    base: RunConfig
    parameter: str
    values: list
    output: Path | None = None
    cross_check: bool = False

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ConfigError(f"sweep parameter must be one of {PARAMETERS}, got {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")
        if self.parameter in NUMERIC:
            vals = [float(v) for v in self.values]
            diffs = np.diff(vals)
            if len(vals) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ConfigError("numeric sweep values must be strictly monotone")
            self.values = vals
        for v in self.values:
            self.base.with_value(self.parameter, v).build()

    @property
    def tier(self) -> str:
        return self.base.tier


def values_from_block(block: dict, step: float | None = None) -> list:
    """Sweep values from ``values: [...]`` or ``start/stop/step``."""
    if "values" in block:
        return list(block["values"])
    try:
        start, stop = float(block["start"]), float(block["stop"])
    except KeyError as exc:
        raise ConfigError(f"sweep needs 'values' or 'start'/'stop' (missing {exc.args[0]!r})") from None
    inc = float(step if step is not None else block.get("step", 20.0))
    if inc <= 0:
        raise ConfigError("sweep step must be positive")
    n = int(math.floor((stop - start) / inc + 1e-9))
    return [round(start + i * inc, 9) for i in range(n + 1)]


@dataclass
class SweepRecord:
    value: object
    result: EfficiencyResult | None
    seconds: float
    solver_version: str
    config_hash: str
    config: RunConfig
    status: str = "ok"

    def row(self, parameter: str) -> dict:
        cfg = self.config
        g = cfg.geometry
        src = cfg.dipole()
        if cfg.kind == "onf":
            d_in, d_out = 0.0, float(g["diameter_nm"])
        else:
            d_in, d_out = float(g["d_in_nm"]), float(g["d_out_nm"])
        row = dict.fromkeys(CSV_COLUMNS, "")
        row.update(
            swept_param=parameter,
            swept_value=_fmt(self.value),
            medium=cfg.medium,
            orientation=src.orientation,
            d_in_nm=_fmt(d_in),
            d_out_nm=_fmt(d_out),
            r_in_nm=_fmt(src.r_in),
            dx_nm=_fmt(cfg.simulation_domain().dx),
            runtime_s=f"{self.seconds:.1f}",
            status=self.status,
        )
        r = self.result
        if r is not None:
            row.update(
                eta=_fmt(r.eta),
                P_W=_fmt(r.P),
                P0_W=_fmt(r.P0),
                Pc_fwd_W=_fmt(r.Pc_forward),
                Pc_bwd_W=_fmt(r.Pc_backward),
                purcell=_fmt(r.purcell),
                estimator=r.metadata.get("estimator", ""),
                eta_hybrid="" if r.eta_hybrid is None else _fmt(r.eta_hybrid),
            )
        return row


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.6g}"


# ---------------------------------------------------------------------------
# evaluation and journal
# ---------------------------------------------------------------------------

Runner = Callable[[RunConfig, bool], EfficiencyResult]


def default_runner(cfg: RunConfig, cross_check: bool) -> EfficiencyResult:
    prof, src, dom = cfg.build()
    return run_channeling(prof, src, dom, cross_check=cross_check, m_max=cfg.m_max, constants=cfg.constants())


def _result_to_json(r: EfficiencyResult | None):
    if r is None:
        return None
    return r.to_dict()


def _result_from_json(d) -> EfficiencyResult | None:
    if d is None:
        return None
    return EfficiencyResult(**d)


def _value_key(v) -> str:
    return _fmt(v) if not isinstance(v, str) else v


def _evaluate(args) -> dict:
    cfg, value, cross_check, runner = args
    t0 = time.perf_counter()
    try:
        res = runner(cfg, cross_check)
        status = "ok"
        if res.warnings:
            status = "ok; " + "; ".join(res.warnings)
    except Exception as exc:  # a failed point is recorded, never fatal
        log.debug("sweep point failed: %s", traceback.format_exc())
        res = None
        status = f"failed: {type(exc).__name__}: {exc}"
    return {
        "key": _value_key(value),
        "value": value,
        "seconds": time.perf_counter() - t0,
        "status": status,
        "result": _result_to_json(res),
    }


def journal_path(out_csv: Path) -> Path:
    return out_csv.with_suffix(out_csv.suffix + ".journal")


def _read_journal(path: Path, config_hash: str) -> dict[str, dict]:
    done = {}
    if not path.exists():
        return done
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn final line from an interrupted write
            if entry.get("config_hash") == config_hash and entry["status"].startswith("ok"):
                done[entry["key"]] = entry
    return done


def run_sweep(
    spec: SweepSpec,
    runner: Runner = default_runner,
    workers: int = 1,
    journal: Path | None = None,
) -> list[SweepRecord]:
    """Evaluate every sweep value; completed values in the journal are reused.

    Records come back sorted by swept value regardless of completion order.
    """
    out = spec.output
    if journal is None and out is not None:
        journal = journal_path(Path(out))
    cfgs = {_value_key(v): spec.base.with_value(spec.parameter, v) for v in spec.values}
    hashes = {k: c.config_hash() for k, c in cfgs.items()}
    entries: dict[str, dict] = {}
    if journal is not None:
        journal.parent.mkdir(parents=True, exist_ok=True)
        for key, cfg in cfgs.items():
            prev = _read_journal(journal, hashes[key]).get(key)
            if prev is not None:
                entries[key] = prev
    todo = [(cfgs[_value_key(v)], v, spec.cross_check, runner) for v in spec.values if _value_key(v) not in entries]

    def record(entry):
        entry["config_hash"] = hashes[entry["key"]]
        entries[entry["key"]] = entry
        if journal is not None:
            with open(journal, "a") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for entry in pool.map(_evaluate, todo):
                record(entry)
    else:
        for item in todo:
            record(_evaluate(item))

    records = []
    for v in spec.values:
        key = _value_key(v)
        e = entries[key]
        records.append(
            SweepRecord(
                value=v,
                result=_result_from_json(e["result"]),
                seconds=float(e["seconds"]),
                solver_version=__version__,
                config_hash=hashes[key],
                config=cfgs[key],
                status=e["status"],
            )
        )
    if spec.parameter in NUMERIC:
        records.sort(key=lambda r: float(r.value))
    if out is not None:
        write_csv(records, spec.parameter, Path(out), cross_check=spec.cross_check)
    return records


def rows_to_csv(rows: list[dict], cross_check: bool = False) -> str:
    cols = [c for c in CSV_COLUMNS if cross_check or c != "eta_hybrid"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def write_csv(records: list[SweepRecord], parameter: str, path: Path, cross_check: bool = False) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = rows_to_csv([r.row(parameter) for r in records], cross_check)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def any_failed(records: list[SweepRecord]) -> bool:
    return any(r.status.startswith("failed") for r in records)
