"""Command-line entry point: ``nanochannel {modes,run,sweep,reproduce-figure,plot}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from ..modesolver import solve_modes, v_number
from .config import TIERS, ConfigError, load_config
from .figures import FIGURES, UnknownFigureError, reproduce_figure
from .plot import plot
from .sweep import SweepRecord, SweepSpec, any_failed, run_sweep, values_from_block, write_csv

EXIT_FAILED_POINTS = 1
EXIT_USAGE = 2


def _set_threads(n: int | None) -> None:
    if n:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _progress(done: int, total: int) -> None:
    print(f"\r  step {done}/{total}", end="", file=sys.stderr, flush=True)
    if done == total:
        print(file=sys.stderr)


def cmd_modes(args) -> int:
    cfg, _ = load_config(args.config)
    prof = cfg.profile()
    spec = solve_modes(prof, float(cfg.source.get("wavelength_nm", 620.0)), cfg.m_max)
    outer = prof.layers[-1][1].n
    V = v_number(2 * prof.outer_radius, outer, prof.background.n, spec.wavelength)
    cols = ["family", "m", "radial_order", "n_eff", "beta_rad_per_nm", "V"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in spec.rows():
            row = dict(row, V=V)
            w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_run(args) -> int:
    from ..channeling import run_channeling

    cfg, _ = load_config(args.config, args.tier)
    prof, src, dom = cfg.build()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump = out / "fields.bin" if args.dump_fields else None
    res = run_channeling(
        prof,
        src,
        dom,
        cross_check=args.cross_check,
        m_max=cfg.m_max,
        constants=cfg.constants(),
        dump_path=dump,
        progress=_progress if not args.quiet else None,
    )
    status = "ok" if not res.warnings else "ok; " + "; ".join(res.warnings)
    # a single run is written as a one-row sweep over its orientation
    record = SweepRecord(src.orientation, res, res.runtime_s, "", cfg.config_hash(), cfg, status)
    write_csv([record], "orientation", out / "result.csv", cross_check=args.cross_check)
    payload = res.to_dict()
    payload["config"] = cfg.to_dict()
    (out / "result.json").write_text(json.dumps(payload, indent=1, sort_keys=True, default=str) + "\n")
    summary = f"eta={res.eta:.4f} purcell={res.purcell:.4f} Pc_fwd/P={res.Pc_forward / res.P:.4f} Pc_bwd/P={res.Pc_backward / res.P:.4f}"
    if res.eta_hybrid is not None:
        summary += f" eta_hybrid={res.eta_hybrid:.4f}"
    print(summary)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    cfg, block = load_config(args.config, args.tier)
    if "parameter" not in block:
        raise ConfigError("the config needs a sweep block with a 'parameter' key")
    values = values_from_block(block, args.step)
    out = Path(args.out) / f"sweep-{block['parameter']}.csv"
    spec = SweepSpec(cfg, block["parameter"], values, out, args.cross_check)
    records = run_sweep(spec, workers=args.workers)
    plot(out)
    failed = any_failed(records)
    print(f"wrote {out} ({len(records)} points{', some failed' if failed else ''})")
    return EXIT_FAILED_POINTS if failed else 0


def cmd_figure(args) -> int:
    csv_path, svg_path, failed = reproduce_figure(
        args.figure, args.tier, args.out, args.step, args.cross_check, workers=args.workers
    )
    print(f"wrote {csv_path} and {svg_path}")
    return EXIT_FAILED_POINTS if failed else 0


def cmd_plot(args) -> int:
    svg = plot(args.csv, args.out)
    print(f"wrote {svg}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nanochannel", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--threads", type=int, default=None, help="solver threads")

    m = sub.add_parser("modes", help="guided modes of the configured fiber as CSV")
    common(m)
    m.add_argument("--out", help="CSV file (default stdout)")
    m.set_defaults(func=cmd_modes)

    r = sub.add_parser("run", help="one channeling-efficiency simulation")
    common(r)
    r.add_argument("--tier", choices=TIERS, default=None)
    r.add_argument("--out", default="results/run")
    r.add_argument("--cross-check", action="store_true", help="add the semi-analytic estimate")
    r.add_argument("--dump-fields", action="store_true", help="write the final E field to fields.bin")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="one-parameter sweep from the config's sweep block")
    common(s)
    s.add_argument("--tier", choices=TIERS, default=None)
    s.add_argument("--out", default="results")
    s.add_argument("--step", type=float, default=None, help="override the sweep step (nm)")
    s.add_argument("--cross-check", action="store_true")
    s.add_argument("--workers", type=int, default=1, help="simulations run in parallel")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("reproduce-figure", help=f"regenerate a figure ({', '.join(sorted(FIGURES))})")
    f.add_argument("figure")
    common(f, config=False)
    f.add_argument("--tier", choices=TIERS, default="fast")
    f.add_argument("--out", default="results")
    f.add_argument("--step", type=float, default=None)
    f.add_argument("--cross-check", action="store_true")
    f.add_argument("--workers", type=int, default=1)
    f.set_defaults(func=cmd_figure)

    pl = sub.add_parser("plot", help="render a sweep CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--out", default=None)
    pl.set_defaults(func=cmd_plot, threads=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    _set_threads(getattr(args, "threads", None))
    try:
        return args.func(args)
    except (UnknownFigureError, FileNotFoundError, ValueError) as exc:
        # configuration, CSV and geometry errors are all ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
