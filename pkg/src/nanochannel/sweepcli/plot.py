"""Deterministic SVG line plots of sweep CSV files (no plotting library needed)."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

WIDTH, HEIGHT = 640, 440
MARGIN = {"left": 70, "right": 150, "top": 30, "bottom": 60}
COLORS = ("#1b1b1b", "#c0392b", "#2471a3", "#27ae60", "#8e44ad", "#d68910", "#148f77", "#7f8c8d")
MARKERS = ("square", "circle", "triangle", "diamond")
AXIS_LABELS = {
    "diameter": "fiber diameter D (nm)",
    "d_in": "inner diameter d_in (nm)",
    "d_out": "outer diameter d_out (nm)",
    "r_in": "dipole offset r_in (nm)",
    "orientation": "orientation",
    "medium": "medium",
}
REQUIRED = ("swept_param", "swept_value", "medium", "orientation", "eta")


class PlotError(ValueError):
    """The CSV does not follow the sweep schema."""


def read_series(text: str) -> tuple[str, dict[tuple[str, str], list[tuple[float, float]]]]:
    """Group (x, eta) points by (medium, orientation); failed rows are skipped."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise PlotError("line 1: empty file, expected a header row")
    missing = [c for c in REQUIRED if c not in reader.fieldnames]
    if missing:
        raise PlotError(f"line 1: header lacks columns {missing}")
    series: dict[tuple[str, str], list[tuple[float, float]]] = {}
    param = ""
    for lineno, row in enumerate(reader, start=2):
        if None in row or any(row[c] is None for c in REQUIRED):
            raise PlotError(f"line {lineno}: wrong number of fields")
        param = param or row["swept_param"]
        if row["eta"] == "":
            continue
        try:
            x = float(row["swept_value"])
            y = float(row["eta"])
        except ValueError:
            raise PlotError(f"line {lineno}: non-numeric swept_value or eta") from None
        series.setdefault((row["medium"], row["orientation"]), []).append((x, y))
    for pts in series.values():
        pts.sort()
    return param, series


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10 * mag)
    start = math.floor(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        if t >= lo - 1e-9 * step:
            ticks.append(round(t, 10))
        t += step
    return ticks


def _num(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _marker(kind: str, x: float, y: float, color: str) -> str:
    if kind == "square":
        return f'<rect x="{_num(x - 4)}" y="{_num(y - 4)}" width="8" height="8" fill="{color}"/>'
    if kind == "circle":
        return f'<circle cx="{_num(x)}" cy="{_num(y)}" r="4.5" fill="{color}"/>'
    if kind == "triangle":
        pts = f"{_num(x)},{_num(y - 5)} {_num(x - 5)},{_num(y + 4)} {_num(x + 5)},{_num(y + 4)}"
        return f'<polygon points="{pts}" fill="{color}"/>'
    pts = f"{_num(x)},{_num(y - 5)} {_num(x + 5)},{_num(y)} {_num(x)},{_num(y + 5)} {_num(x - 5)},{_num(y)}"
    return f'<polygon points="{pts}" fill="{color}"/>'


def render_svg(text: str, title: str = "") -> str:
    """SVG document for the sweep CSV ``text``; identical input gives identical bytes."""
    param, series = read_series(text)
    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    y_lo, y_hi = 0.0, max(0.1, max(ys) * 1.1) if ys else 1.0
    xt, yt = _ticks(x_lo, x_hi), _ticks(y_lo, y_hi)
    x_lo, x_hi = min(x_lo, xt[0]), max(x_hi, xt[-1])
    y_hi = max(y_hi, yt[-1])
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x):
        return MARGIN["left"] + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return MARGIN["top"] + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH // 2}" y="18" text-anchor="middle" font-size="14">{title}</text>')
    x0, y0 = MARGIN["left"], MARGIN["top"] + ph
    out.append(f'<path d="M{x0},{MARGIN["top"]} V{y0} H{x0 + pw}" stroke="black" fill="none"/>')
    for t in xt:
        X = _num(sx(t))
        out.append(f'<line x1="{X}" y1="{y0}" x2="{X}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{y0 + 18}" text-anchor="middle">{_num(t)}</text>')
    for t in yt:
        Y = _num(sy(t))
        out.append(f'<line x1="{x0 - 5}" y1="{Y}" x2="{x0}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{x0 - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_num(t)}</text>')
    out.append(
        f'<text x="{_num(x0 + pw / 2)}" y="{HEIGHT - 15}" text-anchor="middle">{AXIS_LABELS.get(param, param)}</text>'
    )
    out.append(
        f'<text x="18" y="{_num(MARGIN["top"] + ph / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_num(MARGIN["top"] + ph / 2)})">channeling efficiency η</text>'
    )
    for n, key in enumerate(sorted(series)):
        pts = series[key]
        color = COLORS[n % len(COLORS)]
        marker = MARKERS[n % len(MARKERS)]
        label = f"{key[0]}, {key[1]}"
        out.append(f'<g class="series" data-medium="{key[0]}" data-orientation="{key[1]}">')
        if len(pts) > 1:
            path = " ".join(f"{_num(sx(x))},{_num(sy(y))}" for x, y in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append('<g class="points">')
        for x, y in pts:
            out.append(_marker(marker, sx(x), sy(y), color))
        out.append("</g>")
        ly = MARGIN["top"] + 10 + 20 * n
        lx = WIDTH - MARGIN["right"] + 15
        out.append(_marker(marker, lx, ly, color))
        out.append(f'<text x="{lx + 12}" y="{ly}" dominant-baseline="middle">{label}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot(csv_path: str | Path, svg_path: str | Path | None = None, title: str = "") -> Path:
    csv_path = Path(csv_path)
    svg_path = Path(svg_path) if svg_path else csv_path.with_suffix(".svg")
    svg_path.write_text(render_svg(csv_path.read_text(), title))
    return svg_path
