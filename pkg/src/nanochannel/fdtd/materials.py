"""Component-wise sub-cell permittivity averaging of cylindrical profiles."""

from __future__ import annotations

import math

import numpy as np

from ..scene import GeometryError, LayeredCylinderProfile
from .grid import YeeGrid


def _h_primitive(x, R):
    """Antiderivative of sqrt(R^2 - x^2) on [-R, R]."""
    x = min(max(x, -R), R)
    return 0.5 * (x * math.sqrt(max(R * R - x * x, 0.0)) + R * R * math.asin(x / R))


def disk_rect_area(R: float, x0: float, x1: float, y0: float, y1: float) -> float:
    """Exact area of the disk ``x^2 + y^2 <= R^2`` inside ``[x0,x1] x [y0,y1]``."""
    a, b = max(x0, -R), min(x1, R)
    if a >= b or y0 >= y1:
        return 0.0
    cuts = {a, b}
    for y in (y0, y1):
        if abs(y) < R:
            xc = math.sqrt(R * R - y * y)
            for c in (-xc, xc):
                if a < c < b:
                    cuts.add(c)
    cuts = sorted(cuts)
    area = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        h = math.sqrt(max(R * R - mid * mid, 0.0))
        # between cuts the arc stays on one side of each edge; at a tangent
        # point (h == y1) it lies below the edge everywhere else
        top_is_h = h <= y1
        bot_is_h = -h >= y0
        if min(y1, h) <= max(y0, -h):
            continue
        # integrate top(x) - bottom(x); each is a constant or +-sqrt(R^2-x^2)
        H = _h_primitive(hi, R) - _h_primitive(lo, R)
        w = hi - lo
        top = H if top_is_h else y1 * w
        bot = -H if bot_is_h else y0 * w
        area += top - bot
    return area


def _average_map(profile: LayeredCylinderProfile, xs: np.ndarray, ys: np.ndarray, dx: float) -> np.ndarray:
    """Mean permittivity over dx-by-dx cells centred on the lattice points."""
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    eps = np.asarray(profile.eps_at(np.hypot(X, Y)), dtype=float)
    half = 0.5 * dx
    corner = np.hypot(np.abs(X) + half, np.abs(Y) + half)
    near = np.hypot(np.maximum(np.abs(X) - half, 0.0), np.maximum(np.abs(Y) - half, 0.0))
    eps_layers = [m.eps for _, m in profile.layers]
    eps_bg = profile.background.eps
    straddle = np.zeros(X.shape, dtype=bool)
    for R in profile.radii:
        straddle |= (near < R) & (corner > R)
    cell = dx * dx
    for i, j in zip(*np.nonzero(straddle)):
        x0, x1 = X[i, j] - half, X[i, j] + half
        y0, y1 = Y[i, j] - half, Y[i, j] + half
        inside_prev = 0.0
        total = 0.0
        for R, e in zip(profile.radii, eps_layers):
            inside = disk_rect_area(R, x0, x1, y0, y1)
            total += (inside - inside_prev) * e
            inside_prev = inside
        total += (cell - inside_prev) * eps_bg
        eps[i, j] = total / cell
    return eps


def rasterize(profile: LayeredCylinderProfile | None, grid: YeeGrid) -> YeeGrid:
    """Fill the grid's inverse-permittivity maps from a z-invariant profile.

    Each E component gets the area-averaged permittivity of the dx-by-dx
    cell centred on its own lattice site. ``None`` means homogeneous vacuum.
    """
    dx = grid.dx
    if profile is None:
        grid.inv_eps = tuple(np.ones_like(a) for a in grid.inv_eps)
        return grid
    for axis in (0, 1):
        lo, hi = grid.interior_bounds(axis)
        sym = grid.boundaries.kind("xyz"[axis] + "-") in ("pec", "pmc")
        reach = hi if sym else min(-lo, hi)
        if profile.outer_radius >= reach:
            raise GeometryError(
                f"profile radius {profile.outer_radius} nm exceeds the domain interior along {'xy'[axis]}"
            )
    xi, xh = grid.coords(0, False), grid.coords(0, True)
    yi, yh = grid.coords(1, False), grid.coords(1, True)
    ex = _average_map(profile, xh, yi, dx)
    ey = _average_map(profile, xi, yh, dx)
    ez = _average_map(profile, xi, yi, dx)
    grid.inv_eps = (1.0 / ex, 1.0 / ey, 1.0 / ez)
    return grid


def eps_maps(grid: YeeGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return tuple(1.0 / a for a in grid.inv_eps)
