"""One leapfrog step: H half-step, mirror ghosts, E half-step, wall zeroing."""

from __future__ import annotations

from . import kernels
from .grid import YeeGrid


def _fill_ghosts(grid: YeeGrid) -> None:
    """Ghost H values for PMC faces (tangential H odd across the plane)."""
    f = grid.fields
    hx, hy, hz = f["hx"], f["hy"], f["hz"]
    b = grid.boundaries
    if b.kind("x-") == "pmc":
        hy[0] = -hy[1]
        hz[0] = -hz[1]
    if b.kind("x+") == "pmc":
        hy[-1] = -hy[-2]
        hz[-1] = -hz[-2]
    if b.kind("y-") == "pmc":
        hx[:, 0] = -hx[:, 1]
        hz[:, 0] = -hz[:, 1]
    if b.kind("y+") == "pmc":
        hx[:, -1] = -hx[:, -2]
        hz[:, -1] = -hz[:, -2]
    if b.kind("z-") == "pmc":
        hx[:, :, 0] = -hx[:, :, 1]
        hy[:, :, 0] = -hy[:, :, 1]
    if b.kind("z+") == "pmc":
        hx[:, :, -1] = -hx[:, :, -2]
        hy[:, :, -1] = -hy[:, :, -2]


def _zero_walls(grid: YeeGrid) -> None:
    """Tangential E vanishes on PEC faces and behind every CPML slab."""
    f = grid.fields
    ex, ey, ez = f["ex"], f["ey"], f["ez"]
    b = grid.boundaries
    for face, sl in (("x-", 0), ("x+", -1)):
        if b.kind(face) != "pmc":
            ey[sl] = 0.0
            ez[sl] = 0.0
    for face, sl in (("y-", 0), ("y+", -1)):
        if b.kind(face) != "pmc":
            ex[:, sl] = 0.0
            ez[:, sl] = 0.0
    for face, sl in (("z-", 0), ("z+", -1)):
        if b.kind(face) != "pmc":
            ex[:, :, sl] = 0.0
            ey[:, :, sl] = 0.0


def step_h(grid: YeeGrid) -> None:
    f = grid.fields
    s = grid.courant
    px, py, pz = grid.pml
    kernels.update_h(f["ex"], f["ey"], f["ez"], f["hx"], f["hy"], f["hz"], s, px.kinv_h, py.kinv_h, pz.kinv_h)
    p = grid.psi
    if len(px.idx_h):
        kernels.cpml_h_x(f["ey"], f["ez"], f["hy"], f["hz"], s, p["hyx"], p["hzx"], px.idx_h, px.b_h, px.a_h)
    if len(py.idx_h):
        kernels.cpml_h_y(f["ex"], f["ez"], f["hx"], f["hz"], s, p["hxy"], p["hzy"], py.idx_h, py.b_h, py.a_h)
    if len(pz.idx_h):
        kernels.cpml_h_z(f["ex"], f["ey"], f["hx"], f["hy"], s, p["hxz"], p["hyz"], pz.idx_h, pz.b_h, pz.a_h)


def step_e(grid: YeeGrid, source=None) -> None:
    f = grid.fields
    s = grid.courant
    px, py, pz = grid.pml
    iex, iey, iez = grid.inv_eps
    _fill_ghosts(grid)
    kernels.update_e(
        f["ex"], f["ey"], f["ez"], f["hx"], f["hy"], f["hz"], iex, iey, iez, s, px.kinv_e, py.kinv_e, pz.kinv_e
    )
    p = grid.psi
    if len(px.idx_e):
        kernels.cpml_e_x(f["ey"], f["ez"], f["hy"], f["hz"], iey, iez, s, p["eyx"], p["ezx"], px.idx_e, px.b_e, px.a_e)
    if len(py.idx_e):
        kernels.cpml_e_y(f["ex"], f["ez"], f["hx"], f["hz"], iex, iez, s, p["exy"], p["ezy"], py.idx_e, py.b_e, py.a_e)
    if len(pz.idx_e):
        kernels.cpml_e_z(f["ex"], f["ey"], f["hx"], f["hy"], iex, iey, s, p["exz"], p["eyz"], pz.idx_e, pz.b_e, pz.a_e)
    if source is not None:
        source.inject(grid.step_count)
    _zero_walls(grid)


def step(grid: YeeGrid, source=None) -> YeeGrid:
    """Advance H by a half step then E by a half step, with an optional dipole."""
    step_h(grid)
    step_e(grid, source)
    grid.step_count += 1
    return grid
