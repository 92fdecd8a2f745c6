"""
Finite-difference generators: first derivatives (the price/volatility
generators p_x, p_y), second derivatives and the mixed derivative.

Interior rows use central stencils; the first and last row of each axis use
second-order one-sided stencils and are excluded by ``interior_margin``.
"""

from typing import Dict

import numpy as np

from core.grid import Grid, Grid1D, Grid2D
from operators.banded import BandedOperator, compose
from utils.errors import InvalidInputError


def _first_derivative_bands(n: int, h: float) -> Dict[int, np.ndarray]:
    bands = {k: np.zeros(n) for k in (-2, -1, 0, 1, 2)}
    bands[-1][1:-1] = -1.0 / (2.0 * h)
    bands[1][1:-1] = 1.0 / (2.0 * h)
    # (-3 f0 + 4 f1 - f2) / 2h and its mirror image
    bands[0][0], bands[1][0], bands[2][0] = -3.0 / (2.0 * h), 4.0 / (2.0 * h), -1.0 / (2.0 * h)
    bands[0][-1], bands[-1][-1], bands[-2][-1] = 3.0 / (2.0 * h), -4.0 / (2.0 * h), 1.0 / (2.0 * h)
    return bands


def _second_derivative_bands(n: int, h: float) -> Dict[int, np.ndarray]:
    h2 = h * h
    bands = {k: np.zeros(n) for k in (-3, -2, -1, 0, 1, 2, 3)}
    bands[-1][1:-1] = 1.0 / h2
    bands[0][1:-1] = -2.0 / h2
    bands[1][1:-1] = 1.0 / h2
    # (2 f0 - 5 f1 + 4 f2 - f3) / h² and its mirror image
    for sign, row in ((1, 0), (-1, -1)):
        bands[0][row] = 2.0 / h2
        bands[sign * 1][row] = -5.0 / h2
        bands[sign * 2][row] = 4.0 / h2
        bands[sign * 3][row] = -1.0 / h2
    return bands


def _embed(grid: Grid, axis: int, bands_1d: Dict[int, np.ndarray], name: str) -> BandedOperator:
    """Lifts 1D bands along ``axis`` to the full grid (constant along other axes)."""
    if axis >= grid.ndim:
        raise InvalidInputError(f"Axis {axis} does not exist on a {grid.ndim}D grid.")
    bands = {}
    for k, coef in bands_1d.items():
        if not np.any(coef):
            continue
        offset = [0] * grid.ndim
        offset[axis] = k
        view = [np.newaxis] * grid.ndim
        view[axis] = slice(None)
        bands[tuple(offset)] = np.broadcast_to(coef[tuple(view)], grid.shape)
    bandwidth = max(abs(k) for k in bands_1d)
    return BandedOperator(grid, bands, bandwidth, name)


def _axis(grid: Grid, axis: int) -> Grid1D:
    return grid if isinstance(grid, Grid1D) else (grid.gx, grid.gy)[axis]


def d_dx(grid: Grid) -> BandedOperator:
    """First derivative along x, the price generator p_x (no factor i)."""
    g = _axis(grid, 0)
    return _embed(grid, 0, _first_derivative_bands(g.n, g.dx), "p_x")


def d_dy(grid: Grid2D) -> BandedOperator:
    """First derivative along y, the volatility generator p_y."""
    if not isinstance(grid, Grid2D):
        raise InvalidInputError("d_dy needs a Grid2D.")
    return _embed(grid, 1, _first_derivative_bands(grid.gy.n, grid.gy.dx), "p_y")


def d2_dx2(grid: Grid) -> BandedOperator:
    g = _axis(grid, 0)
    return _embed(grid, 0, _second_derivative_bands(g.n, g.dx), "p_x^2")


def d2_dy2(grid: Grid2D) -> BandedOperator:
    if not isinstance(grid, Grid2D):
        raise InvalidInputError("d2_dy2 needs a Grid2D.")
    return _embed(grid, 1, _second_derivative_bands(grid.gy.n, grid.gy.dx), "p_y^2")


def d2_dxdy(grid: Grid2D) -> BandedOperator:
    """Mixed derivative as the composition of the two first-derivative stencils."""
    if not isinstance(grid, Grid2D):
        raise InvalidInputError("d2_dxdy needs a Grid2D.")
    mixed = compose(d_dx(grid), d_dy(grid))
    return BandedOperator(grid, mixed.bands, mixed.interior_margin, "p_x p_y")
