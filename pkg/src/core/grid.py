import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np

from config.logger import setup_logger
from utils.errors import InvalidBoundsError, TooFewPointsError

logger = setup_logger(__name__)

MIN_POINTS = 5


@dataclass(frozen=True)
class Grid1D:
    """
    Truncated uniform discretization of one axis (log-price x or log-variance y).

    Attributes:
        x_min: Lower domain bound.
        x_max: Upper domain bound.
        n: Number of points, n >= 5.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidBoundsError(
                f"Grid bounds must be finite, got [{self.x_min}, {self.x_max}]."
            )
        if not self.x_min < self.x_max:
            logger.error("Invalid grid bounds [%s, %s]", self.x_min, self.x_max)
            raise InvalidBoundsError(
                f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]."
            )
        if int(self.n) != self.n or self.n < MIN_POINTS:
            logger.error("Grid needs at least %d points, got %s", MIN_POINTS, self.n)
            raise TooFewPointsError(
                f"A grid needs at least {MIN_POINTS} points, got {self.n}."
            )

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.linspace(self.x_min, self.x_max, self.n)
        pts.setflags(write=False)
        return pts

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,)

    @property
    def ndim(self) -> int:
        return 1

    @property
    def spacing(self) -> Tuple[float, ...]:
        return (self.dx,)

    @property
    def axes(self) -> Tuple[np.ndarray, ...]:
        return (self.points,)

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return (self.points,)

    def contains(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max


@dataclass(frozen=True)
class Grid2D:
    """
    Tensor-product grid over x (log-price) and y (log-variance, sigma² = e^y).
    Fields on it are stored row-major: index i*ny + j for (x_i, y_j).
    """

    gx: Grid1D
    gy: Grid1D

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.gx.n, self.gy.n)

    @property
    def ndim(self) -> int:
        return 2

    @property
    def spacing(self) -> Tuple[float, ...]:
        return (self.gx.dx, self.gy.dx)

    @property
    def axes(self) -> Tuple[np.ndarray, ...]:
        return (self.gx.points, self.gy.points)

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(self.gx.points, self.gy.points, indexing="ij"))


Grid = Union[Grid1D, Grid2D]


def make_grid_1d(x_min: float, x_max: float, n: int) -> Grid1D:
    """
    Builds a uniform one-dimensional grid.

    Args:
        x_min: Lower bound.
        x_max: Upper bound, strictly greater than x_min.
        n: Number of points, at least 5.

    Returns:
        Grid1D: The grid, with spacing (x_max - x_min)/(n - 1).
    """
    return Grid1D(x_min=float(x_min), x_max=float(x_max), n=int(n))


def make_grid_2d(
    x_min: float, x_max: float, nx: int, y_min: float, y_max: float, ny: int
) -> Grid2D:
    return Grid2D(gx=make_grid_1d(x_min, x_max, nx), gy=make_grid_1d(y_min, y_max, ny))
