from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from config.logger import setup_logger
from core.grid import Grid
from utils.errors import GridMismatchError, InvalidInputError, NonFiniteSampleError

logger = setup_logger(__name__)


@dataclass(frozen=True, eq=False)
class Field:
    """
    Real scalar field sampled on a grid.

    Attributes:
        grid: The Grid1D or Grid2D the values live on.
        values: Flat array of length n (1D) or nx*ny in row-major order (2D).
    """

    __array_ufunc__ = None

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        expected = int(np.prod(self.grid.shape))
        if values.size != expected:
            raise InvalidInputError(
                f"Field has {values.size} values but the grid has {expected} points."
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("Field values must all be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def as_array(self) -> np.ndarray:
        """Values reshaped to the grid shape (read-only view)."""
        return self.values.reshape(self.grid.shape)

    def __add__(self, other: "Field") -> "Field":
        _require_same_grid(self.grid, other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _require_same_grid(self.grid, other.grid)
        return Field(self.grid, self.values - other.values)

    def __rmul__(self, scalar: float) -> "Field":
        return Field(self.grid, float(scalar) * self.values)


def _require_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        logger.error("Grid mismatch: %s vs %s", a, b)
        raise GridMismatchError(f"Operands live on different grids: {a} vs {b}.")


def sample(grid: Grid, f: Callable[..., np.ndarray]) -> Field:
    """
    Samples a function of the grid coordinates.

    The function receives one coordinate array per axis (x, or x and y in
    "ij" mesh layout) and must be vectorized, e.g. ``np.exp`` or
    ``lambda x, y: np.exp(x + y)``.

    Args:
        grid: Grid1D or Grid2D.
        f: Scalar function of the coordinates.

    Returns:
        Field: values[i] = f(x_i) or f(x_i, y_j).
    """
    with np.errstate(all="ignore"):
        values = np.asarray(f(*grid.mesh()), dtype=float)
    values = np.broadcast_to(values, grid.shape)

    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        logger.error("Sampled function is non-finite at %d grid points", bad)
        raise NonFiniteSampleError(
            f"Sampled function is non-finite at {bad} grid points."
        )

    return Field(grid, values)


def inner_product(a: Field, b: Field) -> float:
    """
    Trapezoidal quadrature of a*b over the truncated domain.

    Args:
        a: First field.
        b: Second field, on the same grid.

    Returns:
        float: Integral of a*b, nested per axis on 2D grids.
    """
    _require_same_grid(a.grid, b.grid)
    integrand = a.as_array() * b.as_array()
    for axis in reversed(range(a.grid.ndim)):
        integrand = trapezoid(integrand, dx=a.grid.spacing[axis], axis=axis)
    return float(integrand)
