"""
Martingale (vacuum) conditions: annihilation of e^x by H_BS, of e^{x+y} by
H_MG, and the constraint on y under which the extended state is a vacuum.
"""

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq

from config.logger import setup_logger
from core.field import Field, sample
from core.grid import Grid1D, Grid2D
from core.params import BsParams, MgParams
from operators.banded import apply, interior_norm, interior_slices
from operators.hamiltonians import build_bs_hamiltonian, build_mg_hamiltonian
from utils.errors import (
    InvalidInputError,
    MaxIterationsError,
    NoSignChangeError,
    NonFiniteError,
)

logger = setup_logger(__name__)

ROOT_MAX_ITER = 200


@dataclass(frozen=True)
class ConstraintResidual:
    """Value of the extended-martingale constraint at one log-variance."""

    y: float
    residual: float

    def __post_init__(self):
        if not math.isfinite(self.residual):
            raise NonFiniteError(f"Constraint residual is non-finite at y={self.y}.")


def bs_martingale_residual(p: BsParams, grid: Grid1D) -> float:
    """
    Interior max of |H_BS e^x| / e^x.

    Args:
        p: Black-Scholes parameters.
        grid: Log-price grid.

    Returns:
        float: Relative residual, of order dx².
    """
    h = build_bs_hamiltonian(p, grid)
    vacuum = sample(grid, np.exp)
    hs = apply(h, vacuum)
    relative = Field(grid, hs.values / vacuum.values)
    residual = interior_norm(relative, h.interior_margin)
    logger.info("BS martingale residual %.3e on %d points", residual, grid.n)
    return residual


def extended_martingale_residual(p: MgParams, grid2: Grid2D) -> Field:
    """
    R(x, y) = [H_MG e^{x+y}] / e^{x+y} + G(y).

    R vanishes up to truncation error in the interior; rows where G(y) = 0
    are the rows where e^{x+y} itself is annihilated.

    Args:
        p: Merton-Garman parameters.
        grid2: Grid over (x, y).

    Returns:
        Field: Residual on the whole grid (boundary rows included, unflagged).
    """
    h = build_mg_hamiltonian(p, grid2)
    vacuum = sample(grid2, lambda x, y: np.exp(x + y))
    hs = apply(h, vacuum)
    _, y = grid2.mesh()
    residual = hs.values / vacuum.values + p.extended_drift(y).ravel()
    return Field(grid2, residual)


@dataclass(frozen=True)
class ExtendedRowSummary:
    """
    Per-row view of the extended martingale condition over interior y rows.

    Attributes:
        ys: Interior log-variances.
        drift: G(y) on those rows.
        residual: Max over interior x of |R(x, y)|.
        annihilation: Max over interior x of |H_MG e^{x+y}| / e^{x+y}.
    """

    ys: np.ndarray
    drift: np.ndarray
    residual: np.ndarray
    annihilation: np.ndarray

    def vacuum_rows(self, tol: float) -> np.ndarray:
        """Mask of rows where G(y) vanishes, so e^{x+y} itself is annihilated."""
        return np.abs(self.drift) <= tol


def extended_martingale_rows(p: MgParams, grid2: Grid2D) -> ExtendedRowSummary:
    """Row maxima of the extended residual and of the plain annihilation of e^{x+y}."""
    h = build_mg_hamiltonian(p, grid2)
    vacuum = sample(grid2, lambda x, y: np.exp(x + y))
    relative = apply(h, vacuum).as_array() / vacuum.as_array()
    _, y = grid2.mesh()
    residual = relative + p.extended_drift(y)

    interior = interior_slices(grid2.shape, h.interior_margin)
    ys = grid2.gy.points[interior[1]]
    return ExtendedRowSummary(
        ys=ys,
        drift=p.extended_drift(ys),
        residual=np.abs(residual)[interior].max(axis=0),
        annihilation=np.abs(relative)[interior].max(axis=0),
    )


def martingale_constraint_residual(p: MgParams, y: float) -> ConstraintResidual:
    """
    Evaluates lambda + e^y (mu + (zeta²/2) e^{2y(alpha-1)} + rho zeta e^{y(alpha-1/2)}).

    Args:
        p: Merton-Garman parameters.
        y: Log-variance.

    Returns:
        ConstraintResidual: The residual at y.
    """
    if not math.isfinite(y):
        raise InvalidInputError(f"y must be finite, got {y}.")
    try:
        with np.errstate(over="raise", invalid="raise"):
            value = float(p.constraint(y))
    except FloatingPointError as e:
        logger.error("Constraint overflows at y=%s: %s", y, e)
        raise NonFiniteError(f"Constraint residual overflows at y={y}.") from e
    return ConstraintResidual(y=float(y), residual=value)


def solve_constraint_y(
    p: MgParams, y_lo: float, y_hi: float, xtol: float = 1e-15
) -> float:
    """
    Root in y of the extended-martingale constraint inside [y_lo, y_hi].

    Uses Brent's bracketed method (bisection, secant and inverse quadratic
    steps), so the result is deterministic for identical inputs.

    Args:
        p: Merton-Garman parameters.
        y_lo: Lower bracket end.
        y_hi: Upper bracket end.
        xtol: Absolute tolerance on y.

    Returns:
        float: y* with a vanishing residual.
    """
    f_lo = martingale_constraint_residual(p, y_lo).residual
    f_hi = martingale_constraint_residual(p, y_hi).residual

    if f_lo == 0.0:
        return float(y_lo)
    if f_hi == 0.0:
        return float(y_hi)
    if f_lo * f_hi > 0:
        logger.error(
            "No sign change on [%s, %s]: residuals %s and %s", y_lo, y_hi, f_lo, f_hi
        )
        raise NoSignChangeError(
            f"Constraint residual has the same sign at y={y_lo} ({f_lo}) "
            f"and y={y_hi} ({f_hi})."
        )

    y_star, info = brentq(
        lambda y: martingale_constraint_residual(p, y).residual,
        y_lo,
        y_hi,
        xtol=xtol,
        maxiter=ROOT_MAX_ITER,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        logger.error("Constraint root did not converge: %s", info.flag)
        raise MaxIterationsError(
            f"Constraint root did not converge in {ROOT_MAX_ITER} iterations."
        )

    logger.info(
        "Constraint root y*=%.17g after %d iterations (residual %.3e)",
        y_star,
        info.iterations,
        martingale_constraint_residual(p, y_star).residual,
    )
    return float(y_star)


def find_constraint_brackets(
    p: MgParams, y_lo: float, y_hi: float, samples: int = 401
) -> List[Tuple[float, float]]:
    """
    Scans the constraint on a uniform y-grid and returns every sub-interval
    whose end points have opposite signs (or hit zero exactly).
    """
    if not y_lo < y_hi or samples < 2:
        raise InvalidInputError("Scan needs y_lo < y_hi and at least 2 samples.")
    ys = np.linspace(y_lo, y_hi, samples)
    values = [martingale_constraint_residual(p, y).residual for y in ys]

    brackets = []
    for (a, fa), (b, fb) in zip(zip(ys, values), zip(ys[1:], values[1:])):
        if fa == 0.0 or fa * fb < 0:
            brackets.append((float(a), float(b)))
    if values[-1] == 0.0:
        brackets.append((float(ys[-2]), float(ys[-1])))
    logger.info("Found %d sign change(s) on [%s, %s]", len(brackets), y_lo, y_hi)
    return brackets


def solve_constraint_roots(
    p: MgParams, y_lo: float, y_hi: float, samples: int = 401
) -> List[float]:
    """All constraint roots found by scanning [y_lo, y_hi], in increasing order."""
    roots: List[float] = []
    for a, b in find_constraint_brackets(p, y_lo, y_hi, samples):
        root = solve_constraint_y(p, a, b)
        if not roots or root != roots[-1]:
            roots.append(root)
    return roots
