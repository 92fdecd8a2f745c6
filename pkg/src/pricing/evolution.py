"""
Backward evolution with the pricing kernel exp(-(t* - t) H), realized by
implicit time stepping on time-to-maturity:

    implicit Euler:  (I + dt H) C_{n+1} = C_n
    Crank-Nicolson:  (I + dt/2 H) C_{n+1} = (I - dt/2 H) C_n

Rows on any edge of the grid are held at their terminal values.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from config.logger import setup_logger
from core.field import Field
from core.grid import Grid
from operators.banded import BandedOperator, interior_slices
from utils.errors import (
    GridMismatchError,
    InvalidInputError,
    NonFiniteValuesError,
    SingularStepMatrixError,
)

logger = setup_logger(__name__)


class Scheme(str, Enum):
    IMPLICIT_EULER = "implicit-euler"
    CRANK_NICOLSON = "crank-nicolson"


@dataclass(frozen=True)
class EvolutionConfig:
    """
    Time-stepping settings.

    Attributes:
        maturity: Horizon T = t* - t, T > 0.
        steps: Number of time steps, >= 1.
        scheme: Implicit Euler or Crank-Nicolson.
        rannacher_steps: Leading Crank-Nicolson steps replaced by two implicit
            Euler half steps each; 0 disables the startup.
        grid: Optional grid the evolution is bound to.
    """

    maturity: float
    steps: int
    scheme: Scheme = Scheme.CRANK_NICOLSON
    rannacher_steps: int = 2
    grid: Optional[Grid] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not (math.isfinite(self.maturity) and self.maturity > 0):
            raise InvalidInputError(f"maturity must be finite and > 0, got {self.maturity}.")
        if int(self.steps) != self.steps or self.steps < 1:
            raise InvalidInputError(f"steps must be an integer >= 1, got {self.steps}.")
        if int(self.rannacher_steps) != self.rannacher_steps or self.rannacher_steps < 0:
            raise InvalidInputError(
                f"rannacher_steps must be an integer >= 0, got {self.rannacher_steps}."
            )

    @property
    def dt(self) -> float:
        return self.maturity / self.steps


def _edge_mask(shape) -> np.ndarray:
    mask = np.ones(shape, dtype=bool)
    mask[interior_slices(shape, 1)] = False
    return mask.ravel()


class _Stepper:
    """LU-factored step matrices for one operator, cached per (theta, dt)."""

    def __init__(self, h: BandedOperator, edge: np.ndarray):
        self.matrix = h.to_sparse().tocsr()
        self.edge = edge
        self.interior = (~edge).astype(float)
        self.size = self.matrix.shape[0]
        self._factors: Dict[tuple, object] = {}

    def _factor(self, theta: float, dt: float):
        key = (theta, dt)
        if key not in self._factors:
            eye = sp.identity(self.size, format="csr")
            lhs = sp.diags(self.interior) @ (eye + (theta * dt) * self.matrix)
            lhs = (lhs + sp.diags(self.edge.astype(float))).tocsc()
            try:
                self._factors[key] = splu(lhs)
            except RuntimeError as e:
                logger.error("Step matrix is singular (theta=%s, dt=%s): %s", theta, dt, e)
                raise SingularStepMatrixError(
                    f"Step matrix I + {theta}*dt*H is singular for dt={dt}."
                ) from e
        return self._factors[key]

    def step(self, values: np.ndarray, pinned: np.ndarray, theta: float, dt: float) -> np.ndarray:
        rhs = values
        if theta < 1.0:
            rhs = values - ((1.0 - theta) * dt) * (self.matrix @ values)
        rhs = np.where(self.edge, pinned, rhs)
        out = self._factor(theta, dt).solve(rhs)
        # The LU solve leaves roundoff on the identity rows.
        out[self.edge] = pinned[self.edge]
        return out


def evolve(h: BandedOperator, terminal: Field, cfg: EvolutionConfig) -> Field:
    """
    Applies the pricing kernel to a terminal field.

    Args:
        h: Hamiltonian on the terminal field's grid.
        terminal: Field at t*, e.g. a payoff or a vacuum candidate.
        cfg: Time-stepping settings.

    Returns:
        Field: The evolved field at t = t* - T.
    """
    if h.grid != terminal.grid or (cfg.grid is not None and cfg.grid != h.grid):
        logger.error("Evolution operator, terminal field and config grid differ")
        raise GridMismatchError("Hamiltonian, terminal field and config must share a grid.")

    dt = cfg.dt
    min_spacing = min(h.grid.spacing)
    if cfg.scheme is Scheme.CRANK_NICOLSON and dt > min_spacing:
        logger.warning(
            "Crank-Nicolson with dt=%.3g > dx=%.3g may oscillate near payoff kinks",
            dt,
            min_spacing,
        )

    stepper = _Stepper(h, _edge_mask(h.grid.shape))
    pinned = terminal.values.copy()
    values = terminal.values.copy()

    startup = min(cfg.rannacher_steps, cfg.steps) if cfg.scheme is Scheme.CRANK_NICOLSON else 0
    theta = 0.5 if cfg.scheme is Scheme.CRANK_NICOLSON else 1.0

    for n in range(cfg.steps):
        if n < startup:
            values = stepper.step(values, pinned, 1.0, 0.5 * dt)
            values = stepper.step(values, pinned, 1.0, 0.5 * dt)
        else:
            values = stepper.step(values, pinned, theta, dt)
        if not np.all(np.isfinite(values)):
            logger.error("Non-finite values after step %d of %d", n + 1, cfg.steps)
            raise NonFiniteValuesError(f"Evolution produced non-finite values at step {n + 1}.")

    logger.debug(
        "Evolved %s over T=%s in %d %s steps", h.name, cfg.maturity, cfg.steps, cfg.scheme.value
    )
    return Field(h.grid, values)


def martingale_evolution_check(
    h: BandedOperator, vacuum: Field, cfg: EvolutionConfig
) -> float:
    """
    Interior max of |evolve(h, vacuum) - vacuum| / |vacuum|. A martingale
    state is a fixed point of the kernel, so this stays at truncation level.

    Points where the vacuum vanishes contribute their absolute deviation.
    """
    evolved = evolve(h, vacuum, cfg)
    interior = interior_slices(h.grid.shape, h.interior_margin)
    deviation = np.abs(evolved.as_array() - vacuum.as_array())[interior]
    scale = np.abs(vacuum.as_array())[interior]
    relative = np.divide(deviation, scale, out=deviation.copy(), where=scale > 0)
    result = float(np.max(relative))
    logger.info("Martingale evolution deviation for %s: %.3e", h.name, result)
    return result
