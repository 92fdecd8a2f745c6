import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from config.logger import setup_logger
from core.field import Field, sample
from core.grid import Grid1D
from core.params import BsParams
from operators.hamiltonians import build_bs_hamiltonian
from pricing.evolution import EvolutionConfig, evolve
from utils.errors import (
    InconsistentRecordError,
    InvalidInputError,
    NonFiniteValuesError,
    StrikeOutsideGridError,
)

logger = setup_logger(__name__)


@dataclass(frozen=True)
class PricingResult:
    """
    European call priced with the kernel, next to its closed-form oracle.

    Attributes:
        values: Evolved option values on the log-price grid.
        spot_price: Linear interpolation of values at x0.
        oracle_price: Closed-form Black-Scholes price at s0 = e^x0.
        rel_error: |spot_price - oracle_price| / oracle_price.
    """

    values: Field
    spot_price: float
    oracle_price: float
    rel_error: float

    def __post_init__(self):
        if not (math.isfinite(self.spot_price) and math.isfinite(self.oracle_price)):
            raise NonFiniteValuesError("Prices must be finite.")
        if not self.rel_error >= 0:
            raise InconsistentRecordError(f"rel_error must be >= 0, got {self.rel_error}.")


def bs_closed_form(s0: float, k: float, p: BsParams, T: float) -> float:
    """
    Black-Scholes price of a European call.

    Args:
        s0: Spot price, > 0.
        k: Strike, > 0.
        p: Black-Scholes parameters.
        T: Time to maturity, > 0.

    Returns:
        float: s0 N(d1) - k e^{-rT} N(d2).
    """
    for name, value in (("s0", s0), ("k", k), ("T", T)):
        if not (math.isfinite(value) and value > 0):
            logger.error("bs_closed_form needs %s > 0, got %s", name, value)
            raise InvalidInputError(f"{name} must be finite and > 0, got {value}.")

    vol = p.sigma * math.sqrt(T)
    d1 = (math.log(s0 / k) + (p.r + 0.5 * p.sigma2) * T) / vol
    d2 = d1 - vol
    return float(s0 * norm.cdf(d1) - k * math.exp(-p.r * T) * norm.cdf(d2))


def price_european_call(
    p: BsParams, grid: Grid1D, k: float, cfg: EvolutionConfig, x0: float
) -> PricingResult:
    """
    Prices a European call by evolving the payoff max(e^x - k, 0) under H_BS.

    Args:
        p: Black-Scholes parameters.
        grid: Log-price grid containing ln(k) and x0.
        k: Strike, > 0.
        cfg: Time-stepping settings; cfg.maturity is the option maturity.
        x0: Log-spot at which the price is read.

    Returns:
        PricingResult: Grid values, spot and oracle prices and their relative error.
    """
    if not (math.isfinite(k) and k > 0) or not grid.contains(math.log(k)):
        logger.error("Strike %s lies outside the grid [%s, %s]", k, grid.x_min, grid.x_max)
        raise StrikeOutsideGridError(
            f"ln(k) for k={k} must lie in [{grid.x_min}, {grid.x_max}]."
        )
    if not grid.contains(x0):
        logger.error("Spot x0=%s lies outside the grid", x0)
        raise InvalidInputError(f"x0={x0} must lie in [{grid.x_min}, {grid.x_max}].")

    payoff = sample(grid, lambda x: np.maximum(np.exp(x) - k, 0.0))
    values = evolve(build_bs_hamiltonian(p, grid), payoff, cfg)

    spot_price = float(np.interp(x0, grid.points, values.values))
    oracle_price = bs_closed_form(math.exp(x0), k, p, cfg.maturity)
    error = abs(spot_price - oracle_price)
    rel_error = error / oracle_price if oracle_price > 0 else error

    logger.info(
        "Call k=%s at x0=%s: kernel %.10g, closed form %.10g, rel. error %.3e",
        k,
        x0,
        spot_price,
        oracle_price,
        rel_error,
    )
    return PricingResult(values, spot_price, oracle_price, rel_error)


def monotonicity_defect(values: Field) -> float:
    """
    Largest drop between neighbouring interior values of a call price in x,
    relative to max(1, max |value|). Zero for a nondecreasing price.
    """
    interior = values.values[1:-1]
    drop = float(max(0.0, -np.min(np.diff(interior)))) if interior.size > 1 else 0.0
    return drop / max(1.0, float(np.max(np.abs(values.values))))
