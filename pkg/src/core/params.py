import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from config.logger import setup_logger
from utils.errors import InvalidParamsError

logger = setup_logger(__name__)


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        logger.error("Parameter %s must be finite, got %s", name, value)
        raise InvalidParamsError(f"Parameter '{name}' must be finite, got {value}.")


@dataclass(frozen=True)
class BsParams:
    """
    Black-Scholes market parameters.

    Attributes:
        r: Risk-free rate (1/time), r >= 0.
        sigma: Volatility (1/sqrt(time)), sigma > 0.
    """

    r: float
    sigma: float

    def __post_init__(self):
        _require_finite("r", self.r)
        _require_finite("sigma", self.sigma)
        if self.r < 0:
            raise InvalidParamsError(f"Risk-free rate must be >= 0, got {self.r}.")
        if self.sigma <= 0:
            raise InvalidParamsError(f"Volatility must be > 0, got {self.sigma}.")

    @classmethod
    def from_variance(cls, r: float, sigma2: float) -> "BsParams":
        """
        Builds the parameters from the variance sigma², the convention used
        on the command line.

        Args:
            r: Risk-free rate.
            sigma2: Variance, must be > 0.

        Returns:
            BsParams: The parameter record.
        """
        _require_finite("sigma2", sigma2)
        if sigma2 <= 0:
            raise InvalidParamsError(f"Variance must be > 0, got {sigma2}.")
        params = cls(r=r, sigma=math.sqrt(sigma2))
        # Keep the variance as given; sqrt(v)² is not always v in floating point.
        object.__setattr__(params, "_variance", float(sigma2))
        return params

    @property
    def sigma2(self) -> float:
        return getattr(self, "_variance", self.sigma * self.sigma)

    @property
    def stable(self) -> bool:
        """True iff sigma² <= 2r. Exposed as a flag, never enforced."""
        return self.sigma2 <= 2.0 * self.r or math.isclose(
            self.sigma2, 2.0 * self.r, rel_tol=1e-12
        )


@dataclass(frozen=True)
class MgParams:
    """
    Merton-Garman market parameters. The variance is sigma² = e^y.

    Attributes:
        r: Risk-free rate, r >= 0.
        lam: Volatility drift offset (lambda).
        mu: Volatility drift slope.
        zeta: Volatility of volatility, zeta >= 0.
        alpha: Volatility exponent.
        rho: Price-volatility correlation in [-1, 1].
    """

    r: float
    lam: float
    mu: float
    zeta: float
    alpha: float
    rho: float

    def __post_init__(self):
        for name in ("r", "lam", "mu", "zeta", "alpha", "rho"):
            _require_finite(name, getattr(self, name))
        if self.r < 0:
            raise InvalidParamsError(f"Risk-free rate must be >= 0, got {self.r}.")
        if self.zeta < 0:
            raise InvalidParamsError(f"zeta must be >= 0, got {self.zeta}.")
        if not -1.0 <= self.rho <= 1.0:
            raise InvalidParamsError(f"rho must lie in [-1, 1], got {self.rho}.")

    # Coefficient functions of the MG Hamiltonian. All accept scalars or arrays.

    def price_drift(self, y: ArrayLike) -> np.ndarray:
        """B(y) = r - e^y/2, the coefficient of the price generator's drift."""
        return self.r - 0.5 * np.exp(y)

    def volatility_drift(self, y: ArrayLike) -> np.ndarray:
        """A(y) = lambda e^-y + mu - (zeta²/2) e^{2y(alpha-1)}."""
        y = np.asarray(y, dtype=float)
        return (
            self.lam * np.exp(-y)
            + self.mu
            - 0.5 * self.zeta**2 * np.exp(2.0 * y * (self.alpha - 1.0))
        )

    def extended_drift(self, y: ArrayLike) -> np.ndarray:
        """
        G(y) = lambda e^-y + mu + (zeta²/2) e^{2y(alpha-1)} + rho zeta e^{y(alpha-1/2)}.

        The MG Hamiltonian maps e^{x+y} to -G(y) e^{x+y}.
        """
        y = np.asarray(y, dtype=float)
        return (
            self.lam * np.exp(-y)
            + self.mu
            + 0.5 * self.zeta**2 * np.exp(2.0 * y * (self.alpha - 1.0))
            + self.rho * self.zeta * np.exp(y * (self.alpha - 0.5))
        )

    def constraint(self, y: ArrayLike) -> np.ndarray:
        """
        lambda + e^y (mu + (zeta²/2) e^{2y(alpha-1)} + rho zeta e^{y(alpha-1/2)}),
        which equals e^y G(y) and vanishes where e^{x+y} is annihilated.
        """
        y = np.asarray(y, dtype=float)
        return self.lam + np.exp(y) * (
            self.mu
            + 0.5 * self.zeta**2 * np.exp(2.0 * y * (self.alpha - 1.0))
            + self.rho * self.zeta * np.exp(y * (self.alpha - 0.5))
        )
