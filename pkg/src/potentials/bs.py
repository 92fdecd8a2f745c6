import math

from config.logger import setup_logger
from core.params import BsParams
from potentials.vacuum import Classification, VacuumKind, VacuumSolution
from utils.errors import ZeroRateError

logger = setup_logger(__name__)


def bs_potential(p: BsParams, phi: float) -> float:
    """Second-order truncated BS potential V = 2(sigma²/2 - r) phi + r phi²."""
    return 2.0 * (0.5 * p.sigma2 - p.r) * phi + p.r * phi * phi


def bs_potential_slope(p: BsParams, phi: float) -> float:
    """dV/dphi = 2(sigma²/2 - r) + 2 r phi."""
    return 2.0 * (0.5 * p.sigma2 - p.r) + 2.0 * p.r * phi


def bs_vacuum(p: BsParams) -> VacuumSolution:
    """
    Minimum of the truncated BS potential, phi_vac = 1 - sigma²/(2r).

    Args:
        p: Black-Scholes parameters with r > 0.

    Returns:
        VacuumSolution: Trivial when r = sigma²/2, NonTrivial otherwise.
    """
    if p.r == 0:
        logger.error("bs_vacuum is undefined for r = 0")
        raise ZeroRateError("The BS vacuum 1 - sigma²/(2r) is undefined for r = 0.")
    if not p.stable:
        logger.warning(
            "sigma² = %s exceeds 2r = %s: parameters flagged unstable", p.sigma2, 2 * p.r
        )

    if math.isclose(p.sigma2, 2.0 * p.r, rel_tol=1e-12):
        phi = 0.0
        classification = Classification.TRIVIAL
    else:
        phi = 1.0 - p.sigma2 / (2.0 * p.r)
        classification = Classification.NON_TRIVIAL

    logger.info("BS vacuum phi=%.17g (%s)", phi, classification.value)
    return VacuumSolution(VacuumKind.BS_QUADRATIC, {"phi": phi}, classification)
