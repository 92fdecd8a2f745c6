"""
Truncated Merton-Garman potential in the fields (phi_x, phi_y) and its
stationary points.

With B = r - e^y/2 and A = lambda e^-y + mu - (zeta²/2) e^{2y(alpha-1)}:

    V = -2 B phi_x phi_y² - 2 A phi_x² phi_y + r phi_x² phi_y²

Nontrivial stationary points obey B phi_y = A phi_x. They are saddles in
general, so they are reported as stationary, never as minima.
"""

import itertools
from typing import Iterable, List, Optional, Tuple

import numpy as np

from config.config import config
from config.logger import setup_logger
from core.params import MgParams
from potentials.vacuum import Classification, VacuumKind, VacuumSolution
from utils.errors import MaxIterationsError, ZeroRateError

logger = setup_logger(__name__)

NEWTON_MAX_ITER = 100
TRIVIAL_RTOL = 1e-12
ORIGIN_RTOL = 1e-2


def _coefficients(p: MgParams, y: float) -> Tuple[float, float]:
    return float(p.volatility_drift(y)), float(p.price_drift(y))


def mg_potential(p: MgParams, y: float, phi_x: float, phi_y: float) -> float:
    a, b = _coefficients(p, y)
    return (
        -2.0 * b * phi_x * phi_y**2
        - 2.0 * a * phi_x**2 * phi_y
        + p.r * phi_x**2 * phi_y**2
    )


def mg_potential_gradient(p: MgParams, y: float, phi_x: float, phi_y: float) -> np.ndarray:
    a, b = _coefficients(p, y)
    return np.array(
        [
            -2.0 * b * phi_y**2 - 4.0 * a * phi_x * phi_y + 2.0 * p.r * phi_x * phi_y**2,
            -4.0 * b * phi_x * phi_y - 2.0 * a * phi_x**2 + 2.0 * p.r * phi_x**2 * phi_y,
        ]
    )


def mg_potential_hessian(p: MgParams, y: float, phi_x: float, phi_y: float) -> np.ndarray:
    a, b = _coefficients(p, y)
    vxx = -4.0 * a * phi_y + 2.0 * p.r * phi_y**2
    vyy = -4.0 * b * phi_x + 2.0 * p.r * phi_x**2
    vxy = -4.0 * b * phi_y - 4.0 * a * phi_x + 4.0 * p.r * phi_x * phi_y
    return np.array([[vxx, vxy], [vxy, vyy]])


def _reduced_gradient(p: MgParams, y: float, phi_x: float, phi_y: float) -> np.ndarray:
    """Gradient with the phi_y and phi_x factors divided out; the origin becomes a simple root."""
    a, b = _coefficients(p, y)
    cross = 2.0 * p.r * phi_x * phi_y
    return np.array(
        [
            -2.0 * b * phi_y - 4.0 * a * phi_x + cross,
            -4.0 * b * phi_y - 2.0 * a * phi_x + cross,
        ]
    )


def _reduced_jacobian(p: MgParams, y: float, phi_x: float, phi_y: float) -> np.ndarray:
    a, b = _coefficients(p, y)
    return np.array(
        [
            [-4.0 * a + 2.0 * p.r * phi_y, -2.0 * b + 2.0 * p.r * phi_x],
            [-2.0 * a + 2.0 * p.r * phi_y, -4.0 * b + 2.0 * p.r * phi_x],
        ]
    )


def _damped_newton(p: MgParams, y: float, start: Tuple[float, float]) -> Optional[np.ndarray]:
    """
    Newton iteration on the reduced gradient with step halving on its norm.

    Runs until the residual stops decreasing, so the returned point sits on
    the floating point floor of whichever root it reached. Returns None on a
    singular Jacobian or when the iteration budget runs out.
    """
    point = np.array(start, dtype=float)
    residual = _reduced_gradient(p, y, *point)

    for iteration in range(NEWTON_MAX_ITER):
        norm = np.max(np.abs(residual))
        if norm == 0.0:
            return point
        try:
            step = np.linalg.solve(_reduced_jacobian(p, y, *point), -residual)
        except np.linalg.LinAlgError:
            logger.debug("Singular Jacobian at %s", point)
            return None

        damping = 1.0
        while damping > 1e-6:
            candidate = point + damping * step
            candidate_residual = _reduced_gradient(p, y, *candidate)
            if np.max(np.abs(candidate_residual)) < norm:
                break
            damping *= 0.5
        else:
            logger.debug("Newton from %s settled after %d iterations", start, iteration)
            return point
        point, residual = candidate, candidate_residual

    return None


def _starts(scale: float) -> Iterable[Tuple[float, float]]:
    yield (1.0, 1.0)
    coarse = [-3.0, -1.0, -0.3, 0.3, 1.0, 3.0]
    for sx, sy in itertools.product(coarse, coarse):
        yield (sx * scale, sy * scale)


def _is_stationary(p: MgParams, y: float, point: np.ndarray, scale: float, tol: float) -> bool:
    """Nontrivial stationary point: away from the origin, zero gradient and B phi_y = A phi_x."""
    a, b = _coefficients(p, y)
    phi_x, phi_y = (float(v) for v in point)
    if max(abs(phi_x), abs(phi_y)) <= ORIGIN_RTOL * scale:
        return False
    if np.max(np.abs(mg_potential_gradient(p, y, phi_x, phi_y))) > tol:
        return False
    return abs(b * phi_y - a * phi_x) <= tol


def _is_trivial(value: float, *terms: float) -> bool:
    return abs(value) <= TRIVIAL_RTOL * max(abs(t) for t in terms)


def mg_vacuum(
    p: MgParams, y: float, tol: float = config.QLAB_TOL_STATIONARITY
) -> VacuumSolution:
    """
    Nontrivial stationary point of the truncated MG potential at log-variance y.

    Args:
        p: Merton-Garman parameters with r != 0.
        y: Log-variance.
        tol: Bound on both partial derivatives at the returned point.

    Returns:
        VacuumSolution: phi_x, phi_y, S = phi_x phi_y and the ratio A/B.
            PriceTrivial when B = 0, VolTrivial when A = 0.
    """
    if p.r == 0:
        logger.error("mg_vacuum needs r != 0")
        raise ZeroRateError("The MG vacuum is undefined for r = 0.")

    a, b = _coefficients(p, y)
    ey = float(np.exp(y))
    price_trivial = _is_trivial(b, p.r, 0.5 * ey)
    vol_trivial = _is_trivial(
        a,
        p.lam * float(np.exp(-y)),
        p.mu,
        0.5 * p.zeta**2 * float(np.exp(2.0 * y * (p.alpha - 1.0))),
    )

    # Degenerate cases are lines of stationary points; the free coordinate is
    # normalized to 1.
    if price_trivial and vol_trivial:
        return VacuumSolution(
            VacuumKind.MG_STATIONARY,
            {"phi_x": 0.0, "phi_y": 0.0, "S": 0.0},
            Classification.TRIVIAL,
        )
    if price_trivial:
        logger.warning("B(y) = 0 at y=%s: price-trivial vacuum line phi_x = 0", y)
        return VacuumSolution(
            VacuumKind.MG_STATIONARY,
            {"phi_x": 0.0, "phi_y": 1.0, "S": 0.0},
            Classification.PRICE_TRIVIAL,
        )
    if vol_trivial:
        logger.warning("A(y) = 0 at y=%s: volatility-trivial vacuum line phi_y = 0", y)
        return VacuumSolution(
            VacuumKind.MG_STATIONARY,
            {"phi_x": 1.0, "phi_y": 0.0, "S": 0.0},
            Classification.VOL_TRIVIAL,
            ratio=a / b,
        )

    scale = (abs(a) + abs(b)) / abs(p.r)
    for start in _starts(scale):
        point = _damped_newton(p, y, start)
        if point is None or not _is_stationary(p, y, point, scale, tol):
            continue
        phi_x, phi_y = (float(v) for v in point)
        logger.info(
            "MG vacuum at y=%s: phi_x=%.12g phi_y=%.12g ratio=%.12g", y, phi_x, phi_y, a / b
        )
        return VacuumSolution(
            VacuumKind.MG_STATIONARY,
            {"phi_x": phi_x, "phi_y": phi_y, "S": phi_x * phi_y},
            Classification.NON_TRIVIAL,
            ratio=a / b,
        )

    logger.error("No nontrivial stationary point found at y=%s", y)
    raise MaxIterationsError(f"Newton found no nontrivial stationary point at y={y}.")


def mg_stationarity_errors(p: MgParams, y: float, solution: VacuumSolution) -> Tuple[float, float]:
    """
    Checks a returned MG vacuum against the stationarity equations.

    Returns:
        Tuple[float, float]: max |dV/dphi| at the point and |B phi_y - A phi_x|.
    """
    a, b = _coefficients(p, y)
    phi_x, phi_y = solution.values["phi_x"], solution.values["phi_y"]
    gradient = mg_potential_gradient(p, y, phi_x, phi_y)
    return float(np.max(np.abs(gradient))), abs(b * phi_y - a * phi_x)


def mg_vacuum_curve(p: MgParams, ys: Iterable[float]) -> List[Tuple[float, VacuumSolution]]:
    """Equilibrium vacuum along a sweep of log-variances, in sweep order."""
    return [(float(y), mg_vacuum(p, y)) for y in ys]


def lx_symmetry_residual(p: MgParams, y: float) -> float:
    """
    A(y). Zero iff the drift along the volatility generator vanishes, the
    condition for the price-direction rotation to commute with H_MG.
    """
    return float(p.volatility_drift(y))


def ly_symmetry_residual(p: MgParams, y: float) -> float:
    """B(y) = r - e^y/2, zero iff the price drift term drops out of H_MG."""
    return float(p.price_drift(y))
