"""
Quartic extension of the option-price potential, V(S) = mu2 S² + lam4 S⁴,
its fixed-norm vacuum, and the manifold of degenerate vacua e^{x+y} = s_norm
it traces out in the (y, x) plane.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

from config.config import config
from config.logger import setup_logger
from core.params import _require_finite
from potentials.vacuum import Classification, VacuumKind, VacuumSolution
from utils.errors import (
    DegeneratePotentialError,
    InconsistentRecordError,
    NontrivialVacuumRequiredError,
)

logger = setup_logger(__name__)


@dataclass(frozen=True)
class QuarticParams:
    """
    Coefficients of the quartic potential. Named apart from the MG drift
    parameters mu and lambda on purpose.

    Attributes:
        mu2: Quadratic coefficient.
        lam4: Quartic coefficient.
    """

    mu2: float
    lam4: float

    def __post_init__(self):
        _require_finite("mu2", self.mu2)
        _require_finite("lam4", self.lam4)

    @property
    def nontrivial(self) -> bool:
        return self.lam4 < 0

    @property
    def s_norm(self) -> float:
        """sqrt(-mu2/lam4), the norm fixed by a nontrivial vacuum."""
        if not (self.lam4 < 0 and self.mu2 > 0):
            raise NontrivialVacuumRequiredError(
                f"No nonzero vacuum norm for mu2={self.mu2}, lam4={self.lam4}."
            )
        return math.sqrt(-self.mu2 / self.lam4)


@dataclass(frozen=True)
class VacuumManifoldPoint:
    """A point (y, x) on the degenerate vacuum manifold e^{x+y} = s_norm."""

    y: float
    x: float
    s_norm: float

    def __post_init__(self):
        if not math.isclose(
            math.exp(self.x + self.y), self.s_norm, rel_tol=config.QLAB_TOL_MANIFOLD
        ):
            raise InconsistentRecordError(
                f"Point (y={self.y}, x={self.x}) is off the manifold e^(x+y)={self.s_norm}."
            )

    def to_dict(self) -> dict:
        return {"y": self.y, "x": self.x, "s_norm": self.s_norm}


def quartic_potential(q: QuarticParams, s: float) -> float:
    return q.mu2 * s * s + q.lam4 * s**4


def quartic_vacuum(q: QuarticParams) -> VacuumSolution:
    """
    Nonzero roots of V(S) = mu2 S² + lam4 S⁴.

    Args:
        q: Quartic coefficients.

    Returns:
        VacuumSolution: S is the admissible (positive) root, S_plus and
            S_minus are both roots. Trivial with every value 0 when no real
            nonzero root exists.
    """
    if q.lam4 == 0 and q.mu2 != 0:
        logger.error("Quartic potential degenerates to mu2 S² with lam4 = 0")
        raise DegeneratePotentialError(
            f"lam4 = 0 with mu2 = {q.mu2} leaves no quartic term to fix the norm."
        )

    if q.lam4 < 0 and q.mu2 > 0:
        s = q.s_norm
        values = {"S": s, "S_plus": s, "S_minus": -s}
        classification = Classification.NON_TRIVIAL
    else:
        if q.lam4 < 0 and q.mu2 < 0:
            logger.warning(
                "-mu2/lam4 = %s < 0: no real nonzero root, vacuum is trivial",
                -q.mu2 / q.lam4,
            )
        values = {"S": 0.0, "S_plus": 0.0, "S_minus": 0.0}
        classification = Classification.TRIVIAL

    logger.info("Quartic vacuum %s (%s)", values, classification.value)
    return VacuumSolution(VacuumKind.QUARTIC_FIXED_NORM, values, classification)


def vacuum_manifold(q: QuarticParams, ys: Iterable[float]) -> List[VacuumManifoldPoint]:
    """
    Positive branch x = ln(s_norm) - y for each requested log-variance, in
    the order given.
    """
    if not q.nontrivial or q.mu2 <= 0:
        logger.error("Vacuum manifold requested for a trivial quartic vacuum")
        raise NontrivialVacuumRequiredError(
            f"The vacuum manifold needs lam4 < 0 and mu2 > 0, got mu2={q.mu2}, lam4={q.lam4}."
        )

    s_norm = q.s_norm
    log_norm = math.log(s_norm)
    points = [VacuumManifoldPoint(y=float(y), x=log_norm - float(y), s_norm=s_norm) for y in ys]

    if len(points) > 1:
        ordered = sorted(points, key=lambda pt: pt.y)
        xs = np.array([pt.x for pt in ordered])
        if np.any(np.diff(xs) >= 0):
            logger.warning("Manifold x is not strictly decreasing in y (repeated y values?)")

    logger.info("Vacuum manifold with %d point(s), s_norm=%.17g", len(points), s_norm)
    return points


@dataclass(frozen=True)
class ManifoldErrors:
    """
    Deviations of sampled manifold points from the vacuum relations.

    Attributes:
        norm: Max relative error of e^{x+y} against s_norm.
        slope: Max |dx + dy| between consecutive points.
        flat_direction: Max |V(e^{x+y}) - V(s_norm)|, scaled by max(1, |mu2| s_norm²).
    """

    norm: float
    slope: float
    flat_direction: float


def quartic_root_residual(q: QuarticParams, solution: VacuumSolution) -> float:
    """Max relative |V(S)| over both roots; 0 for the trivial vacuum."""
    worst = 0.0
    for key in ("S_plus", "S_minus"):
        s = solution.values[key]
        scale = max(abs(q.mu2 * s * s), abs(q.lam4 * s**4))
        if scale > 0:
            worst = max(worst, abs(quartic_potential(q, s)) / scale)
    return worst


def manifold_errors(q: QuarticParams, points: List[VacuumManifoldPoint]) -> ManifoldErrors:
    s_norm = q.s_norm
    reference = quartic_potential(q, s_norm)
    norm = max((abs(math.exp(pt.x + pt.y) - s_norm) / s_norm for pt in points), default=0.0)
    slope = max((abs((b.x - a.x) + (b.y - a.y)) for a, b in zip(points, points[1:])), default=0.0)
    flat = max(
        (abs(quartic_potential(q, math.exp(pt.x + pt.y)) - reference) for pt in points),
        default=0.0,
    )
    return ManifoldErrors(norm, slope, flat / max(1.0, abs(q.mu2 * s_norm**2)))
