"""
Spontaneous symmetry breaking checks: a generator that commutes with the
Hamiltonian but does not annihilate the vacuum is broken.
"""

from dataclasses import dataclass

import numpy as np

from config.config import config
from config.logger import setup_logger
from core.field import Field, inner_product
from operators.banded import BandedOperator, apply, commutator, interior_norm
from operators.stencils import d_dx
from utils.errors import GridMismatchError, InconsistentRecordError

logger = setup_logger(__name__)


@dataclass(frozen=True)
class SymmetryReport:
    """
    Outcome of testing one generator against a Hamiltonian and a vacuum.

    Attributes:
        generator_name: Label of the generator.
        commutes_with_h: Interior commutator norm within tolerance.
        action_norm_ratio: ||generator S|| / ||S|| over interior rows.
        broken: commutes_with_h and action_norm_ratio above the threshold.
        commutator_norm: Interior norm of [H, generator].
    """

    generator_name: str
    commutes_with_h: bool
    action_norm_ratio: float
    broken: bool
    commutator_norm: float = 0.0

    def __post_init__(self):
        # Only symmetries can be spontaneously broken.
        if self.broken and not self.commutes_with_h:
            raise InconsistentRecordError(
                f"Generator {self.generator_name} reported broken without commuting."
            )
        if not self.action_norm_ratio >= 0:
            raise InconsistentRecordError("action_norm_ratio must be >= 0.")


@dataclass(frozen=True)
class CommutatorExpectation:
    """
    Quadrature forms of the commutator expectation on a vacuum S.

    Attributes:
        i1: Integral of S times the finite-difference derivative of phibar.
        i2: Integral of S times the analytic derivative phi.
        centered: Integral of S (phibar - shift), zero by construction.
        shift: Constant removed from phibar so its S-weighted mean vanishes.
    """

    i1: float
    i2: float
    centered: float
    shift: float


def broken_generator_report(
    h: BandedOperator,
    gen: BandedOperator,
    vacuum: Field,
    tolerance: float = config.QLAB_TOL_COMMUTATOR,
    threshold: float = config.QLAB_TOL_BROKEN,
) -> SymmetryReport:
    """
    Tests whether ``gen`` is a spontaneously broken generator of ``h``.

    Args:
        h: Hamiltonian.
        gen: Candidate generator on the same grid.
        vacuum: Vacuum state sampled on the same grid.
        tolerance: Relative tolerance on the interior commutator norm, scaled
            by the interior norms of h and gen.
        threshold: Minimum action ratio counted as a nonzero action.

    Returns:
        SymmetryReport: The ledger entry for this generator.
    """
    if h.grid != gen.grid or h.grid != vacuum.grid:
        logger.error("Hamiltonian, generator and vacuum must share a grid")
        raise GridMismatchError("Hamiltonian, generator and vacuum must share a grid.")

    comm = commutator(h, gen)
    comm_norm = interior_norm(comm)
    scale = max(1.0, interior_norm(h) * interior_norm(gen))
    commutes = comm_norm <= tolerance * scale

    margin = max(h.interior_margin, gen.interior_margin)
    action = interior_norm(apply(gen, vacuum), margin)
    ratio = action / interior_norm(vacuum, margin)

    report = SymmetryReport(
        generator_name=gen.name,
        commutes_with_h=commutes,
        action_norm_ratio=ratio,
        broken=commutes and ratio > threshold,
        commutator_norm=comm_norm,
    )
    logger.info(
        "Generator %s vs %s: commutator %.3e, action ratio %.6f, broken=%s",
        gen.name,
        h.name,
        comm_norm,
        ratio,
        report.broken,
    )
    return report


def commutator_expectation(
    S: Field, phibar: Field, phibar_deriv_analytic: Field
) -> CommutatorExpectation:
    """
    Evaluates <S|[p, phibar]|S> as the integral of S d(phibar)/dx, both with
    the finite-difference generator (i1) and with the analytic derivative
    phi = d(phibar)/dx (i2). Their agreement to O(dx²) checks p phibar = phi.

    Also returns the shift that makes <S|phibar|S> vanish on the truncated
    domain, the finite-grid stand-in for the Nambu-Goldstone condition.

    Args:
        S: Vacuum state on a 1D grid.
        phibar: Shifted field.
        phibar_deriv_analytic: Analytic derivative phi of phibar.

    Returns:
        CommutatorExpectation: i1, i2, the centered expectation and the shift.
    """
    if not (S.grid == phibar.grid == phibar_deriv_analytic.grid):
        logger.error("Commutator expectation needs fields on one grid")
        raise GridMismatchError("S, phibar and phi must share a grid.")

    i1 = inner_product(S, apply(d_dx(S.grid), phibar))
    i2 = inner_product(S, phibar_deriv_analytic)

    ones = Field(S.grid, np.ones_like(S.values))
    shift = inner_product(S, phibar) / inner_product(S, ones)
    centered = inner_product(S, Field(S.grid, phibar.values - shift))

    logger.debug("Commutator expectation i1=%.12g i2=%.12g shift=%.6g", i1, i2, shift)
    return CommutatorExpectation(i1=i1, i2=i2, centered=centered, shift=shift)
