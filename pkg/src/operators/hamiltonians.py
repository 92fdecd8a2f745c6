import numpy as np

from config.logger import setup_logger
from core.grid import Grid1D, Grid2D
from core.params import BsParams, MgParams
from operators.banded import BandedOperator, identity
from operators.stencils import d2_dx2, d2_dxdy, d2_dy2, d_dx, d_dy

logger = setup_logger(__name__)


def build_bs_hamiltonian(p: BsParams, grid: Grid1D) -> BandedOperator:
    """
    Black-Scholes Hamiltonian H = -(sigma²/2) p² + (sigma²/2 - r) p + r,
    with p realized as d/dx.

    Args:
        p: Black-Scholes parameters.
        grid: Log-price grid.

    Returns:
        BandedOperator: The assembled Hamiltonian.
    """
    half_var = 0.5 * p.sigma2
    h = (-half_var) * d2_dx2(grid) + (half_var - p.r) * d_dx(grid) + p.r * identity(grid)
    logger.debug("Assembled H_BS on %d points (r=%s, sigma=%s)", grid.n, p.r, p.sigma)
    return BandedOperator(grid, h.bands, h.interior_margin, "H_BS")


def build_mg_hamiltonian(p: MgParams, grid2: Grid2D) -> BandedOperator:
    """
    Merton-Garman Hamiltonian on the (x, y) grid, sigma² = e^y:

        H = -(e^y/2) p_x² - (r - e^y/2) p_x - A(y) p_y
            - rho zeta e^{y(alpha-1/2)} p_x p_y - zeta² e^{2y(alpha-1)} p_y² + r

    Every coefficient depends on y only and is applied row by row.

    Args:
        p: Merton-Garman parameters.
        grid2: Grid over log-price and log-variance.

    Returns:
        BandedOperator: The assembled Hamiltonian.
    """
    _, y = grid2.mesh()
    ey = np.exp(y)

    terms = [
        d2_dx2(grid2).scale_rows(-0.5 * ey),
        d_dx(grid2).scale_rows(-p.price_drift(y)),
        d_dy(grid2).scale_rows(-p.volatility_drift(y)),
        d2_dxdy(grid2).scale_rows(-p.rho * p.zeta * np.exp(y * (p.alpha - 0.5))),
        d2_dy2(grid2).scale_rows(-(p.zeta**2) * np.exp(2.0 * y * (p.alpha - 1.0))),
        p.r * identity(grid2),
    ]
    h = terms[0]
    for term in terms[1:]:
        h = h + term

    logger.debug("Assembled H_MG on %dx%d points", *grid2.shape)
    return BandedOperator(grid2, h.bands, h.interior_margin, "H_MG")
