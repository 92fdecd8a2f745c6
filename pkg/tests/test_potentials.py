"""Tests for field-space potentials and their vacua."""

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from core.params import BsParams, MgParams
from potentials.bs import bs_potential, bs_potential_slope, bs_vacuum
from potentials.mg import (
    lx_symmetry_residual,
    ly_symmetry_residual,
    mg_potential,
    mg_potential_gradient,
    mg_potential_hessian,
    mg_stationarity_errors,
    mg_vacuum,
    mg_vacuum_curve,
)
from potentials.quartic import (
    QuarticParams,
    VacuumManifoldPoint,
    manifold_errors,
    quartic_potential,
    quartic_root_residual,
    quartic_vacuum,
    vacuum_manifold,
)
from potentials.vacuum import Classification, VacuumKind, VacuumSolution
from utils.errors import (
    DegeneratePotentialError,
    InconsistentRecordError,
    NonFiniteValuesError,
    NontrivialVacuumRequiredError,
    ZeroRateError,
)


class TestBsPotential:
    """Quadratic truncation of the BS potential."""

    def test_hand_values(self):
        p = BsParams(r=0.05, sigma=0.2)
        assert bs_potential(p, 0.0) == 0.0
        assert bs_potential(p, 1.0) == pytest.approx(-0.01, abs=1e-15)

    def test_pure_quadratic_when_linear_term_cancels(self):
        p = BsParams.from_variance(0.05, 0.1)
        assert bs_potential(p, 3.0) == pytest.approx(0.05 * 9.0, rel=1e-15)

    def test_documented_vacuum(self):
        solution = bs_vacuum(BsParams.from_variance(0.05, 0.05))
        assert solution.values["phi"] == 0.5
        assert solution.classification is Classification.NON_TRIVIAL
        assert solution.kind is VacuumKind.BS_QUADRATIC

    def test_trivial_vacuum(self):
        solution = bs_vacuum(BsParams.from_variance(0.05, 0.1))
        assert solution.values["phi"] == 0.0
        assert solution.classification is Classification.TRIVIAL

    def test_small_volatility_limit(self):
        solution = bs_vacuum(BsParams(r=0.05, sigma=1e-8))
        assert solution.values["phi"] == pytest.approx(1.0, abs=1e-12)

    def test_zero_rate(self):
        with pytest.raises(ZeroRateError):
            bs_vacuum(BsParams(r=0.0, sigma=0.2))

    def test_unstable_parameters_are_flagged(self, caplog):
        bs_vacuum(BsParams.from_variance(0.05, 0.5))
        assert any("unstable" in record.message for record in caplog.records)

    @given(sigma2=st.floats(0.001, 1.0), r=st.floats(0.01, 0.5))
    def test_vacuum_is_grid_scan_minimum(self, sigma2, r):
        p = BsParams.from_variance(r, sigma2)
        phi = bs_vacuum(p).values["phi"]
        assume(-2.0 <= phi <= 2.0)
        scan = np.arange(-20000, 20001) * 1e-4
        values = 2.0 * (0.5 * p.sigma2 - p.r) * scan + p.r * scan**2
        assert abs(scan[np.argmin(values)] - phi) <= 1e-4
        assert abs(bs_potential_slope(p, phi)) <= 1e-12


class TestMgPotential:
    """Cubic and quartic truncation of the MG potential."""

    def test_vanishes_on_axes(self, mg_hand_params, hand_y):
        assert mg_potential(mg_hand_params, hand_y, 0.0, 2.0) == 0.0
        assert mg_potential(mg_hand_params, hand_y, 2.0, 0.0) == 0.0

    def test_hand_value(self, mg_hand_params, hand_y):
        assert mg_potential(mg_hand_params, hand_y, 1.0, 1.0) == pytest.approx(-0.23, abs=1e-14)

    def test_homogeneity(self, mg_hand_params, hand_y):
        p, y = mg_hand_params, hand_y
        a, b = float(p.volatility_drift(y)), float(p.price_drift(y))
        cubic = -2.0 * b * 0.3 * 0.7**2 - 2.0 * a * 0.3**2 * 0.7
        quartic = p.r * 0.3**2 * 0.7**2
        scaled = mg_potential(p, y, 0.6, 1.4)
        assert scaled == pytest.approx(8.0 * cubic + 16.0 * quartic, rel=1e-12)

    def test_gradient_matches_finite_differences(self, mg_hand_params, hand_y):
        p, y, h = mg_hand_params, hand_y, 1e-6
        point = (0.8, -1.3)
        grad = mg_potential_gradient(p, y, *point)
        fd_x = (mg_potential(p, y, point[0] + h, point[1]) - mg_potential(p, y, point[0] - h, point[1])) / (2 * h)
        fd_y = (mg_potential(p, y, point[0], point[1] + h) - mg_potential(p, y, point[0], point[1] - h)) / (2 * h)
        assert grad == pytest.approx([fd_x, fd_y], rel=1e-6)

    def test_hessian_is_symmetric(self, mg_hand_params, hand_y):
        hess = mg_potential_hessian(mg_hand_params, hand_y, 0.4, 0.9)
        assert hess[0, 1] == hess[1, 0]

    def test_documented_ratio(self, mg_hand_params, hand_y):
        solution = mg_vacuum(mg_hand_params, hand_y)
        assert solution.classification is Classification.NON_TRIVIAL
        assert solution.ratio == pytest.approx(2.3, abs=1e-12)
        phi_x, phi_y = solution.values["phi_x"], solution.values["phi_y"]
        assert phi_y == pytest.approx(2.3 * phi_x, rel=1e-10)
        assert np.max(np.abs(mg_potential_gradient(mg_hand_params, hand_y, phi_x, phi_y))) <= 1e-10
        assert solution.values["S"] == phi_x * phi_y

    def test_vacuum_is_away_from_the_origin(self, mg_hand_params, hand_y):
        solution = mg_vacuum(mg_hand_params, hand_y)
        phi_x, phi_y = solution.values["phi_x"], solution.values["phi_y"]
        # Stationarity with both fields nonzero pins the point to (3B/r, 3A/r).
        assert phi_x == pytest.approx(1.5, rel=1e-9)
        assert phi_y == pytest.approx(3.45, rel=1e-9)
        stationarity, ratio_relation = mg_stationarity_errors(mg_hand_params, hand_y, solution)
        assert stationarity <= 1e-10
        assert ratio_relation <= 1e-10

    @given(
        r=st.floats(0.01, 0.3),
        lam=st.floats(-1.0, 1.0),
        mu=st.floats(-1.0, 1.0),
        zeta=st.floats(0.0, 1.0),
        alpha=st.floats(0.0, 2.0),
        y=st.floats(-2.0, 1.0),
    )
    def test_newton_stationary_point(self, r, lam, mu, zeta, alpha, y):
        p = MgParams(r=r, lam=lam, mu=mu, zeta=zeta, alpha=alpha, rho=0.0)
        a, b = float(p.volatility_drift(y)), float(p.price_drift(y))
        assume(abs(b) > 1e-3 and abs(a) > 1e-3)
        assume((abs(a) + abs(b)) / r < 10.0)
        solution = mg_vacuum(p, y)
        phi_x, phi_y = solution.values["phi_x"], solution.values["phi_y"]
        assert np.max(np.abs(mg_potential_gradient(p, y, phi_x, phi_y))) <= 1e-10
        assert abs(b * phi_y - a * phi_x) <= 1e-10
        assert max(abs(phi_x), abs(phi_y)) >= 1e-2 * (abs(a) + abs(b)) / r

    def test_price_trivial(self):
        y = math.log(0.1)
        p = MgParams(r=0.05, lam=0.01, mu=0.02, zeta=0.1, alpha=1.0, rho=0.0)
        solution = mg_vacuum(p, y)
        assert solution.classification is Classification.PRICE_TRIVIAL
        assert abs(ly_symmetry_residual(p, y)) <= 1e-15

    def test_vol_trivial(self):
        y, mu, zeta, alpha = 0.0, 0.003, 0.1, 1.0
        lam = math.exp(y) * (0.5 * zeta**2 * math.exp(2 * y * (alpha - 1)) - mu)
        p = MgParams(r=0.05, lam=lam, mu=mu, zeta=zeta, alpha=alpha, rho=0.0)
        solution = mg_vacuum(p, y)
        assert solution.classification is Classification.VOL_TRIVIAL
        assert abs(lx_symmetry_residual(p, y)) <= 1e-15

    def test_zero_rate(self, hand_y):
        p = MgParams(r=0.0, lam=0.01, mu=0.02, zeta=0.1, alpha=1.0, rho=0.0)
        with pytest.raises(ZeroRateError):
            mg_vacuum(p, hand_y)

    def test_curve_keeps_sweep_order(self, mg_hand_params):
        ys = [0.5, -1.0, -2.0]
        curve = mg_vacuum_curve(mg_hand_params, ys)
        assert [y for y, _ in curve] == ys


class TestSymmetryResiduals:
    """Residual conditions for the rotation generators."""

    def test_ly_hand_value(self):
        p = MgParams(r=0.05, lam=0.0, mu=0.0, zeta=0.0, alpha=1.0, rho=0.0)
        assert ly_symmetry_residual(p, math.log(0.1)) == pytest.approx(0.0, abs=1e-15)

    def test_lx_hand_value(self):
        p = MgParams(r=0.05, lam=0.0, mu=0.005, zeta=0.1, alpha=1.0, rho=0.0)
        assert lx_symmetry_residual(p, 0.0) == pytest.approx(0.0, abs=1e-15)

    @given(y=st.floats(-5.0, 5.0))
    def test_lx_without_volatility_terms_is_mu(self, y):
        p = MgParams(r=0.05, lam=0.0, mu=0.3, zeta=0.0, alpha=1.0, rho=0.0)
        assert lx_symmetry_residual(p, y) == 0.3


class TestQuartic:
    """Quartic extension and its vacuum manifold."""

    def test_nontrivial_vacuum(self):
        solution = quartic_vacuum(QuarticParams(mu2=0.04, lam4=-0.01))
        assert solution.classification is Classification.NON_TRIVIAL
        assert solution.values["S"] == pytest.approx(2.0, rel=1e-15)
        assert solution.values["S_plus"] == solution.values["S"]
        assert solution.values["S_minus"] == -solution.values["S"]

    def test_roots_annihilate_potential(self):
        q = QuarticParams(mu2=0.04, lam4=-0.01)
        for s in (2.0, -2.0):
            assert abs(quartic_potential(q, s)) <= 1e-12 * 0.16

    def test_positive_quartic_coefficient_is_trivial(self):
        solution = quartic_vacuum(QuarticParams(mu2=0.04, lam4=0.01))
        assert solution.classification is Classification.TRIVIAL
        assert solution.values["S"] == 0.0

    @pytest.mark.parametrize("lam4", [-0.01, 0.01])
    def test_zero_quadratic_coefficient(self, lam4):
        assert quartic_vacuum(QuarticParams(mu2=0.0, lam4=lam4)).values["S"] == 0.0

    def test_negative_ratio_has_no_real_root(self):
        solution = quartic_vacuum(QuarticParams(mu2=-0.04, lam4=-0.01))
        assert solution.classification is Classification.TRIVIAL

    def test_degenerate_potential(self):
        with pytest.raises(DegeneratePotentialError):
            quartic_vacuum(QuarticParams(mu2=0.04, lam4=0.0))

    def test_manifold_hand_points(self):
        points = vacuum_manifold(QuarticParams(mu2=0.04, lam4=-0.01), [math.log(2.0), 0.0])
        assert points[0].x == pytest.approx(0.0, abs=1e-15)
        assert points[1].x == pytest.approx(math.log(2.0), abs=1e-15)

    @given(ys=st.lists(st.floats(-5.0, 5.0), min_size=2, max_size=10))
    def test_manifold_properties(self, ys):
        q = QuarticParams(mu2=0.04, lam4=-0.01)
        points = vacuum_manifold(q, ys)
        for pt in points:
            assert math.exp(pt.x + pt.y) == pytest.approx(2.0, rel=1e-12)
            assert quartic_potential(q, math.exp(pt.x + pt.y)) == pytest.approx(0.0, abs=1e-12)
        for a, b in zip(points, points[1:]):
            assert (b.x - a.x) == pytest.approx(a.y - b.y, abs=1e-14)

    def test_root_residual(self):
        q = QuarticParams(mu2=0.04, lam4=-0.01)
        assert quartic_root_residual(q, quartic_vacuum(q)) <= 1e-12
        trivial = QuarticParams(mu2=0.04, lam4=0.01)
        assert quartic_root_residual(trivial, quartic_vacuum(trivial)) == 0.0

    def test_manifold_errors(self):
        q = QuarticParams(mu2=0.04, lam4=-0.01)
        errors = manifold_errors(q, vacuum_manifold(q, [-1.0, -0.5, 0.0, 0.5, 1.0]))
        assert errors.norm <= 1e-12
        assert errors.slope <= 1e-12
        assert errors.flat_direction <= 1e-12

    def test_manifold_errors_without_points(self):
        errors = manifold_errors(QuarticParams(mu2=0.04, lam4=-0.01), [])
        assert (errors.norm, errors.slope, errors.flat_direction) == (0.0, 0.0, 0.0)

    def test_manifold_needs_nontrivial_vacuum(self):
        with pytest.raises(NontrivialVacuumRequiredError):
            vacuum_manifold(QuarticParams(mu2=0.04, lam4=0.01), [0.0])

    def test_point_off_manifold_is_rejected(self):
        with pytest.raises(InconsistentRecordError):
            VacuumManifoldPoint(y=0.0, x=0.0, s_norm=2.0)


class TestVacuumSolution:
    """Invariants of the vacuum record."""

    def test_trivial_must_be_all_zero(self):
        with pytest.raises(InconsistentRecordError):
            VacuumSolution(VacuumKind.BS_QUADRATIC, {"phi": 0.3}, Classification.TRIVIAL)

    def test_non_finite_values(self):
        with pytest.raises(NonFiniteValuesError):
            VacuumSolution(VacuumKind.BS_QUADRATIC, {"phi": math.nan}, Classification.NON_TRIVIAL)

    def test_to_dict(self):
        data = bs_vacuum(BsParams.from_variance(0.05, 0.05)).to_dict()
        assert data == {"kind": "BsQuadratic", "classification": "NonTrivial", "values": {"phi": 0.5}}
