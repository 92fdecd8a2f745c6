"""Tests for banded operators, stencils and the Hamiltonians."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.field import sample
from core.grid import make_grid_1d, make_grid_2d
from core.params import BsParams, MgParams
from operators.banded import (
    BandedOperator,
    apply,
    commutator,
    compose,
    identity,
    interior_norm,
    interior_slices,
    zero,
)
from operators.hamiltonians import build_bs_hamiltonian, build_mg_hamiltonian
from operators.stencils import d2_dx2, d2_dxdy, d2_dy2, d_dx, d_dy
from utils.errors import GridMismatchError, InvalidInputError, MarginExceedsGridError


class TestBandedOperator:
    """Tests for storage, arithmetic and products."""

    def test_identity_and_zero(self, grid_unit):
        f = sample(grid_unit, np.sin)
        assert np.array_equal(apply(identity(grid_unit), f).values, f.values)
        assert np.all(apply(zero(grid_unit), f).values == 0.0)

    def test_margin_smaller_than_bandwidth_is_rejected(self, grid_unit):
        with pytest.raises(InvalidInputError):
            BandedOperator(grid_unit, {(1,): 1.0}, interior_margin=0)

    def test_off_grid_entries_are_zeroed(self):
        grid = make_grid_1d(0.0, 1.0, 5)
        op = BandedOperator(grid, {(1,): 1.0, (-1,): 1.0}, interior_margin=1)
        assert op.bands[(1,)][-1] == 0.0
        assert op.bands[(-1,)][0] == 0.0

    def test_apply_matches_sparse_matrix(self, grid_mg_small):
        p = MgParams(r=0.05, lam=0.1, mu=0.2, zeta=0.3, alpha=0.8, rho=-0.4)
        h = build_mg_hamiltonian(p, grid_mg_small)
        f = sample(grid_mg_small, lambda x, y: np.sin(x) * np.exp(0.5 * y))
        dense = h.to_sparse() @ f.values
        np.testing.assert_allclose(apply(h, f).values, dense, rtol=1e-12, atol=1e-10)

    def test_compose_matches_sequential_application(self, grid_unit):
        a = d_dx(grid_unit).scale_rows(grid_unit.points)
        b = d2_dx2(grid_unit)
        f = sample(grid_unit, np.cos)
        np.testing.assert_allclose(
            apply(compose(a, b), f).values,
            apply(a, apply(b, f)).values,
            rtol=1e-10,
            atol=1e-8,
        )
        assert compose(a, b).interior_margin == a.interior_margin + b.interior_margin

    def test_sum_and_difference(self, grid_unit):
        d = d_dx(grid_unit)
        f = sample(grid_unit, np.exp)
        twice = apply(d + d, f).values
        np.testing.assert_allclose(twice, 2.0 * apply(d, f).values, rtol=1e-14)
        assert np.all(apply(d - d, f).values == 0.0)

    def test_grid_mismatch(self):
        a = d_dx(make_grid_1d(-1.0, 1.0, 11))
        b = d_dx(make_grid_1d(-1.0, 1.0, 13))
        with pytest.raises(GridMismatchError):
            a + b

    @given(
        c1=st.floats(-10, 10),
        c2=st.floats(-10, 10),
    )
    def test_apply_is_linear(self, c1, c2):
        grid = make_grid_1d(-1.0, 1.0, 31)
        h = build_bs_hamiltonian(BsParams(r=0.03, sigma=0.4), grid)
        f = sample(grid, np.exp)
        g = sample(grid, np.sin)
        lhs = apply(h, c1 * f + c2 * g).values
        rhs = c1 * apply(h, f).values + c2 * apply(h, g).values
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9)


class TestStencils:
    """Tests for derivative stencils."""

    def test_first_derivative_exact_on_quadratics(self, grid_unit):
        f = sample(grid_unit, lambda x: 3.0 * x**2 - x + 2.0)
        expected = 6.0 * grid_unit.points - 1.0
        np.testing.assert_allclose(apply(d_dx(grid_unit), f).values, expected, atol=1e-10)

    def test_second_derivative_exact_on_cubics(self, grid_unit):
        f = sample(grid_unit, lambda x: x**3 + x**2)
        expected = 6.0 * grid_unit.points + 2.0
        np.testing.assert_allclose(apply(d2_dx2(grid_unit), f).values, expected, atol=1e-8)

    def test_margins(self, grid_mg_small):
        assert d_dx(grid_mg_small).interior_margin == 2
        assert d2_dy2(grid_mg_small).interior_margin == 3
        assert d2_dxdy(grid_mg_small).interior_margin == 4

    def test_mixed_derivative_of_product(self, grid_mg_small):
        f = sample(grid_mg_small, lambda x, y: x**2 * y**2)
        x, y = grid_mg_small.mesh()
        np.testing.assert_allclose(
            apply(d2_dxdy(grid_mg_small), f).as_array(), 4.0 * x * y, atol=1e-10
        )

    def test_y_generator_needs_2d_grid(self, grid_unit):
        with pytest.raises(InvalidInputError):
            d_dy(grid_unit)

    def test_toeplitz_stencils_commute_in_the_interior(self, grid_unit):
        comm = commutator(d_dx(grid_unit), d2_dx2(grid_unit))
        assert interior_norm(comm) == 0.0

    def test_interior_slices_reject_wide_margins(self):
        with pytest.raises(MarginExceedsGridError):
            interior_slices((5,), 3)


class TestHamiltonians:
    """Tests for H_BS and H_MG."""

    def test_bs_hamiltonian_on_constants_is_discounting(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        out = apply(h, sample(grid_bs, lambda x: 1.0))
        np.testing.assert_allclose(out.values, bs_params.r, atol=1e-9)

    def test_bs_residual_matches_truncation_formula(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        e = sample(grid_bs, np.exp)
        ratio = apply(h, e).values / e.values
        interior = ratio[h.interior_margin : -h.interior_margin]
        expected = grid_bs.dx**2 * (bs_params.sigma2 / 24.0 - bs_params.r / 6.0)
        np.testing.assert_allclose(interior, expected, rtol=1e-3)

    def test_bs_commutes_with_price_generator(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        assert interior_norm(commutator(h, d_dx(grid_bs))) <= 1e-12

    def test_mg_commutes_with_price_generator(self):
        grid = make_grid_2d(-1.0, 1.0, 61, -1.0, 1.0, 61)
        p = MgParams(r=0.05, lam=0.2, mu=0.1, zeta=0.5, alpha=0.7, rho=-0.3)
        h = build_mg_hamiltonian(p, grid)
        assert interior_norm(commutator(h, d_dx(grid))) <= 1e-12

    def test_mg_does_not_commute_with_volatility_generator(self):
        grid = make_grid_2d(-1.0, 1.0, 61, -1.0, 1.0, 61)
        p = MgParams(r=0.05, lam=0.2, mu=0.1, zeta=0.5, alpha=0.7, rho=-0.3)
        h = build_mg_hamiltonian(p, grid)
        assert interior_norm(commutator(h, d_dy(grid))) > 1e-3

    def test_mg_hamiltonian_on_constants_is_discounting(self, grid_mg_small, mg_params):
        h = build_mg_hamiltonian(mg_params, grid_mg_small)
        out = apply(h, sample(grid_mg_small, lambda x, y: 2.0))
        np.testing.assert_allclose(out.values, 2.0 * mg_params.r, atol=1e-9)
