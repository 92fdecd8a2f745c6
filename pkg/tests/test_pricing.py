"""Tests for the pricing kernel and the European call."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from core.field import sample
from core.grid import make_grid_1d, make_grid_2d
from core.params import BsParams
from operators.banded import zero
from operators.hamiltonians import build_bs_hamiltonian, build_mg_hamiltonian
from pricing.european import (
    PricingResult,
    bs_closed_form,
    monotonicity_defect,
    price_european_call,
)
from pricing.evolution import EvolutionConfig, Scheme, evolve, martingale_evolution_check
from utils.errors import (
    GridMismatchError,
    InconsistentRecordError,
    InvalidInputError,
    NonFiniteValuesError,
    StrikeOutsideGridError,
)

SPOT = 100.0


def _call_grid(n, width=2.0):
    x0 = math.log(SPOT)
    return make_grid_1d(x0 - width, x0 + width, n)


class TestEvolutionConfig:
    def test_rejects_non_positive_maturity(self):
        with pytest.raises(InvalidInputError):
            EvolutionConfig(maturity=0.0, steps=10)

    def test_rejects_zero_steps(self):
        with pytest.raises(InvalidInputError):
            EvolutionConfig(maturity=1.0, steps=0)

    def test_rejects_negative_startup(self):
        with pytest.raises(InvalidInputError):
            EvolutionConfig(maturity=1.0, steps=10, rannacher_steps=-1)

    def test_scheme_from_string(self):
        cfg = EvolutionConfig(maturity=1.0, steps=4, scheme="implicit-euler")
        assert cfg.scheme is Scheme.IMPLICIT_EULER
        assert cfg.dt == 0.25


class TestEvolve:
    """Kernel behaviour on simple terminal fields."""

    def test_martingale_state_is_fixed(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        cfg = EvolutionConfig(maturity=1.0, steps=200)
        assert martingale_evolution_check(h, sample(grid_bs, np.exp), cfg) <= 5e-3

    def test_constant_is_discounted(self, bs_params):
        grid = make_grid_1d(-10.0, 10.0, 401)
        h = build_bs_hamiltonian(bs_params, grid)
        cfg = EvolutionConfig(maturity=1.0, steps=100)
        out = evolve(h, sample(grid, lambda x: 3.0), cfg)
        centre = out.values[grid.n // 2]
        assert centre == pytest.approx(3.0 * math.exp(-bs_params.r), rel=1e-4)

    def test_tiny_maturity_returns_terminal(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        terminal = sample(grid_bs, np.sin)
        out = evolve(h, terminal, EvolutionConfig(maturity=1e-12, steps=1))
        np.testing.assert_allclose(out.values, terminal.values, atol=1e-9)

    def test_zero_operator_leaves_field_unchanged(self, grid_unit):
        terminal = sample(grid_unit, np.exp)
        cfg = EvolutionConfig(maturity=1.0, steps=5)
        assert martingale_evolution_check(zero(grid_unit), terminal, cfg) == 0.0

    def test_edges_are_pinned(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        terminal = sample(grid_bs, lambda x: 1.0 + x**2)
        out = evolve(h, terminal, EvolutionConfig(maturity=0.5, steps=20))
        assert out.values[0] == terminal.values[0]
        assert out.values[-1] == terminal.values[-1]

    @pytest.mark.parametrize("scheme", ["implicit-euler", "crank-nicolson"])
    def test_edges_are_pinned_in_two_dimensions(self, grid_mg_small, mg_params, scheme):
        h = build_mg_hamiltonian(mg_params, grid_mg_small)
        terminal = sample(grid_mg_small, lambda x, y: np.exp(x + y) + 0.3 * x * y)
        out = evolve(h, terminal, EvolutionConfig(maturity=0.2, steps=8, scheme=scheme))
        edge = np.ones(grid_mg_small.shape, dtype=bool)
        edge[1:-1, 1:-1] = False
        assert np.array_equal(out.as_array()[edge], terminal.as_array()[edge])

    def test_grid_mismatch(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        other = make_grid_1d(-2.0, 2.0, 201)
        with pytest.raises(GridMismatchError):
            evolve(h, sample(other, np.exp), EvolutionConfig(maturity=1.0, steps=10))

    def test_config_grid_must_match(self, grid_bs, bs_params):
        h = build_bs_hamiltonian(bs_params, grid_bs)
        cfg = EvolutionConfig(maturity=1.0, steps=10, grid=make_grid_1d(-1.0, 1.0, 11))
        with pytest.raises(GridMismatchError):
            evolve(h, sample(grid_bs, np.exp), cfg)

    def test_mg_vacuum_near_constraint_root(self, mg_params):
        grid = make_grid_2d(-1.0, 1.0, 41, -0.1, 0.1, 21)
        h = build_mg_hamiltonian(mg_params, grid)
        vacuum = sample(grid, lambda x, y: np.exp(x + y))
        cfg = EvolutionConfig(maturity=0.01, steps=10)
        assert martingale_evolution_check(h, vacuum, cfg) <= 2e-3

    def test_mg_evolution_is_deterministic(self, mg_params):
        grid = make_grid_2d(-1.0, 1.0, 21, -0.1, 0.1, 11)
        h = build_mg_hamiltonian(mg_params, grid)
        vacuum = sample(grid, lambda x, y: np.exp(x + y))
        cfg = EvolutionConfig(maturity=0.01, steps=5)
        assert np.array_equal(evolve(h, vacuum, cfg).values, evolve(h, vacuum, cfg).values)


class TestClosedForm:
    def test_reference_value(self, bs_params):
        assert bs_closed_form(100.0, 100.0, bs_params, 1.0) == pytest.approx(
            10.450583572185565, abs=1e-10
        )

    def test_matches_risk_neutral_integral(self, bs_params):
        s0, k, T = 100.0, 110.0, 0.5
        drift = (bs_params.r - 0.5 * bs_params.sigma2) * T
        vol = bs_params.sigma * math.sqrt(T)
        z_min = (math.log(k / s0) - drift) / vol

        def integrand(z):
            return (s0 * math.exp(drift + vol * z) - k) * norm.pdf(z)

        expected = math.exp(-bs_params.r * T) * quad(integrand, z_min, np.inf)[0]
        assert bs_closed_form(s0, k, bs_params, T) == pytest.approx(expected, rel=1e-8)

    def test_rejects_non_positive_strike(self, bs_params):
        with pytest.raises(InvalidInputError):
            bs_closed_form(100.0, 0.0, bs_params, 1.0)


class TestEuropeanCall:
    """Kernel prices against the closed form."""

    @pytest.mark.parametrize("scheme", [Scheme.CRANK_NICOLSON, Scheme.IMPLICIT_EULER])
    def test_at_the_money(self, bs_params, scheme):
        cfg = EvolutionConfig(maturity=1.0, steps=400, scheme=scheme)
        result = price_european_call(bs_params, _call_grid(801), SPOT, cfg, math.log(SPOT))
        assert result.oracle_price == pytest.approx(10.450583572185565, abs=1e-10)
        assert result.rel_error <= 1e-2

    def test_values_increase_with_spot(self, bs_params):
        cfg = EvolutionConfig(maturity=1.0, steps=400)
        result = price_european_call(bs_params, _call_grid(801), SPOT, cfg, math.log(SPOT))
        assert np.all(np.diff(result.values.values[1:-1]) >= -1e-9)
        assert monotonicity_defect(result.values) <= 1e-9

    def test_monotonicity_defect_measures_the_largest_drop(self, grid_unit):
        dipped = sample(grid_unit, lambda x: np.where(np.abs(x) < 0.05, 0.5, 1.0 + 0.0 * x))
        assert monotonicity_defect(dipped) == pytest.approx(0.5, abs=1e-15)
        assert monotonicity_defect(sample(grid_unit, lambda x: x)) == 0.0

    def test_result_rejects_negative_error(self, grid_unit):
        values = sample(grid_unit, lambda x: x)
        with pytest.raises(InconsistentRecordError):
            PricingResult(values, 1.0, 1.0, -1.0)
        with pytest.raises(NonFiniteValuesError):
            PricingResult(values, math.nan, 1.0, 0.0)

    def test_deep_in_the_money(self, bs_params):
        x0 = math.log(SPOT)
        grid = make_grid_1d(x0 - 12.0, x0 + 2.0, 1401)
        cfg = EvolutionConfig(maturity=1.0, steps=400)
        result = price_european_call(bs_params, grid, 0.001, cfg, x0)
        assert result.oracle_price == pytest.approx(SPOT - 0.001 * math.exp(-0.05), rel=1e-9)
        assert result.rel_error <= 1e-2

    @pytest.mark.slow
    def test_refinement_reduces_error(self, bs_params):
        coarse = price_european_call(
            bs_params,
            _call_grid(401),
            SPOT,
            EvolutionConfig(maturity=1.0, steps=200),
            math.log(SPOT),
        )
        fine = price_european_call(
            bs_params,
            _call_grid(801),
            SPOT,
            EvolutionConfig(maturity=1.0, steps=400),
            math.log(SPOT),
        )
        assert coarse.rel_error >= 2.0 * fine.rel_error

    def test_strike_outside_grid(self, bs_params):
        cfg = EvolutionConfig(maturity=1.0, steps=10)
        with pytest.raises(StrikeOutsideGridError):
            price_european_call(bs_params, _call_grid(101), 1000.0, cfg, math.log(SPOT))

    def test_spot_outside_grid(self, bs_params):
        cfg = EvolutionConfig(maturity=1.0, steps=10)
        with pytest.raises(InvalidInputError):
            price_european_call(bs_params, _call_grid(101), SPOT, cfg, 10.0)

    def test_volatility_spellings_agree(self):
        a = BsParams.from_variance(0.05, 0.04)
        b = BsParams(r=0.05, sigma=0.2)
        assert bs_closed_form(100.0, 100.0, a, 1.0) == pytest.approx(
            bs_closed_form(100.0, 100.0, b, 1.0), rel=1e-14
        )
