"""Tests for closed-form limits, Hoeffding bounds and the error exponent."""

import math

import numpy as np
import pytest

from src.models import asymptotics
from src.models.asymptotics import (
    BoundMethod,
    LimitKind,
    LimitSpec,
    arccot,
    c_p,
    curie_weiss_hoeffding_bound,
    error_exponent_lb,
    f_max,
    f_value,
    finite_n_exponent,
    hoeffding_bound,
    limit_for,
    limit_spec_for,
    noise_gain,
    pe_limit_chain,
    pe_limit_complete_subcritical,
    pe_limit_gaussian,
    pe_limit_iid,
    q_functional,
    q_tail,
)
from src.models.exact import exact_error_prob, exact_magnetization_pmf
from src.models.graph import GraphFamily, build_graph, from_edge_list
from src.models.ising import Coupling, IsingModel
from src.shared.exceptions import ConfigurationError, ConvergenceError

P_GRID = (0.01, 0.1, 0.2, 0.3, 0.4, 0.49)


def _grid_f_max(theta: float) -> float:
    """Dense grid maximum of f(theta, s) over s in [0, 3], refined once."""
    coarse = np.linspace(0.0, 3.0, 300_001)
    values = f_value(theta, coarse)
    i = int(np.argmax(values))
    fine = np.linspace(coarse[max(i - 1, 0)], coarse[min(i + 1, coarse.size - 1)], 200_001)
    return float(np.max(f_value(theta, fine)))


class TestGaussianTail:
    def test_special_values(self):
        assert q_tail(0.0) == 0.5
        assert q_tail(40.0) < 1e-300
        assert q_tail(1.959964) == pytest.approx(0.025, abs=1e-6)

    def test_vectorized(self):
        values = q_tail(np.array([-1.0, 0.0, 1.0]))
        assert values[0] + values[2] == pytest.approx(1.0)

    def test_arccot_range(self):
        assert arccot(0.0) == pytest.approx(math.pi / 2)
        assert arccot(1.0) == pytest.approx(math.pi / 4)
        assert arccot(-1.0) == pytest.approx(3 * math.pi / 4)
        assert 0 < arccot(1e12) < 1e-11


class TestLimits:
    def test_iid_limit(self):
        assert pe_limit_iid(0.25) == pytest.approx(1 / 3, abs=1e-15)
        assert pe_limit_iid(0.1) == pytest.approx(0.20483, abs=1e-5)

    def test_iid_limit_decreases_to_zero(self):
        ps = [0.4, 0.1, 1e-2, 1e-4, 1e-8]
        values = [pe_limit_iid(p) for p in ps]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-4

    @pytest.mark.parametrize("p", P_GRID)
    def test_gaussian_limit_with_unit_variance_is_iid(self, p):
        assert pe_limit_gaussian(p, 1.0) == pytest.approx(pe_limit_iid(p), abs=1e-12)

    @pytest.mark.parametrize("p", np.linspace(0.0, 0.5, 102)[1:-1])
    def test_unit_variance_identity_on_a_fine_grid(self, p):
        assert abs(pe_limit_gaussian(p, 1.0) - pe_limit_iid(p)) <= 1e-12

    def test_gaussian_limit_vanishes_for_large_sigma(self):
        assert pe_limit_gaussian(0.1, 1e9) < 1e-9
        with pytest.raises(ConfigurationError):
            pe_limit_gaussian(0.1, 0.0)

    def test_gaussian_limit_matches_two_gaussian_simulation(self, rng):
        """Sign disagreement of X ~ N(0, 4) and (1 - 2p) X + N(0, 4p(1 - p))."""
        p, sigma, draws = 0.1, 2.0, 1_000_000
        x = rng.normal(0.0, sigma, size=draws)
        y = (1 - 2 * p) * x + rng.normal(0.0, math.sqrt(4 * p * (1 - p)), size=draws)
        rate = np.mean(np.sign(x) != np.sign(y))
        expected = pe_limit_gaussian(p, sigma)
        assert rate == pytest.approx(expected, abs=4 * math.sqrt(expected * (1 - expected) / draws))

    def test_chain_and_subcritical_limits_reduce_to_iid(self):
        for p in P_GRID:
            assert pe_limit_chain(p, 1e-12) == pytest.approx(pe_limit_iid(p), abs=1e-9)
            assert pe_limit_complete_subcritical(p, 1e-12) == pytest.approx(pe_limit_iid(p), abs=1e-9)

    def test_subcritical_limit_domain(self):
        assert pe_limit_complete_subcritical(0.1, 0.5 - 1e-10) < 1e-4
        with pytest.raises(ConfigurationError, match="critical"):
            pe_limit_complete_subcritical(0.1, 0.5)
        with pytest.raises(ConfigurationError):
            pe_limit_chain(0.1, 0.0)

    def test_limit_dispatch(self):
        assert limit_for(GraphFamily.EMPTY, Coupling.EDGEWISE, None, 0.25) == pytest.approx(1 / 3)
        assert limit_for(GraphFamily.CHAIN_PBC, Coupling.EDGEWISE, 0.5, 0.1) == pe_limit_chain(0.1, 0.5)
        assert limit_for(GraphFamily.COMPLETE, Coupling.CURIE_WEISS, 0.3, 0.1) == (
            pe_limit_complete_subcritical(0.1, 0.3)
        )
        assert limit_for(GraphFamily.COMPLETE, Coupling.CURIE_WEISS, 0.7, 0.1) == 0.0
        assert limit_for(GraphFamily.COMPLETE, Coupling.CURIE_WEISS, 0.5, 0.1) is None
        assert limit_for(GraphFamily.COMPLETE, Coupling.EDGEWISE, 0.3, 0.1) is None
        assert limit_for(GraphFamily.CUSTOM, Coupling.EDGEWISE, 0.3, 0.1) is None


class TestHoeffding:
    def test_constant(self):
        assert c_p(0.25) == pytest.approx(1 / 18, abs=1e-15)
        assert c_p(1e-12) == pytest.approx(1 / 8, abs=1e-10)
        assert c_p(0.5 - 1e-9) < 1e-15
        with pytest.raises(ConfigurationError):
            c_p(0.5)

    def test_single_member_near_noiseless(self):
        model = IsingModel(build_graph("empty", 1), 1.0)
        bound = hoeffding_bound(model, 1e-12)
        assert bound == pytest.approx(math.exp(-1 / 8), abs=1e-9)
        assert exact_error_prob(model, 1e-12) <= bound

    @pytest.mark.parametrize(
        "model",
        [
            IsingModel(build_graph("empty", 9), 1.0),
            IsingModel(build_graph("chain-pbc", 9), 0.5),
            IsingModel(build_graph("chain", 31), 1.2),
            IsingModel(build_graph("complete", 101), 0.7, Coupling.CURIE_WEISS),
            IsingModel(build_graph("complete", 101), 0.3, Coupling.CURIE_WEISS),
        ],
        ids=["empty", "chain-pbc", "chain", "cw-super", "cw-sub"],
    )
    @pytest.mark.parametrize("p", [0.05, 0.2, 0.4])
    def test_bound_dominates_exact_error(self, model, p):
        assert exact_error_prob(model, p) <= hoeffding_bound(model, p) + 1e-15

    @pytest.mark.parametrize("p", [0.1, 0.3])
    @pytest.mark.parametrize("theta", [0.2, 0.8])
    @pytest.mark.parametrize("n", [5, 7, 9])
    @pytest.mark.parametrize("family", ["empty", "chain", "chain-pbc", "complete", "custom"])
    def test_bound_dominates_exact_error_on_grid(self, family, n, theta, p):
        if family == "custom":
            # ring with one chord
            edges = [(i, (i + 1) % n) for i in range(n)] + [(0, n // 2)]
            model = IsingModel(from_edge_list(n, edges), theta)
        elif family == "complete":
            model = IsingModel(build_graph(family, n), theta, Coupling.CURIE_WEISS)
        else:
            model = IsingModel(build_graph(family, n), theta)
        assert exact_error_prob(model, p) <= hoeffding_bound(model, p)

    def test_partition_ratio_route(self, curie_weiss_factory):
        """Test Z_n(theta - C_p) / Z_n(theta) against the exact expectation."""
        for n, theta in ((51, 0.7), (201, 0.3)):
            model = curie_weiss_factory(n, theta)
            assert curie_weiss_hoeffding_bound(n, theta, 0.1) == pytest.approx(
                hoeffding_bound(model, 0.1), rel=1e-7
            )
        with pytest.raises(ConfigurationError):
            curie_weiss_hoeffding_bound(51, 0.05, 0.1)

    def test_monte_carlo_route(self, curie_weiss_factory, rng):
        model = curie_weiss_factory(101, 0.3)
        exact = hoeffding_bound(model, 0.2, method=BoundMethod.EXACT)
        estimate = hoeffding_bound(model, 0.2, method=BoundMethod.MONTE_CARLO, trials=200_000, rng=rng)
        assert estimate == pytest.approx(exact, abs=0.01)

    def test_exact_route_needs_available_pmf(self):
        model = IsingModel(from_edge_list(21, [(0, 1)]), 0.5)
        with pytest.raises(ConfigurationError):
            hoeffding_bound(model, 0.1)


class TestQFunctional:
    def test_point_mass_at_zero(self):
        assert q_functional(np.zeros(10), 0.2) == 0.5

    def test_standard_normal_limit_is_iid(self):
        spec = LimitSpec(LimitKind.IID)
        assert q_functional(spec, 0.25) == pytest.approx(1 / 3, abs=1e-9)

    @pytest.mark.parametrize("sigma", [0.5, 2.0, 7.0])
    def test_gaussian_matches_closed_form(self, sigma):
        spec = LimitSpec(LimitKind.GAUSSIAN_SIGMA, sigma_value=sigma)
        assert q_functional(spec, 0.1) == pytest.approx(pe_limit_gaussian(0.1, sigma), abs=1e-9)

    def test_density_route(self):
        def standard_normal(x: float) -> float:
            return math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)

        spec = LimitSpec(LimitKind.FROM_SAMPLES, density=standard_normal)
        assert q_functional(spec, 0.25) == pytest.approx(1 / 3, abs=1e-7)

    def test_density_route_with_wider_limit(self):
        def normal_sd2(x: float) -> float:
            return math.exp(-x * x / 8) / math.sqrt(8 * math.pi)

        spec = LimitSpec(LimitKind.FROM_SAMPLES, density=normal_sd2)
        assert q_functional(spec, 0.1) == pytest.approx(pe_limit_gaussian(0.1, 2.0), abs=1e-7)

    def test_density_route_reports_unconverged_quadrature(self, monkeypatch):
        monkeypatch.setattr(asymptotics.integrate, "quad", lambda *args, **kwargs: (0.3, 1e-3))
        spec = LimitSpec(LimitKind.FROM_SAMPLES, density=lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi))
        with pytest.raises(ConvergenceError) as info:
            q_functional(spec, 0.25)
        assert info.value.residual == 1e-3

    def test_finite_n_approaches_exact_error(self):
        """Test the Q-functional against the exact P_e as n grows on the empty graph."""
        gaps = []
        for n in (9, 101, 1001):
            model = IsingModel(build_graph("empty", n), 1.0)
            gaps.append(abs(q_functional(model, 0.1) - exact_error_prob(model, 0.1)))
        # about 0.0175 at n = 9
        assert gaps[0] < 0.02
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.005

    def test_pmf_and_model_sources_agree(self, chain_pbc5):
        pmf = exact_magnetization_pmf(chain_pbc5)
        assert q_functional(pmf, 0.2) == q_functional(chain_pbc5, 0.2)

    def test_chain_converges_to_its_limit(self):
        """Test the finite-n Q-functional approaching the chain limit."""
        limit = pe_limit_chain(0.1, 0.5)
        gaps = [
            abs(q_functional(IsingModel(build_graph("chain-pbc", n), 0.5), 0.1) - limit)
            for n in (51, 401, 2001)
        ]
        assert gaps[-1] < gaps[0]
        assert gaps[-1] < 0.005

    def test_empty_samples_are_rejected(self):
        with pytest.raises(ConfigurationError):
            q_functional(np.array([]), 0.1)
        with pytest.raises(ConfigurationError):
            LimitSpec(LimitKind.FROM_SAMPLES, samples=np.array([]))

    def test_limit_spec_sigmas(self, chain_pbc5, curie_weiss_factory):
        assert limit_spec_for(chain_pbc5).sigma() == pytest.approx(math.exp(0.5))
        assert limit_spec_for(curie_weiss_factory(11, 0.3)).sigma() == pytest.approx(1 / math.sqrt(0.4))
        assert limit_spec_for(curie_weiss_factory(11, 0.7)) is None
        with pytest.raises(ConfigurationError):
            LimitSpec(LimitKind.COMPLETE_SUBCRITICAL, theta=0.6)


class TestFreeEnergy:
    @pytest.mark.parametrize("theta", [0.05, 0.1, 0.3, 0.5])
    def test_zero_at_or_below_critical(self, theta):
        assert f_max(theta) == (0.0, 0.0)

    def test_supercritical_maximum(self):
        value, s_star = f_max(1.0)
        assert value == pytest.approx(0.3266, abs=5e-4)
        assert s_star == pytest.approx(0.9575, abs=5e-4)

    @pytest.mark.parametrize("theta", [0.55, 0.7, 1.0, 2.0])
    def test_matches_grid_search(self, theta):
        assert f_max(theta)[0] == pytest.approx(_grid_f_max(theta), abs=1e-9)

    def test_strictly_increasing_above_critical(self):
        values = [f_max(theta)[0] for theta in (0.55, 0.7, 1.0, 1.5)]
        assert values[0] > 0.0
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_rejects_non_positive_theta(self):
        with pytest.raises(ConfigurationError):
            f_max(0.0)
        with pytest.raises(ConfigurationError):
            f_value(-1.0, 0.5)


class TestErrorExponent:
    def test_positive_and_matches_grid(self):
        theta, p = 0.7, 0.1
        expected = _grid_f_max(theta) - _grid_f_max(theta - c_p(p))
        value = error_exponent_lb(theta, p)
        assert value > 0
        assert value == pytest.approx(expected, abs=1e-9)

    def test_second_term_vanishes_near_critical(self):
        theta, p = 0.55, 0.1
        assert theta - c_p(p) < 0.5
        assert error_exponent_lb(theta, p) == f_max(theta)[0]

    def test_monotone_in_theta(self):
        values = [error_exponent_lb(theta, 0.1) for theta in np.linspace(0.6, 1.5, 19)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_requires_supercritical_theta(self):
        with pytest.raises(ConfigurationError, match="theta > 1/2"):
            error_exponent_lb(0.5, 0.1)

    def test_finite_n_exponent_approaches_bound(self):
        bound = error_exponent_lb(0.7, 0.1)
        assert finite_n_exponent(2001, 0.7, 0.1) == pytest.approx(bound, abs=0.01)

    def test_noise_gain(self):
        assert noise_gain(0.25) == pytest.approx(0.5 / math.sqrt(0.75))

