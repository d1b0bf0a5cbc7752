# mcmc_test.py - 샘플러 / 목적함수 / 요약 테스트
import math

import numpy as np
import pytest
from scipy import stats

from gliderSimulate.vehicle_model import body_acceleration_batch
from gliderSimulate.vehicle_params import DEFAULT_HYDRO, VehicleParams
from sysid.differentiation import DerivedStateSeries
from sysid.mcmc import (
    AccelerationRegression, Chain, ParameterVector, SeriesTarget, acceptance_probability, gelman_rubin,
    least_squares_estimate, log_target, merge_chains, propose, proposal_log_density, residual_objective,
    run_chain, summarize,
)


@pytest.fixture(scope="module")
def params():
    return VehicleParams()


@pytest.fixture(scope="module")
def series(params):
    """무작위 비행 상태에서 잡음 없이 만든 관측"""
    rng = np.random.default_rng(11)
    n = 400
    nu = np.column_stack([
        rng.uniform(0.05, 0.3, n), rng.normal(0, 0.02, n), rng.normal(0, 0.03, n),
        rng.normal(0, 0.1, n), rng.normal(0, 0.1, n), rng.normal(0, 0.1, n),
    ])
    angles = np.column_stack([rng.uniform(-0.5, 0.5, n), rng.uniform(-0.6, 0.6, n), rng.uniform(-3, 3, n)])
    act = np.column_stack([rng.uniform(-1, 1, n), rng.uniform(-0.05, 0.05, n), rng.uniform(-0.25, 0.25, n)])
    act = np.column_stack([act, params.c_b * act[:, 2]])
    nu_dot = body_acceleration_batch(nu, angles, act, params)
    return DerivedStateSeries(np.arange(n) / 30.0, nu, nu_dot, angles, act)


def _domain():
    return ParameterVector.from_bounds(DEFAULT_HYDRO.as_array())


class TestObjective:
    def test_zero_at_truth(self, series, params):
        assert residual_objective(DEFAULT_HYDRO.as_array(), series, params) < 1e-10

    def test_perturbation_increases(self, series, params):
        truth = DEFAULT_HYDRO.as_array()
        base = residual_objective(truth, series, params)
        for j in range(12):
            tau = truth.copy()
            tau[j] += 0.1
            assert residual_objective(tau, series, params) > base

    def test_exact_parabola_per_coefficient(self, series, params):
        truth = DEFAULT_HYDRO.as_array()
        for j in (0, 3, 9):
            xs = truth[j] + np.array([-0.5, 0.0, 0.5, 1.0])
            ys = []
            for x in xs:
                tau = truth.copy()
                tau[j] = x
                ys.append(residual_objective(tau, series, params))
            coeffs = np.polyfit(xs[:3], ys[:3], 2)
            assert np.polyval(coeffs, xs[3]) == pytest.approx(ys[3], rel=1e-8, abs=1e-8)

    def test_regression_matches_direct_evaluation(self, series, params):
        regression = AccelerationRegression.from_series(series, params)
        rng = np.random.default_rng(2)
        for _ in range(5):
            tau = DEFAULT_HYDRO.as_array() + rng.normal(0, 0.5, 12)
            direct = residual_objective(tau, series, params)
            assert regression.objective(tau) == pytest.approx(direct, rel=1e-8, abs=1e-10)

    def test_weights(self, series, params):
        tau = DEFAULT_HYDRO.as_array() + 0.2
        full = residual_objective(tau, series, params)
        parts = sum(residual_objective(tau, series, params, np.eye(6)[k]) for k in range(6))
        assert parts == pytest.approx(full, rel=1e-12)

    def test_least_squares_recovers_truth(self, series, params):
        regression = AccelerationRegression.from_series(series, params)
        estimate = least_squares_estimate(regression, _domain())
        np.testing.assert_allclose(estimate, DEFAULT_HYDRO.as_array(), rtol=1e-5, atol=1e-5)

    def test_empty_series(self, params):
        empty = DerivedStateSeries(np.zeros(0), np.zeros((0, 6)), np.zeros((0, 6)), np.zeros((0, 3)), np.zeros((0, 4)))
        with pytest.raises(ValueError):
            residual_objective(DEFAULT_HYDRO.as_array(), empty, params)


class TestLogTarget:
    def test_outside_domain(self):
        domain = _domain()
        tau = domain.upper + 1.0
        assert log_target(tau, lambda x: 0.0, 0.1, domain) == -math.inf

    def test_equal_objective_equal_target(self):
        domain = _domain()
        a = DEFAULT_HYDRO.as_array()
        b = a * 0.99
        assert log_target(a, lambda x: 3.0, 0.1, domain) == log_target(b, lambda x: 3.0, 0.1, domain)

    def test_ratio_formula(self, series, params):
        regression = AccelerationRegression.from_series(series, params)
        domain = _domain()
        sigma = 0.5
        a = DEFAULT_HYDRO.as_array()
        b = a.copy()
        b[1] += 0.05
        fa, fb = regression.objective(a), regression.objective(b)
        ratio = math.exp(log_target(b, regression.objective, sigma, domain)
                         - log_target(a, regression.objective, sigma, domain))
        assert ratio == pytest.approx(math.exp(-(fb - fa) / (2 * sigma ** 2)), rel=1e-9)

    def test_series_target_rejects_zero_noise(self, series, params):
        with pytest.raises(ValueError):
            SeriesTarget(AccelerationRegression.from_series(series, params), 0.0, _domain())


class TestProposal:
    def test_tiny_sigma_returns_current(self):
        current = DEFAULT_HYDRO.as_array()
        out = propose(current, np.full(12, 1e-15), np.random.default_rng(0))
        np.testing.assert_allclose(out, current, rtol=0, atol=1e-12)

    def test_symmetric_density(self):
        rng = np.random.default_rng(4)
        sigma = rng.uniform(0.1, 1.0, 12)
        a, b = rng.normal(size=12), rng.normal(size=12)
        assert proposal_log_density(a, b, sigma) == pytest.approx(proposal_log_density(b, a, sigma))
        chol = np.linalg.cholesky(np.eye(12) * 0.5 + 0.5)
        assert proposal_log_density(a, b, sigma, chol) == pytest.approx(proposal_log_density(b, a, sigma, chol))

    def test_empirical_std(self):
        rng = np.random.default_rng(5)
        sigma = np.linspace(0.1, 2.0, 12)
        draws = np.array([propose(np.zeros(12), sigma, rng) for _ in range(100_000)])
        np.testing.assert_allclose(draws.std(axis=0), sigma, rtol=0.02)

    def test_non_positive_sigma(self):
        with pytest.raises(ValueError):
            propose(np.zeros(2), np.array([0.1, 0.0]), np.random.default_rng(0))


class TestAcceptance:
    def test_uphill_always_accepted(self):
        assert acceptance_probability(-1.0, -2.0) == 1.0

    def test_half_ratio(self):
        assert acceptance_probability(math.log(0.5), 0.0) == pytest.approx(0.5)

    def test_out_of_domain(self):
        assert acceptance_probability(-math.inf, -1.0) == 0.0

    def test_asymmetric_terms(self):
        ap = acceptance_probability(0.0, 0.0, log_q_forward=math.log(4.0), log_q_backward=math.log(1.0))
        assert ap == pytest.approx(0.25)


def _standard_normal(x):
    return -0.5 * float(x[0] ** 2)


class TestRunChain:
    def test_forced_rejection_single_step(self):
        domain = ParameterVector(np.zeros(1), np.array([-1.0]), np.array([1.0]))
        target = lambda x: log_target(x, lambda y: 0.0, 1.0, domain)
        chain = run_chain(target, np.zeros(1), 1, np.array([1e6]), seed=0, names=('x',))
        assert len(chain) == 1
        assert chain.samples[0, 0] == 0.0
        assert not chain.accepted[0]

    def test_same_seed_same_chain(self):
        a = run_chain(_standard_normal, np.zeros(1), 2000, np.array([1.0]), seed=7, names=('x',))
        b = run_chain(_standard_normal, np.zeros(1), 2000, np.array([1.0]), seed=7, names=('x',))
        np.testing.assert_array_equal(a.samples, b.samples)
        np.testing.assert_array_equal(a.accepted, b.accepted)

    def test_acceptance_flags_consistent(self):
        chain = run_chain(_standard_normal, np.zeros(1), 3000, np.array([2.4]), seed=3, names=('x',))
        moved = np.r_[chain.samples[0, 0] != 0.0, np.diff(chain.samples[:, 0]) != 0.0]
        np.testing.assert_array_equal(moved, chain.accepted)

    def test_invalid_init(self):
        domain = ParameterVector(np.zeros(1), np.array([-1.0]), np.array([1.0]))
        target = lambda x: log_target(x, lambda y: 0.0, 1.0, domain)
        with pytest.raises(ValueError):
            run_chain(target, np.array([5.0]), 10, np.array([0.1]), seed=0, names=('x',))
        with pytest.raises(ValueError):
            run_chain(target, np.zeros(1), 0, np.array([0.1]), seed=0, names=('x',))

    def test_tuning_fixes_kernel_afterwards(self):
        chain = run_chain(_standard_normal, np.zeros(1), 3000, np.array([50.0]), seed=1, tune_steps=2000,
                          names=('x',))
        assert chain.sigma_new[0] < 50.0
        assert chain.tune_steps == 2000

    @pytest.mark.slow
    def test_standard_normal_ks(self):
        chain = run_chain(_standard_normal, np.zeros(1), 100_000, np.array([2.4]), seed=42, names=('x',))
        statistic = stats.kstest(chain.samples[10_000:, 0], 'norm').statistic
        assert statistic < 0.02
        summary = summarize(chain, 0.1)
        assert abs(summary.means[0]) < 0.02
        assert abs(summary.stds[0] - 1.0) < 0.02


def _chain(samples, seed=0):
    samples = np.asarray(samples, dtype=float).reshape(len(samples), -1)
    return Chain(samples, np.zeros(len(samples)), np.ones(len(samples), dtype=bool),
                 np.ones(samples.shape[1]), seed, names=tuple(f"p{i}" for i in range(samples.shape[1])))


class TestSummary:
    def test_constant_chain(self):
        summary = summarize(_chain(np.full(100, 2.5)), 0.2)
        assert summary.means[0] == 2.5
        assert summary.stds[0] == 0.0
        assert summary.n_samples == 80
        assert summary.burn_in == 20

    def test_histogram_mass(self):
        rng = np.random.default_rng(0)
        summary = summarize(_chain(rng.normal(size=(1000, 3))), 0.2, bins=25)
        for p in summary.parameters:
            assert p.hist_mass.sum() == pytest.approx(1.0, abs=1e-12)
            assert len(p.hist_edges) == 26

    def test_burn_in_range(self):
        with pytest.raises(ValueError):
            summarize(_chain(np.zeros(10)), 1.0)

    def test_merge_and_rhat(self):
        rng = np.random.default_rng(1)
        chains = [_chain(rng.normal(size=2000), seed=i) for i in range(4)]
        merged = merge_chains(chains, 0.2)
        assert merged.n_samples == 4 * 1600
        assert merged.rhat['p0'] == pytest.approx(1.0, abs=0.01)
        shifted = chains[:3] + [_chain(rng.normal(size=2000) + 5.0)]
        assert gelman_rubin(shifted, 0.2)[0] > 1.5

    def test_to_dict(self):
        summary = summarize(_chain(np.arange(10.0)), 0.0, bins=5)
        data = summary.to_dict()
        assert data['parameters']['p0']['mean'] == pytest.approx(4.5)
        assert data['acceptance_rate'] == 1.0
