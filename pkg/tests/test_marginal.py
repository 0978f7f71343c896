import math

import numpy as np
import pytest
from scipy.special import gammaln

from gselect.exceptions import (
    DegenerateResponseError,
    InvalidInputError,
    SaturatedFitError,
    UnsupportedOperationError,
)
from gselect.stats.marginal import (
    _G_GRID,
    MarginalEvaluation,
    ModelPrior,
    _initial_breaks,
    _log_integrand_v,
    log_bayes_factor_vs_null,
    log_bf_from_stats,
    log_g_integral,
    log_marginal,
    log_marginal_approx,
    log_marginal_null,
    log_marginal_quadrature,
    log_prefactor,
    posterior_probs,
)
from gselect.stats.priors import PRESETS, FixedG, ScaledInvChiSq, ZellnerSiow
from gselect.stats.quadrature import log_integrate
from gselect.stats.regression import Dataset, ModelIndex, fit_stats
from tests.oracles import log_g_oracle, make_dataset

CONTINUOUS = [
    "zellner-siow",
    "hyper-g",
    "hyper-g/n",
    "generalized-g",
    "robust",
    "proposed-I",
    "proposed-II",
]


def test_null_marginal_closed_form():
    y = np.array([1.0, 2.0, 3.0, 4.0, 6.0])
    X = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0]])
    d = Dataset.from_arrays(y, X)
    tss = float(np.sum((y - y.mean()) ** 2))
    expected = gammaln(2.0) - 2.0 * math.log(math.pi) - 0.5 * math.log(5.0) - 2.0 * math.log(tss)
    ev = log_marginal_null(d)
    assert ev.log_m == pytest.approx(expected, abs=1e-12)
    assert ev.method == "closed-form"
    assert log_marginal(d, ModelIndex.null(), ZellnerSiow(n=5)).log_m == ev.log_m


@pytest.mark.parametrize("name", CONTINUOUS)
def test_null_g_integral_is_prior_mass(name):
    prior = PRESETS[name].resolve(30, 5)
    value, _ = log_g_integral(30, 0, 1.0, prior)
    assert value == pytest.approx(0.0, abs=1e-8)


def test_fixed_g_closed_form(toy_dataset):
    alpha = ModelIndex((1, 2))
    g = 400.0
    stats = fit_stats(toy_dataset, alpha)
    n = toy_dataset.n
    expected = (
        log_prefactor(n, toy_dataset.s_y2)
        + 0.5 * (n - 3) * math.log1p(g)
        - 0.5 * (n - 1) * math.log1p(g * (1.0 - stats.r2))
    )
    ev = log_marginal(toy_dataset, alpha, FixedG(g=g))
    assert ev.log_m == pytest.approx(expected, abs=1e-10)
    assert ev.method == "closed-form"


@pytest.mark.parametrize("name", CONTINUOUS)
@pytest.mark.parametrize(
    "n,p_alpha,eps",
    [
        (20, 1, 0.6),
        (35, 2, 0.95),
        (60, 4, 0.2),
        (100, 7, 0.3),
        (150, 3, 0.9),
        (180, 9, 0.12),
        (200, 10, 0.05),
    ],
)
def test_g_integral_matches_dense_oracle(name, n, p_alpha, eps):
    prior = PRESETS[name].resolve(n, 12)
    value, err = log_g_integral(n, p_alpha, eps, prior)
    assert err <= 1e-9
    assert value == pytest.approx(log_g_oracle(n, p_alpha, eps, prior), abs=1e-8)


def test_quadrature_on_dataset_matches_oracle():
    d = make_dataset(n=80, p=6, seed=7)
    alpha = ModelIndex((1, 2, 5))
    prior = PRESETS["proposed-II"].resolve(d.n, d.p)
    ev = log_marginal_quadrature(d, alpha, prior)
    stats = fit_stats(d, alpha)
    oracle = log_prefactor(d.n, d.s_y2) + log_g_oracle(d.n, 3, stats.residual_fraction, prior)
    assert ev.log_m == pytest.approx(oracle, abs=1e-8)
    assert ev.method == "quadrature"
    assert ev.p_alpha == 3


@pytest.mark.parametrize("name", CONTINUOUS)
def test_bayes_factor_negative_without_fit(name):
    prior = PRESETS[name].resolve(40, 5)
    assert log_bf_from_stats(40, 3, 1.0, prior) < 0.0


def test_bayes_factor_increases_with_r2():
    prior = ScaledInvChiSq(nu=1.0, tau2=2500.0)
    values = [log_bf_from_stats(50, 4, eps, prior) for eps in (0.9, 0.5, 0.1, 0.01)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_bayes_factor_vs_null_cancels_prefactor(toy_dataset):
    alpha = ModelIndex((1,))
    prior = ZellnerSiow(n=toy_dataset.n)
    direct = log_marginal(toy_dataset, alpha, prior).log_m - log_marginal_null(toy_dataset).log_m
    assert log_bayes_factor_vs_null(toy_dataset, alpha, prior) == pytest.approx(direct, abs=1e-9)


def test_signal_model_beats_null(toy_dataset):
    prior = PRESETS["proposed-I"].resolve(toy_dataset.n, toy_dataset.p)
    assert log_bayes_factor_vs_null(toy_dataset, ModelIndex((1, 2)), prior) > 5.0


@pytest.mark.parametrize("name", ["zellner-siow", "robust", "proposed-II"])
def test_log_marginal_ignores_column_order(toy_dataset, name):
    d = toy_dataset
    prior = PRESETS[name].resolve(d.n, d.p)
    perm = np.array([3, 0, 4, 1, 2])
    shuffled = Dataset.from_arrays(d.y, d.X[:, perm])
    for alpha in [ModelIndex((1,)), ModelIndex((1, 2, 4)), ModelIndex.full(5)]:
        moved = ModelIndex.of(int(np.flatnonzero(perm == c)[0]) + 1 for c in alpha.columns())
        assert log_marginal(shuffled, moved, prior).log_m == pytest.approx(
            log_marginal(d, alpha, prior).log_m, abs=1e-9
        )


def test_bayes_factor_ignores_response_scale(toy_dataset):
    d = toy_dataset
    doubled = Dataset.from_arrays(2.0 * d.y, d.X)
    prior = PRESETS["proposed-I"].resolve(d.n, d.p)
    for alpha in [ModelIndex((1,)), ModelIndex((1, 2)), ModelIndex((2, 3, 5))]:
        assert log_bayes_factor_vs_null(doubled, alpha, prior) == pytest.approx(
            log_bayes_factor_vs_null(d, alpha, prior), abs=1e-9
        )
        shift = log_marginal(doubled, alpha, prior).log_m - log_marginal(d, alpha, prior).log_m
        assert shift == pytest.approx(-(d.n - 1) * math.log(2.0), abs=1e-9)


def test_trimmed_grid_keeps_the_integral():
    n, p_alpha, eps = 150, 5, 0.3
    prior = ScaledInvChiSq(nu=1.0, tau2=float(n) ** 2)
    log_f = _log_integrand_v(n, p_alpha, eps, prior)
    v_grid = (1.0 / (1.0 + _G_GRID))[::-1]
    breaks = _initial_breaks(log_f, v_grid, 1.0)
    assert len(breaks) < 0.6 * v_grid.size
    full = log_integrate(log_f, 0.0, 1.0, breakpoints=v_grid, tol=1e-12)
    assert log_g_integral(n, p_alpha, eps, prior)[0] == pytest.approx(full.log_value, abs=1e-9)


def test_exact_fit_gives_zero_bayes_factor(rng):
    d = Dataset.from_arrays(rng.standard_normal(4), rng.standard_normal((4, 3)))
    prior = ZellnerSiow(n=4)
    assert log_bayes_factor_vs_null(d, ModelIndex.full(3), prior) == 0.0


def test_saturated_fit_raises():
    with pytest.raises(SaturatedFitError) as exc:
        log_g_integral(50, 4, 1e-15, ScaledInvChiSq(nu=1.0, tau2=2500.0))
    assert exc.value.p_alpha == 4


def test_constant_response(rng):
    d = Dataset.from_arrays(np.full(10, 3.0), rng.standard_normal((10, 2)))
    with pytest.raises(DegenerateResponseError):
        log_marginal(d, ModelIndex.null(), ZellnerSiow(n=10))
    with pytest.raises(DegenerateResponseError):
        log_marginal(d, ModelIndex((1,)), ZellnerSiow(n=10))


@pytest.mark.parametrize("tol", [1e-13, 1e-5])
def test_tolerance_range(tol):
    with pytest.raises(InvalidInputError):
        log_g_integral(30, 2, 0.5, ZellnerSiow(n=30), tol=tol)


def test_p_alpha_range():
    with pytest.raises(InvalidInputError):
        log_g_integral(10, 10, 0.5, ZellnerSiow(n=10))


def test_quadrature_rejects_point_mass(toy_dataset):
    with pytest.raises(UnsupportedOperationError):
        log_marginal_quadrature(toy_dataset, ModelIndex((1,)), FixedG(g=10.0))


class TestApproximation:
    def test_close_to_exact_at_large_n(self):
        d = make_dataset(n=200, p=4, beta=(0.5, 0.5), seed=11)
        alpha = ModelIndex((1, 2))
        prior = ScaledInvChiSq(nu=2.0, tau2=200.0 ** 2)
        exact = log_marginal(d, alpha, prior).log_m
        approx = log_marginal(d, alpha, prior, method="approximation")
        assert approx.method == "approximation"
        assert approx.log_m == pytest.approx(exact, abs=0.05)

    def test_offset_from_unscaled_form(self, toy_dataset):
        d = toy_dataset
        n, nu = d.n, 2.0
        alpha = ModelIndex((1, 2))
        eps = fit_stats(d, alpha).residual_fraction
        unscaled = (
            gammaln(0.5 * (n - 1))
            + gammaln(0.5 * (nu + 2))
            - gammaln(0.5 * nu)
            - 0.5 * math.log(n)
            - 0.5 * (n - 1) * math.log(math.pi * d.s_y2 * eps)
            - math.log(n * n * nu / 2.0)
        )
        ev = log_marginal_approx(d, alpha, nu, float(n) ** 2)
        assert ev.log_m + 0.5 * (n - 1) * math.log(n) == pytest.approx(unscaled, abs=1e-9)

    def test_null_delegates(self, toy_dataset):
        n = toy_dataset.n
        ev = log_marginal_approx(toy_dataset, ModelIndex.null(), 1.0, float(n * n))
        assert ev.log_m == log_marginal_null(toy_dataset).log_m

    def test_requires_tau2_n_squared(self, toy_dataset):
        with pytest.raises(UnsupportedOperationError):
            log_marginal_approx(toy_dataset, ModelIndex((1,)), 1.0, 2.0 * toy_dataset.n ** 2)

    def test_requires_scaled_inv_chisq(self, toy_dataset):
        with pytest.raises(UnsupportedOperationError):
            log_marginal(toy_dataset, ModelIndex((1,)), ZellnerSiow(n=40), method="approximation")

    def test_unknown_method(self, toy_dataset):
        with pytest.raises(InvalidInputError):
            log_marginal(toy_dataset, ModelIndex((1,)), ZellnerSiow(n=40), method="laplace")


class TestModelPrior:
    def test_parse(self):
        assert ModelPrior.parse("uniform") == ModelPrior()
        assert ModelPrior.parse("bernoulli:0.3") == ModelPrior(kind="bernoulli", q=0.3)

    @pytest.mark.parametrize("text", ["bernoulli:2", "bernoulli:", "beta-binomial", "uniform:0.5"])
    def test_parse_rejects(self, text):
        with pytest.raises(InvalidInputError):
            ModelPrior.parse(text)

    def test_log_mass(self):
        mp = ModelPrior(kind="bernoulli", q=0.25)
        assert mp.log_mass(1, 3) == pytest.approx(math.log(0.25) + 2 * math.log(0.75))
        assert ModelPrior().log_mass(2, 5) == 0.0


def _ev(log_m, p_alpha=0):
    return MarginalEvaluation(log_m=log_m, method="closed-form", r2=0.0, p_alpha=p_alpha)


class TestPosteriorProbs:
    def test_normalised_brute_force(self):
        evals = [
            (ModelIndex.null(), _ev(-10.0)),
            (ModelIndex((1,)), _ev(-9.0, 1)),
            (ModelIndex((2,)), _ev(-12.0, 1)),
        ]
        probs = posterior_probs(evals, ModelPrior())
        w = np.exp([-10.0, -9.0, -12.0])
        assert [probs[m] for m, _ in evals] == pytest.approx(list(w / w.sum()), rel=1e-12)
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)

    def test_large_log_marginals(self):
        evals = [
            (ModelIndex.null(), _ev(-5000.0)),
            (ModelIndex((1,)), _ev(-5000.0 + math.log(3.0), 1)),
        ]
        probs = posterior_probs(evals, ModelPrior())
        assert probs[ModelIndex((1,))] == pytest.approx(0.75)

    def test_bernoulli_prior(self):
        evals = [(ModelIndex.null(), _ev(0.0)), (ModelIndex((1,)), _ev(0.0, 1))]
        probs = posterior_probs(evals, ModelPrior(kind="bernoulli", q=0.2), p=1)
        assert probs[ModelIndex((1,))] == pytest.approx(0.2)

    def test_bernoulli_needs_p(self):
        with pytest.raises(InvalidInputError):
            posterior_probs([(ModelIndex.null(), _ev(0.0))], ModelPrior(kind="bernoulli", q=0.2))

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            posterior_probs([], ModelPrior())

    def test_duplicates(self):
        with pytest.raises(InvalidInputError):
            posterior_probs([(ModelIndex.null(), _ev(0.0)), (ModelIndex.null(), _ev(1.0))], ModelPrior())
