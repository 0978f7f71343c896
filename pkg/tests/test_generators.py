import numpy as np
import pytest

from gselect.exceptions import ConfigError
from gselect.lab.generators import (
    MU_BUILDERS,
    SCHEME2_SPARSE,
    TrueModelSpec,
    draw_errors,
    draw_replicate,
    draw_truth,
    generate_dataset,
)
from gselect.stats.regression import ModelIndex


def _rng(seed=0):
    return np.random.default_rng(seed)


def test_table1_truth_has_half_the_regressors():
    truth = draw_truth(50, 29, "table1", _rng())
    assert truth.alpha_c.size == 14
    grid = {round(v, 10) for v in (-1.0) ** np.arange(1, 30) * 0.2 * np.arange(1, 30)}
    coefs = [truth.beta0, *truth.beta]
    assert len(set(coefs)) == len(coefs)
    assert all(round(c, 10) in grid for c in coefs)
    assert sorted(truth.xi) == pytest.approx(0.2 * np.arange(1, 30))


def test_scheme1_mean_is_constant():
    d, truth = generate_dataset(60, 29, "scheme1", "normal", seed=5)
    assert truth.alpha_c.is_null
    assert np.all(truth.mu == 5.0)
    assert d.p == 29


def test_scheme2_truth():
    truth = draw_truth(100, 29, "scheme2", _rng(1), small_coef_range=(0.0005, 0.008))
    assert truth.alpha_c == ModelIndex.prefix(15)
    assert truth.target() == SCHEME2_SPARSE
    assert list(truth.beta[:4]) == [2.0, 3.0, 4.0, 5.0]
    small = np.abs(truth.beta[4:])
    assert np.all((small >= 0.0005) & (small <= 0.008))


def test_scheme2_needs_fifteen_regressors():
    with pytest.raises(ConfigError):
        draw_truth(100, 10, "scheme2", _rng())


def test_nested_truth():
    truth = draw_truth(100, 10, "nested", _rng(), nested_k=3)
    assert truth.alpha_c == ModelIndex.prefix(3)
    with pytest.raises(ConfigError):
        draw_truth(100, 10, "nested", _rng(), nested_k=11)


def test_model_false_truth():
    truth = draw_truth(100, 10, "model_false", _rng(), mu_builder="sin-cubic")
    assert not truth.model_true
    assert truth.alpha_c == ModelIndex((1, 2))


def test_p_must_be_below_n():
    with pytest.raises(ConfigError):
        draw_truth(10, 10, "table1", _rng())


def test_truth_validation():
    with pytest.raises(ConfigError):
        TrueModelSpec(ModelIndex((1,)), 1.0, np.array([0.0]), 1.0, np.zeros(3))
    with pytest.raises(ConfigError):
        TrueModelSpec(ModelIndex((1,)), 1.0, np.array([1.0, 2.0]), 1.0, np.zeros(3))
    with pytest.raises(ConfigError):
        TrueModelSpec(ModelIndex((1, 2)), 1.0, np.array([1.0, 2.0]), 1.0, np.zeros(3),
                      mu_builder="nope")


def test_generate_dataset_is_deterministic():
    d1, t1 = generate_dataset(40, 6, "table1", "laplace", seed=11)
    d2, t2 = generate_dataset(40, 6, "table1", "laplace", seed=11)
    assert np.array_equal(d1.y, d2.y)
    assert np.array_equal(d1.X, d2.X)
    assert t1.alpha_c == t2.alpha_c
    d3, _ = generate_dataset(40, 6, "table1", "laplace", seed=12)
    assert not np.array_equal(d1.y, d3.y)


@pytest.mark.parametrize("scheme", ["table1", "model_false"])
def test_mean_recomputes_from_design(scheme):
    truth = draw_truth(50, 6, scheme, _rng(3))
    d, realised = draw_replicate(truth, 50, "normal", _rng(4))
    assert np.array_equal(realised.mu, truth.mean(d.X))
    assert truth.mu is None


def test_design_is_centered():
    d, _ = generate_dataset(30, 4, "nested", "t3", seed=0)
    assert np.allclose(d.X.sum(axis=0), 0.0, atol=1e-10)


def test_mu_builders():
    X = np.array([[0.0, 1.0], [1.0, -2.0]])
    mu = MU_BUILDERS["exp-square"](X, 1.0, np.array([2.0, 1.0]))
    assert mu == pytest.approx([1.0 + 2.0 + 1.0, 1.0 + 2.0 * np.e + 4.0])


class TestErrors:
    def test_normal_variance(self):
        e = draw_errors(_rng(), 200_000, "normal", 2.0)
        assert e.std() == pytest.approx(2.0, rel=0.01)

    def test_laplace_mixed_has_variance_sigma2(self):
        e = draw_errors(_rng(), 200_000, "laplace", 1.0, "mixed")
        assert e.var() == pytest.approx(1.0, rel=0.03)

    def test_laplace_scale(self):
        e = draw_errors(_rng(), 200_000, "laplace", 1.0, "scale")
        assert np.mean(np.abs(e)) == pytest.approx(1.0, rel=0.02)

    def test_t3_scale(self):
        e = draw_errors(_rng(), 200_000, "t3", 1.0, "mixed")
        # median |t3| = 0.7649
        assert np.median(np.abs(e)) == pytest.approx(0.7649, rel=0.02)

    def test_unknown(self):
        with pytest.raises(ConfigError):
            draw_errors(_rng(), 10, "cauchy", 1.0)


@pytest.mark.parametrize("seed", range(6))
def test_table1_slopes_respect_minimum(seed):
    truth = draw_truth(150, 29, "table1", _rng(seed), min_abs_coef=0.6)
    assert np.all(np.abs(truth.beta) >= 0.6 - 1e-12)
    assert truth.beta0 not in set(truth.beta)


def test_minimum_too_large_for_grid():
    with pytest.raises(ConfigError):
        draw_truth(50, 5, "table1", _rng(), min_abs_coef=1.0)


def test_separation_exponent_shrinks_slopes():
    plain = draw_truth(100, 10, "nested", _rng(4))
    shrunk = draw_truth(100, 10, "nested", _rng(4), s_exponent=0.5)
    assert shrunk.beta0 == plain.beta0
    assert shrunk.beta == pytest.approx(plain.beta * 100.0 ** -0.25)
