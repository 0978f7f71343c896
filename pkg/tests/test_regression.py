import numpy as np
import pytest

from gselect.exceptions import DegenerateDesignError, InvalidInputError, InvalidRegimeError
from gselect.stats.regression import (
    Dataset,
    ModelIndex,
    center_columns,
    fit_stats,
    residual_quadratic,
)
from tests.oracles import make_dataset


def _dense_r2(d: Dataset, alpha: ModelIndex) -> float:
    Z = d.design(alpha)
    beta = np.linalg.solve(Z.T @ Z, Z.T @ d.y)
    resid = d.y - Z @ beta
    return 1.0 - resid @ resid / d.total_ss


class TestModelIndex:
    def test_mask_round_trip(self):
        alpha = ModelIndex((1, 3, 4))
        assert alpha.mask == 0b1101
        assert ModelIndex.from_mask(alpha.mask) == alpha

    def test_of_sorts(self):
        assert ModelIndex.of([4, 1, 3]) == ModelIndex((1, 3, 4))

    def test_label(self):
        assert ModelIndex((1, 2)).label == "{1,2}"
        assert ModelIndex.null().label == "{}"

    def test_prefix_and_full(self):
        assert ModelIndex.prefix(3) == ModelIndex.full(3) == ModelIndex((1, 2, 3))
        assert ModelIndex.prefix(0).is_null

    @pytest.mark.parametrize("bad", [(0, 1), (2, 1), (1, 1)])
    def test_rejects_bad_indices(self, bad):
        with pytest.raises(InvalidInputError):
            ModelIndex(bad)

    def test_sort_key_orders_by_size_first(self):
        models = [ModelIndex((2,)), ModelIndex((1, 2)), ModelIndex((1,)), ModelIndex.null()]
        assert sorted(models, key=lambda m: m.sort_key) == [
            ModelIndex.null(), ModelIndex((1,)), ModelIndex((2,)), ModelIndex((1, 2))
        ]


class TestDataset:
    def test_from_arrays_centers(self, rng):
        X = rng.normal(3.0, 1.0, size=(20, 3))
        d = Dataset.from_arrays(rng.standard_normal(20), X)
        assert np.allclose(d.X.sum(axis=0), 0.0, atol=1e-10)
        assert d.centered_columns == 3

    def test_centered_columns_untouched(self, rng):
        X = center_columns(rng.standard_normal((20, 3)))
        d = Dataset.from_arrays(rng.standard_normal(20), X)
        assert d.centered_columns == 0
        assert np.array_equal(d.X, X)

    def test_rejects_uncentered(self, rng):
        with pytest.raises(InvalidInputError, match="not centered"):
            Dataset(y=rng.standard_normal(10), X=rng.normal(1.0, 1.0, (10, 2)))

    def test_rejects_p_ge_n(self, rng):
        with pytest.raises(InvalidRegimeError):
            Dataset.from_arrays(rng.standard_normal(5), rng.standard_normal((5, 5)))

    def test_rejects_non_finite(self, rng):
        y = rng.standard_normal(10)
        y[3] = np.nan
        with pytest.raises(InvalidInputError):
            Dataset.from_arrays(y, rng.standard_normal((10, 2)))

    def test_arrays_are_read_only(self, toy_dataset):
        with pytest.raises(ValueError):
            toy_dataset.y[0] = 1.0

    def test_model_beyond_p(self, toy_dataset):
        with pytest.raises(InvalidInputError):
            fit_stats(toy_dataset, ModelIndex((6,)))


class TestFitStats:
    @pytest.mark.parametrize("indices", [(1,), (2, 4), (1, 2, 3, 4, 5)])
    def test_matches_normal_equations(self, toy_dataset, indices):
        alpha = ModelIndex(indices)
        stats = fit_stats(toy_dataset, alpha)
        assert stats.r2 == pytest.approx(_dense_r2(toy_dataset, alpha), abs=1e-10)
        assert stats.p_alpha == len(indices)
        assert stats.residual_fraction == pytest.approx(1.0 - stats.r2, abs=1e-10)

    def test_null_model(self, toy_dataset):
        stats = fit_stats(toy_dataset, ModelIndex.null())
        assert stats.r2 == 0.0
        assert stats.rss == pytest.approx(toy_dataset.total_ss)
        assert stats.s_y2 == pytest.approx(toy_dataset.y.var())

    def test_r2_monotone_in_nesting(self, toy_dataset):
        r2 = [fit_stats(toy_dataset, ModelIndex.prefix(k)).r2 for k in range(6)]
        assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))

    def test_rank_deficient(self, rng):
        x = rng.standard_normal(15)
        X = np.column_stack([x, 2.0 * x, rng.standard_normal(15)])
        d = Dataset.from_arrays(rng.standard_normal(15), X)
        with pytest.raises(DegenerateDesignError) as exc:
            fit_stats(d, ModelIndex((1, 2)))
        assert exc.value.indices == (1, 2)
        assert exc.value.effective_rank == 2

    def test_exact_fit(self, rng):
        d = Dataset.from_arrays(rng.standard_normal(4), rng.standard_normal((4, 3)))
        stats = fit_stats(d, ModelIndex.full(3))
        assert stats.r2 == pytest.approx(1.0)


def test_residual_quadratic_matches_projector():
    d = make_dataset(n=25, p=4, seed=3)
    mu = np.linspace(-1.0, 2.0, 25) ** 2
    alpha = ModelIndex((1, 3))
    Z = d.design(alpha)
    P = Z @ np.linalg.inv(Z.T @ Z) @ Z.T
    expected = mu @ (np.eye(25) - P) @ mu
    assert residual_quadratic(mu, alpha, d) == pytest.approx(expected, rel=1e-10)


def test_residual_quadratic_null_is_centered_ss():
    d = make_dataset(n=10, p=2, seed=1)
    mu = np.arange(10.0)
    assert residual_quadratic(mu, ModelIndex.null(), d) == pytest.approx(np.sum((mu - mu.mean()) ** 2))
