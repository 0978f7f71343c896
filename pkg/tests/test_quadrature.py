import math

import numpy as np
import pytest

from gselect.exceptions import QuadratureError
from gselect.stats.quadrature import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, log_integrate


def test_rule_weights():
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0)
    assert np.allclose(NODES, -NODES[::-1])


@pytest.mark.parametrize("k", [0, 1, 5, 12, 20])
def test_monomials(k):
    res = log_integrate(lambda x: k * np.log(x), 0.0, 1.0)
    assert res.log_value == pytest.approx(-math.log(k + 1), abs=1e-12)


def test_sharp_exponential():
    res = log_integrate(lambda x: -1000.0 * x, 0.0, 1.0, tol=1e-12)
    assert res.log_value == pytest.approx(-math.log(1000.0), abs=1e-12)
    assert res.rounds > 0


def test_no_overflow_at_large_magnitude():
    res = log_integrate(lambda x: 2000.0 + np.log(x), 0.0, 1.0)
    assert res.log_value == pytest.approx(2000.0 - math.log(2.0), abs=1e-12)


def test_breakpoints_are_used():
    res = log_integrate(lambda x: np.zeros_like(x), 0.0, 1.0, breakpoints=[0.25, 0.5, 2.0])
    assert res.panels == 3
    assert res.log_value == pytest.approx(0.0, abs=1e-14)


def test_zero_integrand():
    res = log_integrate(lambda x: np.full_like(x, -np.inf), 0.0, 1.0)
    assert res.log_value == -math.inf


def test_gaussian_tail():
    # integral of exp(-x^2/2) over (0, 10)
    res = log_integrate(lambda x: -0.5 * x * x, 0.0, 10.0)
    assert res.log_value == pytest.approx(math.log(math.sqrt(math.pi / 2.0)), abs=1e-12)


def test_panel_budget_exhausted():
    with pytest.raises(QuadratureError) as exc:
        log_integrate(lambda x: -0.5 * np.log(x), 0.0, 1.0, tol=1e-12, max_panels=4)
    assert math.isfinite(exc.value.partial)
    assert exc.value.abs_err > 1e-12


def test_empty_interval():
    with pytest.raises(ValueError):
        log_integrate(lambda x: x, 1.0, 1.0)
