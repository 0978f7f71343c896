"""
Simulated regression data for the consistency experiments.

A truth (regressor means, true model, coefficients, sigma) is drawn once per
(n, p) cell and held fixed; each replicate draws a fresh design with the same
regressor means and fresh errors.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..exceptions import ConfigError
from ..schemas import Dispersion, ErrorDist, Scheme
from ..stats.regression import Dataset, ModelIndex, center_columns

logger = logging.getLogger(__name__)

SCHEME2_SIZE = 15
SCHEME2_SPARSE = ModelIndex((1, 2, 3, 4))


def _exp_square(X: np.ndarray, beta0: float, beta: np.ndarray) -> np.ndarray:
    return beta0 + beta[0] * np.exp(X[:, 0]) + beta[1] * X[:, 1] ** 2


def _sin_cubic(X: np.ndarray, beta0: float, beta: np.ndarray) -> np.ndarray:
    return beta0 + beta[0] * np.sin(2.0 * X[:, 0]) + beta[1] * X[:, 1] ** 3


# Nonlinear means over the first two (centered) regressors.
MU_BUILDERS: Dict[str, Callable[[np.ndarray, float, np.ndarray], np.ndarray]] = {
    "exp-square": _exp_square,
    "sin-cubic": _sin_cubic,
}


@dataclass(frozen=True, eq=False)
class TrueModelSpec:
    """
    The data-generating model of a cell.

    For model-true schemes mu = beta0 + X_{alpha_c} beta; with `mu_builder`
    set, beta holds the weights of a nonlinear mean over the columns in
    alpha_c instead. `mu` is filled in per replicate.
    """

    alpha_c: ModelIndex
    beta0: float
    beta: np.ndarray
    sigma: float
    xi: np.ndarray
    scheme: Scheme = "table1"
    alpha_s: Optional[ModelIndex] = None
    mu_builder: Optional[str] = None
    mu: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (self.alpha_c.size,):
            raise ConfigError(
                f"beta must have one entry per true regressor ({self.alpha_c.size}, got {beta.shape})"
            )
        if np.any(beta == 0.0):
            raise ConfigError("All true coefficients must be non-zero")
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive (got {self.sigma!r})")
        if self.mu_builder is not None and self.mu_builder not in MU_BUILDERS:
            raise ConfigError(
                f"Unknown mu_builder {self.mu_builder!r}; choose one of {sorted(MU_BUILDERS)}",
                keys=["mu_builder"],
            )
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float))

    @property
    def p(self) -> int:
        return self.xi.size

    @property
    def model_true(self) -> bool:
        return self.mu_builder is None

    def mean(self, X: np.ndarray) -> np.ndarray:
        """mu for a centered design X."""
        if self.mu_builder is not None:
            return MU_BUILDERS[self.mu_builder](X[:, self.alpha_c.columns()], self.beta0, self.beta)
        return self.beta0 + X[:, self.alpha_c.columns()] @ self.beta

    def target(self) -> ModelIndex:
        """Model whose posterior probability the experiment tracks."""
        return self.alpha_s if self.alpha_s is not None else self.alpha_c


def _alternating_grid(p: int) -> np.ndarray:
    """(-1)^k 0.2 k for k = 1..p."""
    k = np.arange(1, p + 1)
    return np.where(k % 2 == 0, 1.0, -1.0) * 0.2 * k


def _grid_coefficients(
    rng: np.random.Generator, grid: np.ndarray, k: int, min_abs_coef: float
) -> Tuple[float, np.ndarray]:
    """Intercept and k distinct slopes from the grid; slopes keep |beta| >= min_abs_coef."""
    eligible = grid[np.abs(grid) >= min_abs_coef - 1e-12]
    if eligible.size < k:
        raise ConfigError(
            f"Only {eligible.size} grid values reach |beta| >= {min_abs_coef}, need {k}",
            keys=["min_abs_coef"],
        )
    beta = rng.choice(eligible, size=k, replace=False)
    beta0 = float(rng.choice(np.setdiff1d(grid, beta)))
    return beta0, beta


def draw_truth(
    n: int,
    p: int,
    scheme: Scheme,
    rng: np.random.Generator,
    sigma: float = 1.0,
    small_coef_range: Tuple[float, float] = (0.0005, 0.008),
    nested_k: Optional[int] = None,
    mu_builder: str = "exp-square",
    min_abs_coef: float = 0.0,
    s_exponent: Optional[float] = None,
) -> TrueModelSpec:
    """
    Draw the cell-level truth.

    Args:
        n: Sample size (checked against p; sets the s_exponent shrinkage)
        p: Number of regressors
        scheme: table1, scheme1, scheme2, model_false or nested
        rng: Generator for the truth stream
        sigma: Error dispersion
        small_coef_range: Magnitude range of the scheme2 small coefficients
        nested_k: Size of the nested true model (default p // 2)
        mu_builder: Nonlinear mean used by model_false
        min_abs_coef: Smallest slope magnitude drawn for table1 and nested
        s_exponent: Scales table1 and nested slopes by n^(-s/2), so the
            separation of under-fitting models shrinks like n^(-s)

    Returns:
        TrueModelSpec with mu unset
    """
    if p < 1 or p >= n:
        raise ConfigError(f"Need 1 <= p < n (got n={n}, p={p})", keys=["n_list", "p_plus_1_list"])

    xi = rng.permutation(0.2 * np.arange(1, p + 1))
    shrink = 1.0 if s_exponent is None else float(n) ** (-0.5 * s_exponent)

    if scheme == "table1":
        k = p // 2
        alpha_c = ModelIndex.of(rng.choice(p, size=k, replace=False) + 1)
        beta0, beta = _grid_coefficients(rng, _alternating_grid(p), k, min_abs_coef)
        return TrueModelSpec(alpha_c, beta0, shrink * beta, sigma, xi, scheme)

    if scheme == "scheme1":
        return TrueModelSpec(ModelIndex.null(), 5.0, np.empty(0), sigma, xi, scheme)

    if scheme == "scheme2":
        if p < SCHEME2_SIZE:
            raise ConfigError(f"scheme2 needs p >= {SCHEME2_SIZE} (got p={p})", keys=["scheme_p"])
        lo, hi = small_coef_range
        m = SCHEME2_SIZE - 4
        small = rng.uniform(lo, hi, size=m) * rng.choice([-1.0, 1.0], size=m)
        beta = np.concatenate([[2.0, 3.0, 4.0, 5.0], small])
        return TrueModelSpec(
            ModelIndex.prefix(SCHEME2_SIZE), 1.0, beta, sigma, xi, scheme, alpha_s=SCHEME2_SPARSE
        )

    if scheme == "nested":
        k = p // 2 if nested_k is None else nested_k
        if k > p:
            raise ConfigError(f"nested_k={k} exceeds p={p}", keys=["nested_k"])
        beta0, beta = _grid_coefficients(rng, _alternating_grid(max(p, k + 1)), k, min_abs_coef)
        return TrueModelSpec(ModelIndex.prefix(k), beta0, shrink * beta, sigma, xi, scheme)

    if scheme == "model_false":
        if p < 2:
            raise ConfigError(f"model_false needs p >= 2 (got p={p})", keys=["p_plus_1_list"])
        return TrueModelSpec(
            ModelIndex((1, 2)), 1.0, np.array([2.0, 1.0]), sigma, xi, scheme, mu_builder=mu_builder
        )

    raise ConfigError(f"Unknown scheme {scheme!r}", keys=["scheme"])


def draw_errors(
    rng: np.random.Generator,
    n: int,
    error_dist: ErrorDist,
    sigma: float,
    dispersion: Dispersion = "mixed",
) -> np.ndarray:
    """
    Errors with dispersion sigma.

    mixed: normal and Laplace have variance sigma^2, t3 has scale sigma.
    variance: every law has variance sigma^2. scale: every law has scale sigma.
    """
    if error_dist == "normal":
        return sigma * rng.standard_normal(n)
    if error_dist == "laplace":
        b = sigma if dispersion == "scale" else sigma / math.sqrt(2.0)
        return rng.laplace(0.0, b, size=n)
    if error_dist == "t3":
        s = sigma / math.sqrt(3.0) if dispersion == "variance" else sigma
        return s * rng.standard_t(3, size=n)
    raise ConfigError(f"Unknown error distribution {error_dist!r}", keys=["error_dist"])


def draw_replicate(
    truth: TrueModelSpec,
    n: int,
    error_dist: ErrorDist,
    rng: np.random.Generator,
    dispersion: Dispersion = "mixed",
) -> Tuple[Dataset, TrueModelSpec]:
    """Fresh design rows around truth.xi and fresh errors."""
    X = center_columns(truth.xi + rng.standard_normal((n, truth.p)))
    mu = truth.mean(X)
    y = mu + draw_errors(rng, n, error_dist, truth.sigma, dispersion)
    return Dataset.from_arrays(y, X), replace(truth, mu=mu)


def generate_dataset(
    n: int,
    p: int,
    scheme: Scheme,
    error_dist: ErrorDist,
    seed: int,
    dispersion: Dispersion = "mixed",
    **truth_kwargs,
) -> Tuple[Dataset, TrueModelSpec]:
    """Truth and one replicate from a single seed."""
    truth_seq, data_seq = np.random.SeedSequence(seed).spawn(2)
    truth = draw_truth(n, p, scheme, np.random.Generator(np.random.PCG64(truth_seq)), **truth_kwargs)
    return draw_replicate(truth, n, error_dist, np.random.Generator(np.random.PCG64(data_seq)), dispersion)
