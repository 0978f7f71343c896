"""
Log marginal likelihoods of normal linear models under mixtures of g-priors.

Every marginal is written as log C(n, S_y^2) plus the log of a one-dimensional
g-integral. The null model and fixed g have closed forms; continuous mixtures
go through log-space quadrature; the scaled inverse chi-square prior with
tau2 = n^2 also has a closed-form approximation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import gammaln, logsumexp

from ..exceptions import (
    DegenerateResponseError,
    InvalidInputError,
    SaturatedFitError,
    UnsupportedOperationError,
)
from .priors import FixedG, GMixturePrior, ScaledInvChiSq
from .quadrature import log_integrate
from .regression import Dataset, ModelIndex, RegressionStats, fit_stats

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
TOL_RANGE = (1e-12, 1e-6)
# 1 - R^2 below this is treated as a saturated fit.
SATURATION_FLOOR = 1e-13

# Initial breakpoints g = 10^(k/8) over [1e-8, 1e18].
_G_GRID = 10.0 ** (np.arange(-64, 145) / 8.0)
# Grid panels this far below the heaviest one are merged into the end panels.
_TRIM_NATS = 40.0

Method = Literal["quadrature", "approximation", "closed-form"]


@dataclass(frozen=True)
class MarginalEvaluation:
    log_m: float
    method: Method
    r2: float
    p_alpha: int
    quad_abs_err: float = 0.0
    residual_fraction: float = 1.0


class ModelPrior(BaseModel):
    """Prior mass over models: uniform, or independent Bernoulli(q) inclusion."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["uniform", "bernoulli"] = "uniform"
    q: Optional[float] = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_q(self):
        if self.kind == "bernoulli" and self.q is None:
            raise ValueError("bernoulli model prior needs q in (0, 1)")
        return self

    @classmethod
    def parse(cls, text: str) -> "ModelPrior":
        """'uniform' or 'bernoulli:<q>'."""
        kind, _, q = text.partition(":")
        if kind == "bernoulli":
            try:
                return cls(kind="bernoulli", q=float(q))
            except ValueError as e:
                raise InvalidInputError(f"Bad model prior {text!r}: {e}")
        if kind == "uniform" and not q:
            return cls()
        raise InvalidInputError(f"Model prior must be 'uniform' or 'bernoulli:<q>' (got {text!r})")

    def log_mass(self, p_alpha: int, p: int) -> float:
        """log p(M_alpha); uniform mass is taken as 1 (it cancels)."""
        if self.kind == "uniform":
            return 0.0
        return p_alpha * math.log(self.q) + (p - p_alpha) * math.log1p(-self.q)

    def describe(self) -> str:
        return "uniform" if self.kind == "uniform" else f"bernoulli:{self.q}"


def _check_tol(tol: Optional[float]) -> float:
    if tol is None:
        return DEFAULT_TOL
    lo, hi = TOL_RANGE
    if not lo <= tol <= hi:
        raise InvalidInputError(f"tol must lie in [{lo:g}, {hi:g}] (got {tol!r})")
    return float(tol)


def log_prefactor(n: int, s_y2: float) -> float:
    """log C = log G((n-1)/2) - (n-1)/2 log pi - 1/2 log n - (n-1)/2 log(n S_y^2)."""
    if s_y2 <= 0.0:
        raise DegenerateResponseError("Response is constant (S_y^2 = 0)")
    h = 0.5 * (n - 1)
    return float(gammaln(h) - h * math.log(math.pi) - 0.5 * math.log(n) - h * math.log(n * s_y2))


def _log_integrand_v(n: int, p_alpha: int, eps: float, prior: GMixturePrior):
    """
    log of the g-integrand after the substitution v = 1/(1+g), dg = dv/v^2:
    (1+g)^((n-1-p)/2) [1 + g eps]^(-(n-1)/2) pi(g).
    """
    h = 0.5 * (n - 1)
    a = 0.5 * (n - 1 - p_alpha)

    def log_f(v):
        g = (1.0 - v) / v
        log_v = np.log(v)
        return (
            -a * log_v
            - h * (np.log(v + eps * (1.0 - v)) - log_v)
            + prior.log_density(g)
            - 2.0 * log_v
        )

    return log_f


def _mode_breakpoint(log_f, v_grid: np.ndarray, vals: np.ndarray) -> Optional[float]:
    """Refine the grid maximum of log_f between its neighbours."""
    if not np.any(np.isfinite(vals)):
        return None
    k = int(np.argmax(vals))
    lo = v_grid[max(k - 1, 0)]
    hi = v_grid[min(k + 1, v_grid.size - 1)]
    if not hi > lo:
        return None
    fine = np.linspace(lo, hi, 66)[1:-1]
    return float(fine[int(np.argmax(log_f(fine)))])


def _initial_breaks(log_f, v_grid: np.ndarray, v_max: float) -> List[float]:
    """
    Grid breakpoints spanning the integrand's mass, plus a refined breakpoint
    at its peak. Grid panels whose mass (value times width) sits more than
    _TRIM_NATS below the largest are left to the two end panels.
    """
    if not v_grid.size:
        return []
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(log_f(v_grid), dtype=float)
    vals = np.where(np.isnan(vals), -np.inf, vals)

    breaks = v_grid
    if np.any(np.isfinite(vals)):
        edges = np.concatenate(([0.0], v_grid, [v_max]))
        mass = vals + np.log(0.5 * (edges[2:] - edges[:-2]))
        keep = np.flatnonzero(mass > np.max(mass) - _TRIM_NATS)
        lo = max(int(keep[0]) - 1, 0)
        hi = min(int(keep[-1]) + 1, v_grid.size - 1)
        breaks = v_grid[lo : hi + 1]

    out = list(breaks)
    peak = _mode_breakpoint(log_f, v_grid, vals)
    if peak is not None:
        out.append(peak)
    return out


def log_g_integral(
    n: int,
    p_alpha: int,
    one_minus_r2: float,
    prior: GMixturePrior,
    tol: Optional[float] = None,
) -> Tuple[float, float]:
    """
    log of the integral over g of (1+g)^((n-1-p)/2) [1 + g(1-R^2)]^(-(n-1)/2) pi(g),
    from sufficient statistics. Returns (value, log-scale error bound).

    Also the log Bayes factor of the model against the null model.
    """
    tol = _check_tol(tol)
    if p_alpha < 0 or p_alpha > n - 1:
        raise InvalidInputError(f"Need 0 <= p_alpha <= n-1 (got p_alpha={p_alpha}, n={n})")
    prior = prior.for_model(p_alpha)

    if isinstance(prior, FixedG):
        g = prior.g
        value = (
            0.5 * (n - 1 - p_alpha) * math.log1p(g)
            - 0.5 * (n - 1) * math.log1p(g * one_minus_r2)
        )
        return value, 0.0
    if one_minus_r2 < SATURATION_FLOOR:
        raise SaturatedFitError(n, p_alpha, one_minus_r2)

    log_f = _log_integrand_v(n, p_alpha, float(one_minus_r2), prior)
    v_max = 1.0 / (1.0 + prior.support())
    v_grid = 1.0 / (1.0 + _G_GRID)
    v_grid = v_grid[v_grid < v_max][::-1]
    breaks = _initial_breaks(log_f, v_grid, v_max)

    result = log_integrate(log_f, 0.0, v_max, breakpoints=breaks, tol=tol)
    logger.debug(
        "g-integral n=%d p=%d 1-R2=%.3e: %.12g (%d panels)",
        n, p_alpha, one_minus_r2, result.log_value, result.panels,
    )
    return result.log_value, result.abs_err


def log_bf_from_stats(
    n: int,
    p_alpha: int,
    one_minus_r2: float,
    prior: GMixturePrior,
    tol: Optional[float] = None,
) -> float:
    return log_g_integral(n, p_alpha, one_minus_r2, prior, tol)[0]


def log_marginal_null(d: Dataset) -> MarginalEvaluation:
    return MarginalEvaluation(
        log_m=log_prefactor(d.n, d.s_y2), method="closed-form", r2=0.0, p_alpha=0
    )


def _model_stats(d: Dataset, alpha: ModelIndex) -> RegressionStats:
    if alpha.is_null:
        raise InvalidInputError("The null model has a closed form; use log_marginal_null")
    if d.s_y2 <= 0.0:
        raise DegenerateResponseError("Response is constant (S_y^2 = 0)")
    return fit_stats(d, alpha)


def _dataset_g_integral(
    d: Dataset, stats: RegressionStats, prior: GMixturePrior, tol: Optional[float] = None
) -> Tuple[float, float]:
    if stats.p_alpha == d.n - 1:
        # n points, n parameters: R^2 = 1 and the integrand is pi(g) itself.
        return 0.0, 0.0
    return log_g_integral(d.n, stats.p_alpha, stats.residual_fraction, prior, tol)


def _fixed_g(d: Dataset, alpha: ModelIndex, prior: FixedG) -> MarginalEvaluation:
    stats = _model_stats(d, alpha)
    value, _ = _dataset_g_integral(d, stats, prior)
    return MarginalEvaluation(
        log_m=log_prefactor(d.n, d.s_y2) + value,
        method="closed-form",
        r2=stats.r2,
        p_alpha=stats.p_alpha,
        residual_fraction=stats.residual_fraction,
    )


def log_marginal_quadrature(
    d: Dataset,
    alpha: ModelIndex,
    prior: GMixturePrior,
    tol: Optional[float] = None,
) -> MarginalEvaluation:
    """log m_alpha(y) with the g-integral evaluated numerically."""
    if not prior.continuous:
        raise UnsupportedOperationError(
            f"{prior.family} has no density to integrate; use log_marginal"
        )
    stats = _model_stats(d, alpha)
    value, err = _dataset_g_integral(d, stats, prior, tol)
    return MarginalEvaluation(
        log_m=log_prefactor(d.n, d.s_y2) + value,
        method="quadrature",
        r2=stats.r2,
        p_alpha=stats.p_alpha,
        quad_abs_err=err,
        residual_fraction=stats.residual_fraction,
    )


def log_marginal_approx(d: Dataset, alpha: ModelIndex, nu: float, tau2: float) -> MarginalEvaluation:
    """
    Closed-form approximation to the marginal under scaled inverse chi-square(nu, n^2):

    log C + log G((nu+p)/2) - log G(nu/2) - (n-1)/2 log(1-R^2) - p/2 log(n^2 nu / 2)

    C is the same prefactor as every other marginal here, built on n S_y^2.
    The textbook form built on S_y^2 alone is larger by ((n-1)/2) log n; ratios,
    Bayes factors and posterior probabilities are unaffected.
    """
    n = d.n
    if nu <= 0:
        raise InvalidInputError(f"nu must be positive (got {nu!r})")
    if not math.isclose(tau2, float(n) ** 2, rel_tol=1e-12):
        raise UnsupportedOperationError(
            f"The approximation holds for tau2 = n^2 = {n * n} only (got tau2={tau2!r})"
        )
    if alpha.is_null:
        return log_marginal_null(d)

    stats = _model_stats(d, alpha)
    eps = stats.residual_fraction
    p_alpha = stats.p_alpha
    if eps <= 0.0:
        raise SaturatedFitError(n, p_alpha, eps)

    log_m = (
        log_prefactor(n, d.s_y2)
        + gammaln(0.5 * (nu + p_alpha))
        - gammaln(0.5 * nu)
        - 0.5 * (n - 1) * math.log(eps)
        - 0.5 * p_alpha * math.log(n * n * nu / 2.0)
    )
    return MarginalEvaluation(
        log_m=float(log_m),
        method="approximation",
        r2=stats.r2,
        p_alpha=p_alpha,
        residual_fraction=eps,
    )


def log_marginal(
    d: Dataset,
    alpha: ModelIndex,
    prior: GMixturePrior,
    method: Literal["exact", "approximation"] = "exact",
    tol: Optional[float] = None,
) -> MarginalEvaluation:
    """Dispatch to the closed form, quadrature, or the approximation."""
    if alpha.is_null:
        d.check_model(alpha)
        return log_marginal_null(d)
    if method == "approximation":
        if not isinstance(prior, ScaledInvChiSq):
            raise UnsupportedOperationError(
                f"The approximation is defined for scaled-inv-chisq only (got {prior.family})"
            )
        return log_marginal_approx(d, alpha, prior.nu, prior.tau2)
    if method != "exact":
        raise InvalidInputError(f"method must be 'exact' or 'approximation' (got {method!r})")
    if isinstance(prior, FixedG):
        return _fixed_g(d, alpha, prior)
    return log_marginal_quadrature(d, alpha, prior, tol)


def log_bayes_factor_vs_null(
    d: Dataset,
    alpha: ModelIndex,
    prior: GMixturePrior,
    tol: Optional[float] = None,
) -> float:
    """log m_alpha / m_null; the S_y^2 prefactor cancels."""
    stats = _model_stats(d, alpha)
    return _dataset_g_integral(d, stats, prior, tol)[0]


def posterior_probs(
    evals: Iterable[Tuple[ModelIndex, MarginalEvaluation]],
    mp: ModelPrior,
    p: Optional[int] = None,
) -> Dict[ModelIndex, float]:
    """
    Posterior model probabilities normalised over the supplied set.

    `p` (total number of regressors) is required for a Bernoulli model prior.
    """
    pairs: List[Tuple[ModelIndex, MarginalEvaluation]] = list(evals)
    if not pairs:
        raise InvalidInputError("posterior_probs needs at least one model")
    models = [m for m, _ in pairs]
    if len(set(models)) != len(models):
        raise InvalidInputError("Duplicate models in posterior_probs input")
    if mp.kind == "bernoulli" and p is None:
        raise InvalidInputError("A Bernoulli model prior needs the total number of regressors p")

    p_total = p if p is not None else 0
    log_w = np.array([mp.log_mass(m.size, p_total) + e.log_m for m, e in pairs])
    probs = np.exp(log_w - logsumexp(log_w))
    probs /= probs.sum()
    return {m: float(w) for m, w in zip(models, probs)}
