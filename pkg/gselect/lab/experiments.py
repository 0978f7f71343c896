"""
Replicated consistency experiments.

Every cell (error law, n, p) draws one truth, then runs `replicates`
independent datasets through each prior's model search in parallel. Streams
are split from the base seed by SeedSequence spawn keys:

    truth      (0, n, p)
    data       (1, n, p, error_code, replicate)
    chain      (2, n, p, error_code, replicate, prior_position)
    approx     (3, 0) models, (3, 1, dataset) data
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..exceptions import (
    ConfigError,
    InvalidInputError,
    ModelFalseDesignError,
    SaturatedFitError,
)
from ..schemas import (
    ERROR_CODES,
    ExperimentConfig,
    ExperimentReport,
    ReplicateRecord,
    ReportRow,
)
from ..stats.marginal import ModelPrior, log_bf_from_stats, log_marginal_approx, log_marginal_quadrature
from ..stats.priors import FixedG, GMixturePrior, ScaledInvChiSq
from ..stats.regression import Dataset, ModelIndex, center_columns, residual_quadratic
from ..stats.search import enumerate_all, search
from .generators import TrueModelSpec, draw_replicate, draw_truth

logger = logging.getLogger(__name__)

TRUTH_STREAM = 0
DATA_STREAM = 1
CHAIN_STREAM = 2
APPROX_STREAM = 3

MODEL_FALSE_MAX_P = 14

# 1 - R^2 grid probed for information consistency.
INFO_GRID: Tuple[float, ...] = tuple(10.0 ** -k for k in range(2, 13, 2))
DIVERGENCE_SLOPE = 0.25
PLATEAU_STEP = 0.1

NuChoice = Union[int, str]


def seed_sequence(base_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=tuple(int(k) for k in key))


def stream(base_seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for one named stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(base_seed, *key)))


@dataclass(frozen=True)
class _Outcome:
    value: float
    visited: bool
    top: str
    min_residual_fraction: float


def _method_for(prior: GMixturePrior, cfg: ExperimentConfig, n: int) -> str:
    """The approximation only applies to scaled-inv-chisq with tau2 = n^2."""
    if (
        cfg.marginal_method == "approximation"
        and isinstance(prior, ScaledInvChiSq)
        and math.isclose(prior.tau2, float(n) ** 2, rel_tol=1e-12)
    ):
        return "approximation"
    return "exact"


def _draw_cell_truth(cfg: ExperimentConfig, n: int, p: int) -> TrueModelSpec:
    return draw_truth(
        n,
        p,
        cfg.scheme,
        stream(cfg.base_seed, TRUTH_STREAM, n, p),
        sigma=cfg.sigma,
        small_coef_range=cfg.small_coef_range,
        nested_k=cfg.nested_k,
        mu_builder=cfg.mu_builder,
        min_abs_coef=cfg.min_abs_coef,
        s_exponent=cfg.s_exponent,
    )


def _probability_replicate(
    cfg: ExperimentConfig,
    truth: TrueModelSpec,
    n: int,
    p: int,
    error_dist: str,
    rep: int,
    priors: Sequence[GMixturePrior],
    mode: str,
) -> List[_Outcome]:
    code = ERROR_CODES[error_dist]
    d, _ = draw_replicate(
        truth, n, error_dist, stream(cfg.base_seed, DATA_STREAM, n, p, code, rep), cfg.dispersion
    )
    mp = ModelPrior.parse(cfg.model_prior)
    target = truth.target()

    out = []
    for pos, prior in enumerate(priors):
        try:
            res = search(
                d,
                prior,
                mp,
                mode=mode,
                max_p=cfg.max_enumerate_p,
                chain_length=cfg.chain_length,
                burn_in=cfg.burn_in,
                seed=seed_sequence(cfg.base_seed, CHAIN_STREAM, n, p, code, rep, pos),
                method=_method_for(prior, cfg, n),
                tol=cfg.tol,
            )
        except SaturatedFitError as e:
            logger.warning("Replicate %d, prior %d skipped: %s", rep, pos, e)
            out.append(_Outcome(math.nan, False, "", math.nan))
            continue
        out.append(
            _Outcome(res.prob(target), target in res.probs, res.top.label, res.min_residual_fraction)
        )
    return out


def _summarise(values: np.ndarray) -> Tuple[float, float, int]:
    """mean, mean squared distance from 1, and the number of usable replicates."""
    ok = values[~np.isnan(values)]
    if ok.size == 0:
        return math.nan, math.nan, 0
    return float(ok.mean()), float(np.mean((ok - 1.0) ** 2)), int(ok.size)


def _target_kind(cfg: ExperimentConfig) -> str:
    return {"scheme1": "null", "scheme2": "sparse", "model_false": "ratio"}.get(cfg.scheme, "true")


def _run_cells(cfg: ExperimentConfig, replicate_fn, mode: str, threads: int) -> ExperimentReport:
    rows: List[ReportRow] = []
    records: List[ReplicateRecord] = []
    kind = _target_kind(cfg)

    for error_dist, n, p in cfg.cells():
        if p >= n:
            raise ConfigError(f"Need p < n (got n={n}, p={p})", keys=["n_list", "p_plus_1_list"])
        truth = _draw_cell_truth(cfg, n, p)
        priors = [spec.resolve(n, p) for spec in cfg.priors]
        logger.info(
            "%s cell: %s n=%d p+1=%d, %d replicates x %d priors",
            cfg.scheme, error_dist, n, p + 1, cfg.replicates, len(priors),
        )

        outcomes = Parallel(n_jobs=threads)(
            delayed(replicate_fn)(cfg, truth, n, p, error_dist, rep, priors, mode)
            for rep in range(cfg.replicates)
        )

        target_label = "min D" if kind == "ratio" else truth.target().label
        for pos, spec in enumerate(cfg.priors):
            cell = [o[pos] for o in outcomes]
            values = np.array([c.value for c in cell], dtype=float)
            mean, mse, count = _summarise(values)
            min_rf = [c.min_residual_fraction for c in cell if not math.isnan(c.min_residual_fraction)]
            rows.append(
                ReportRow(
                    scheme=cfg.scheme,
                    error_dist=error_dist,
                    dispersion=cfg.dispersion,
                    prior=spec.label,
                    n=n,
                    p_plus_1=p + 1,
                    target=kind,
                    target_model=target_label,
                    mean=mean,
                    mse=mse,
                    replicates=count,
                    visit_rate=None if kind == "ratio" else float(np.mean([c.visited for c in cell])),
                    min_residual_fraction=min(min_rf) if min_rf else None,
                    base_seed=cfg.base_seed,
                )
            )
            records.extend(
                ReplicateRecord(
                    scheme=cfg.scheme,
                    error_dist=error_dist,
                    prior=spec.label,
                    n=n,
                    p_plus_1=p + 1,
                    replicate=rep,
                    value=c.value,
                    visited=c.visited,
                    top=c.top,
                )
                for rep, c in enumerate(cell)
            )
            logger.info("  %-16s n=%-4d mean=%.4f mse=%.4f", spec.label, n, mean, mse)

    return ExperimentReport(config=cfg, rows=rows, records=records)


def _require_scheme(cfg: ExperimentConfig, *schemes: str) -> None:
    if cfg.scheme not in schemes:
        raise ConfigError(
            f"Config scheme {cfg.scheme!r} does not match this experiment ({', '.join(schemes)})",
            keys=["scheme"],
        )


def run_table1(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Posterior probability of the true model per (error law, p+1, n, prior)."""
    _require_scheme(cfg, "table1")
    return _run_cells(cfg, _probability_replicate, cfg.search_mode, threads)


def run_scheme(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Null-true (scheme1) or sparse-target (scheme2) sweeps over n."""
    _require_scheme(cfg, "scheme1", "scheme2")
    return _run_cells(cfg, _probability_replicate, cfg.search_mode, threads)


def run_nested(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Consistency within the nested space {}, {1}, ..., {1..p}."""
    _require_scheme(cfg, "nested")
    return _run_cells(cfg, _probability_replicate, "nested", threads)


# --- model-false ---------------------------------------------------------------


def kl_distances(mu: np.ndarray, d: Dataset, sigma: float = 1.0) -> np.ndarray:
    """D_n(alpha) = mu'(I - P_alpha) mu / (2 sigma^2) for every model, indexed by bitmask."""
    if d.p > MODEL_FALSE_MAX_P:
        raise ConfigError(
            f"Exhaustive distances need p <= {MODEL_FALSE_MAX_P} (got p={d.p})",
            keys=["p_plus_1_list"],
        )
    dn = np.array([residual_quadratic(mu, ModelIndex.from_mask(m), d) for m in range(1 << d.p)])
    dn /= 2.0 * sigma**2
    # mu inside span{1, X_alpha} for some alpha
    if dn.min() <= 1e-10 * max(dn[0], np.finfo(float).tiny):
        best = ModelIndex.from_mask(int(np.argmin(dn)))
        raise ModelFalseDesignError(
            f"The mean lies in the span of model {best.label}; the model-false ratio is undefined"
        )
    return dn


def model_false_ratio(
    d: Dataset,
    mu: np.ndarray,
    prior: GMixturePrior,
    mp: ModelPrior,
    sigma: float = 1.0,
    method: str = "exact",
    tol: Optional[float] = None,
    distances: Optional[np.ndarray] = None,
) -> Tuple[float, ModelIndex]:
    """D_n(alpha_hat) / min D_n, with alpha_hat the posterior mode over all models."""
    dn = kl_distances(mu, d, sigma) if distances is None else distances
    res = enumerate_all(d, prior, mp, max_p=MODEL_FALSE_MAX_P, method=method, tol=tol)
    return float(dn[res.top.mask] / dn.min()), res.top


def _ratio_replicate(
    cfg: ExperimentConfig,
    truth: TrueModelSpec,
    n: int,
    p: int,
    error_dist: str,
    rep: int,
    priors: Sequence[GMixturePrior],
    mode: str,
) -> List[_Outcome]:
    code = ERROR_CODES[error_dist]
    d, realised = draw_replicate(
        truth, n, error_dist, stream(cfg.base_seed, DATA_STREAM, n, p, code, rep), cfg.dispersion
    )
    mp = ModelPrior.parse(cfg.model_prior)
    dn = kl_distances(realised.mu, d, truth.sigma)

    out = []
    for prior in priors:
        ratio, top = model_false_ratio(
            d, realised.mu, prior, mp, truth.sigma, _method_for(prior, cfg, n), cfg.tol, dn
        )
        out.append(_Outcome(ratio, True, top.label, math.nan))
    return out


def run_model_false(
    cfg: ExperimentConfig, mu_builder: Optional[str] = None, threads: int = 1
) -> ExperimentReport:
    """Ratio D_n(alpha_hat) / min D_n per (n, prior) with a nonlinear mean."""
    _require_scheme(cfg, "model_false")
    if mu_builder is not None:
        cfg = cfg.model_copy(update={"mu_builder": mu_builder})
    for _, n, p in cfg.cells():
        if p > MODEL_FALSE_MAX_P:
            raise ConfigError(
                f"model_false needs p <= {MODEL_FALSE_MAX_P} (got p={p})", keys=["p_plus_1_list"]
            )
    return _run_cells(cfg, _ratio_replicate, "enumerate", threads)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Run whatever scheme the config names."""
    if cfg.scheme == "table1":
        return run_table1(cfg, threads)
    if cfg.scheme in ("scheme1", "scheme2"):
        return run_scheme(cfg, threads)
    if cfg.scheme == "nested":
        return run_nested(cfg, threads)
    return run_model_false(cfg, threads=threads)


# --- information consistency --------------------------------------------------


@dataclass(frozen=True)
class InfoConsistencyProfile:
    """log BF against the null as 1 - R^2 shrinks, at fixed n and p(alpha)."""

    n: int
    p_alpha: int
    prior: str
    grid: Tuple[float, ...]
    log_bf: Tuple[float, ...]
    slope: float
    diverges: bool
    plateau: bool
    stated_threshold: Optional[int] = None
    tail_threshold: Optional[int] = None

    @property
    def stated_consistent(self) -> Optional[bool]:
        return None if self.stated_threshold is None else self.n >= self.stated_threshold

    @property
    def tail_consistent(self) -> Optional[bool]:
        return None if self.tail_threshold is None else self.n >= self.tail_threshold

    def summary(self) -> Dict[str, object]:
        return {
            "prior": self.prior,
            "n": self.n,
            "p_alpha": self.p_alpha,
            "log_bf_last": self.log_bf[-1],
            "slope": self.slope,
            "diverges": self.diverges,
            "plateau": self.plateau,
            "stated_threshold": self.stated_threshold,
            "tail_threshold": self.tail_threshold,
        }


def _nu_value(nu_choice: NuChoice, p_alpha: int) -> float:
    if nu_choice in (1, "1"):
        return 1.0
    if nu_choice == "p":
        return float(p_alpha)
    raise InvalidInputError(f"nu_choice must be 1 or 'p' (got {nu_choice!r})")


def run_info_consistency(
    n: int,
    p_alpha: int,
    nu_choice: NuChoice = 1,
    prior: Optional[GMixturePrior] = None,
    grid: Sequence[float] = INFO_GRID,
    tol: Optional[float] = None,
) -> InfoConsistencyProfile:
    """
    Probe log BF(alpha : null) along a shrinking 1 - R^2 grid.

    With `prior` unset the proposed scaled-inv-chisq(nu, n^2) is used, nu = 1
    or nu = p(alpha). The last grid step gives the growth slope of log BF in
    -log(1 - R^2): bounded away from zero means divergence.
    """
    if not 1 <= p_alpha < n:
        raise InvalidInputError(f"Need 1 <= p_alpha < n (got n={n}, p_alpha={p_alpha})")
    grid = tuple(float(x) for x in grid)
    if len(grid) < 2:
        raise InvalidInputError("The 1 - R^2 grid needs at least two points")

    stated = tail = None
    if prior is None:
        nu = _nu_value(nu_choice, p_alpha)
        prior = ScaledInvChiSq(nu=nu, tau2=float(n) ** 2)
        stated = p_alpha + 1 if nu_choice in (1, "1") else 2 * p_alpha
        tail = int(math.ceil(p_alpha + nu + 1))
        label = f"proposed(nu={'1' if nu_choice in (1, '1') else 'p'})"
    else:
        label = prior.describe()

    log_bf = tuple(log_bf_from_stats(n, p_alpha, eps, prior, tol) for eps in grid)
    step = log_bf[-1] - log_bf[-2]
    slope = step / (math.log(grid[-2]) - math.log(grid[-1]))
    profile = InfoConsistencyProfile(
        n=n,
        p_alpha=p_alpha,
        prior=label,
        grid=grid,
        log_bf=log_bf,
        slope=slope,
        diverges=slope > DIVERGENCE_SLOPE,
        plateau=step < PLATEAU_STEP,
        stated_threshold=stated,
        tail_threshold=tail,
    )
    logger.debug("info-consistency %s n=%d p=%d slope=%.3f", label, n, p_alpha, slope)
    return profile


def info_consistency_sweep(p_alpha: int, tol: Optional[float] = None) -> List[InfoConsistencyProfile]:
    """Profiles for nu = 1, nu = p and g = n^2 at sample sizes around their thresholds."""
    profiles = []
    for n in sorted({p_alpha + 1, p_alpha + 2, p_alpha + 5}):
        profiles.append(run_info_consistency(n, p_alpha, 1, tol=tol))
    for n in sorted({p_alpha + 1, 2 * p_alpha, 2 * p_alpha + 2}):
        if n > p_alpha:
            profiles.append(run_info_consistency(n, p_alpha, "p", tol=tol))
    for n in sorted({p_alpha + 5, 2 * p_alpha + 2}):
        profiles.append(
            run_info_consistency(n, p_alpha, prior=FixedG(g=float(n) ** 2), tol=tol)
        )
    return profiles


# --- approximation accuracy ---------------------------------------------------


@dataclass(frozen=True)
class ApproxStudy:
    """Relative error |m / m_approx - 1| per (n, dataset, model), its median per n and decay exponent."""

    b: float
    nu_choice: str
    errors: pd.DataFrame
    medians: Dict[int, float]
    exponent: float

    def median_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"n": list(self.medians), "median_rel_error": list(self.medians.values())}
        )


@dataclass(frozen=True)
class _ApproxDraws:
    """Model draws shared by every n: a size fraction and a column ranking per model."""

    size_frac: np.ndarray
    ranking: np.ndarray

    def models(self, p: int) -> List[ModelIndex]:
        out = []
        for frac, rank in zip(self.size_frac, self.ranking):
            size = max(1, math.ceil(frac * p))
            others = np.argsort(rank[1:p], kind="stable")[: size - 1] + 2
            out.append(ModelIndex.of(np.concatenate(([1], others))))
        return out


def _approx_dataset(noise: np.ndarray, errors: np.ndarray, n: int, p: int) -> Dataset:
    """Leading block of one shared draw; the signal sits on regressor 1 only."""
    X = center_columns(noise[:n, :p])
    return Dataset.from_arrays(X[:, 0] + errors[:n], X)


def run_approx_study(
    b: float,
    n_list: Sequence[int],
    nu_choice: NuChoice = 1,
    models_per_n: int = 60,
    seed: int = 0,
    tol: Optional[float] = None,
    datasets_per_n: int = 8,
) -> ApproxStudy:
    """
    Accuracy of the closed-form approximation along p = ceil(n^b).

    Every n sees the same models and the leading rows of the same draws, so
    the median error follows n rather than the draw. Models always contain
    the true regressor 1 and take a fixed fraction of the p columns, so their
    size grows with p.

    Args:
        b: Growth exponent of p in n
        n_list: Sample sizes
        nu_choice: 1 or 'p'
        models_per_n: Random models evaluated per dataset
        seed: Base seed
        tol: Quadrature tolerance
        datasets_per_n: Simulated datasets per sample size

    Returns:
        ApproxStudy with the fitted exponent of median error against n
    """
    if not 0 < b < 1:
        raise InvalidInputError(f"b must lie in (0, 1) (got {b!r})")
    if models_per_n < 1:
        raise InvalidInputError(f"models_per_n must be >= 1 (got {models_per_n})")
    if datasets_per_n < 1:
        raise InvalidInputError(f"datasets_per_n must be >= 1 (got {datasets_per_n})")
    if not n_list:
        raise InvalidInputError("n_list must not be empty")

    sizes = [(int(n), math.ceil(n**b)) for n in n_list]
    for n, p in sizes:
        if p >= n:
            raise InvalidInputError(f"ceil(n^b) = {p} must be < n = {n}")
    n_max = max(n for n, _ in sizes)
    p_max = max(p for _, p in sizes)

    model_rng = stream(seed, APPROX_STREAM, 0)
    draws = _ApproxDraws(
        size_frac=model_rng.random(models_per_n),
        ranking=model_rng.random((models_per_n, p_max)),
    )

    rows = []
    for rep in range(datasets_per_n):
        data_rng = stream(seed, APPROX_STREAM, 1, rep)
        noise = data_rng.standard_normal((n_max, p_max))
        errors = data_rng.standard_normal(n_max)
        for n, p in sizes:
            d = _approx_dataset(noise, errors, n, p)
            nu = _nu_value(nu_choice, p)
            prior = ScaledInvChiSq(nu=nu, tau2=float(n) ** 2)
            for alpha in draws.models(p):
                exact = log_marginal_quadrature(d, alpha, prior, tol).log_m
                approx = log_marginal_approx(d, alpha, nu, prior.tau2).log_m
                rows.append(
                    {
                        "n": n,
                        "p": p,
                        "dataset": rep,
                        "model": alpha.label,
                        "p_alpha": alpha.size,
                        "log_m": exact,
                        "log_m_approx": approx,
                        "rel_error": abs(math.expm1(exact - approx)),
                    }
                )
        logger.info("approx study dataset %d/%d done", rep + 1, datasets_per_n)

    errors_df = pd.DataFrame(rows)
    medians = {
        int(n): float(v)
        for n, v in errors_df.groupby("n", sort=True)["rel_error"].median().items()
    }
    if len(medians) >= 2:
        exponent = float(np.polyfit(np.log(list(medians)), np.log(list(medians.values())), 1)[0])
    else:
        exponent = math.nan
    return ApproxStudy(
        b=b,
        nu_choice=str(nu_choice),
        errors=errors_df,
        medians=medians,
        exponent=exponent,
    )
