from .marginal import (
    MarginalEvaluation,
    ModelPrior,
    log_bayes_factor_vs_null,
    log_bf_from_stats,
    log_g_integral,
    log_marginal,
    log_marginal_approx,
    log_marginal_null,
    log_marginal_quadrature,
    posterior_probs,
)
from .priors import (
    PRESETS,
    TABLE1_PRIORS,
    BetaPrime,
    FixedG,
    GeneralizedG,
    GMixturePrior,
    HyperG,
    HyperGOverN,
    PriorMode,
    PriorSpec,
    Robust,
    ScaledInvChiSq,
    ZellnerSiow,
    get_prior_spec,
    log_density,
    make_proposed,
    mode,
)
from .regression import (
    Dataset,
    ModelIndex,
    RegressionStats,
    center_columns,
    fit_stats,
    residual_quadratic,
)
from .search import (
    ModelScorer,
    NestedSpace,
    SearchResult,
    enumerate_all,
    enumerate_nested,
    gibbs_search,
    search,
)

__all__ = [
    "Dataset",
    "ModelIndex",
    "RegressionStats",
    "center_columns",
    "fit_stats",
    "residual_quadratic",
    "GMixturePrior",
    "ScaledInvChiSq",
    "BetaPrime",
    "ZellnerSiow",
    "HyperG",
    "HyperGOverN",
    "GeneralizedG",
    "Robust",
    "FixedG",
    "PriorMode",
    "PriorSpec",
    "PRESETS",
    "TABLE1_PRIORS",
    "get_prior_spec",
    "log_density",
    "make_proposed",
    "mode",
    "MarginalEvaluation",
    "ModelPrior",
    "log_marginal",
    "log_marginal_null",
    "log_marginal_quadrature",
    "log_marginal_approx",
    "log_bayes_factor_vs_null",
    "log_g_integral",
    "log_bf_from_stats",
    "posterior_probs",
    "SearchResult",
    "NestedSpace",
    "ModelScorer",
    "enumerate_all",
    "enumerate_nested",
    "gibbs_search",
    "search",
]
