"""
Posterior search over the model space: full enumeration, the nested chain
{}, {1}, {1,2}, ..., and a systematic-scan Gibbs sampler over inclusion
indicators for spaces too large to enumerate.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import InvalidInputError, SpaceTooLargeError
from .marginal import MarginalEvaluation, ModelPrior, log_marginal, posterior_probs
from .priors import GMixturePrior
from .regression import Dataset, ModelIndex

logger = logging.getLogger(__name__)

DEFAULT_MAX_P = 20
DEFAULT_CHAIN_LENGTH = 10000
DEFAULT_BURN_IN = 5000

Seed = Union[int, np.random.SeedSequence]


@dataclass(frozen=True)
class SearchResult:
    """Posterior over the evaluated models, with the argmax as `top`."""

    probs: Dict[ModelIndex, float]
    visited: int
    top: ModelIndex
    chain_length: int = 0
    burn_in: int = 0
    visit_counts: Dict[ModelIndex, int] = field(default_factory=dict)
    seed: Optional[int] = None
    min_residual_fraction: float = 1.0

    def prob(self, alpha: ModelIndex) -> float:
        """Posterior probability of alpha; 0 when the search never reached it."""
        return self.probs.get(alpha, 0.0)

    def top_k(self, k: int) -> List[Tuple[ModelIndex, float]]:
        ranked = sorted(self.probs.items(), key=lambda kv: (-kv[1], kv[0].sort_key))
        return ranked[:k]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "model": m.label,
                "size": m.size,
                "prob": pr,
                "visits": self.visit_counts.get(m, 0),
            }
            for m, pr in self.top_k(len(self.probs))
        ]
        return pd.DataFrame(rows, columns=["model", "size", "prob", "visits"])


@dataclass(frozen=True)
class NestedSpace:
    chain: Tuple[ModelIndex, ...]

    def __post_init__(self):
        for k, m in enumerate(self.chain):
            if m != ModelIndex.prefix(k):
                raise InvalidInputError(f"Nested chain member {k} must be {{1..{k}}} (got {m})")

    @classmethod
    def of(cls, p: int) -> "NestedSpace":
        return cls(tuple(ModelIndex.prefix(k) for k in range(p + 1)))

    def __len__(self) -> int:
        return len(self.chain)


def _top(probs: Dict[ModelIndex, float]) -> ModelIndex:
    return min(probs, key=lambda m: (-probs[m], m.sort_key))


class ModelScorer:
    """
    Per-search cache of log p(M) + log m(y), keyed by model bitmask.

    Each model is evaluated at most once; the smallest 1 - R^2 met along the
    way is kept for saturation monitoring.
    """

    def __init__(
        self,
        d: Dataset,
        prior: GMixturePrior,
        mp: ModelPrior,
        method: Literal["exact", "approximation"] = "exact",
        tol: Optional[float] = None,
    ):
        self.d = d
        self.prior = prior
        self.mp = mp
        self.method = method
        self.tol = tol
        self._evals: Dict[int, MarginalEvaluation] = {}
        self._weights: Dict[int, float] = {}
        self.min_residual_fraction = 1.0

    @property
    def evaluations(self) -> int:
        return len(self._evals)

    def evaluate(self, mask: int) -> MarginalEvaluation:
        ev = self._evals.get(mask)
        if ev is None:
            alpha = ModelIndex.from_mask(mask)
            ev = log_marginal(self.d, alpha, self.prior, method=self.method, tol=self.tol)
            self._evals[mask] = ev
            self._weights[mask] = self.mp.log_mass(alpha.size, self.d.p) + ev.log_m
            if ev.residual_fraction < self.min_residual_fraction:
                self.min_residual_fraction = ev.residual_fraction
        return ev

    def log_weight(self, mask: int) -> float:
        w = self._weights.get(mask)
        if w is None:
            self.evaluate(mask)
            w = self._weights[mask]
        return w

    def posterior(self, masks) -> Dict[ModelIndex, float]:
        evals = [(ModelIndex.from_mask(m), self.evaluate(m)) for m in masks]
        return posterior_probs(evals, self.mp, p=self.d.p)


def enumerate_all(
    d: Dataset,
    prior: GMixturePrior,
    mp: ModelPrior,
    max_p: int = DEFAULT_MAX_P,
    method: Literal["exact", "approximation"] = "exact",
    tol: Optional[float] = None,
) -> SearchResult:
    """Exact posterior over all 2^p models."""
    if d.p > max_p:
        raise SpaceTooLargeError(d.p, max_p)
    scorer = ModelScorer(d, prior, mp, method, tol)
    probs = scorer.posterior(range(1 << d.p))
    return SearchResult(
        probs=probs,
        visited=scorer.evaluations,
        top=_top(probs),
        min_residual_fraction=scorer.min_residual_fraction,
    )


def enumerate_nested(
    d: Dataset,
    prior: GMixturePrior,
    mp: ModelPrior,
    method: Literal["exact", "approximation"] = "exact",
    tol: Optional[float] = None,
) -> SearchResult:
    """Posterior restricted to the p + 1 nested models."""
    scorer = ModelScorer(d, prior, mp, method, tol)
    probs = scorer.posterior(m.mask for m in NestedSpace.of(d.p).chain)
    return SearchResult(
        probs=probs,
        visited=scorer.evaluations,
        top=_top(probs),
        min_residual_fraction=scorer.min_residual_fraction,
    )


def _inclusion_prob(w_in: float, w_out: float) -> float:
    diff = w_in - w_out
    if diff >= 0:
        return 1.0 / (1.0 + math.exp(-diff))
    e = math.exp(diff)
    return e / (1.0 + e)


def gibbs_search(
    d: Dataset,
    prior: GMixturePrior,
    mp: ModelPrior,
    chain_length: int = DEFAULT_CHAIN_LENGTH,
    burn_in: int = DEFAULT_BURN_IN,
    seed: Seed = 0,
    method: Literal["exact", "approximation"] = "exact",
    tol: Optional[float] = None,
) -> SearchResult:
    """
    Systematic-scan Gibbs sampler over inclusion indicators, started at the
    null model.

    `chain_length` and `burn_in` count full sweeps over the p indicators. The
    returned probabilities are the marginals renormalised over the models the
    chain was in after each post-burn-in sweep.
    """
    if not chain_length > burn_in >= 0:
        raise InvalidInputError(
            f"Need chain_length > burn_in >= 0 (got chain_length={chain_length}, burn_in={burn_in})"
        )

    rng = np.random.Generator(np.random.PCG64(seed))
    scorer = ModelScorer(d, prior, mp, method, tol)
    p = d.p
    state = 0
    moves = 0
    counts: Dict[int, int] = {}

    for sweep in range(chain_length):
        u = rng.random(p)
        for j in range(p):
            bit = 1 << j
            on, off = state | bit, state & ~bit
            new = on if u[j] < _inclusion_prob(scorer.log_weight(on), scorer.log_weight(off)) else off
            if new != state:
                moves += 1
                state = new
        if sweep >= burn_in:
            counts[state] = counts.get(state, 0) + 1

    if moves == 0:
        logger.warning("Gibbs chain never left the null model (%d sweeps)", chain_length)
    logger.debug(
        "Gibbs: %d sweeps, %d moves, %d models evaluated, %d visited after burn-in",
        chain_length, moves, scorer.evaluations, len(counts),
    )

    masks = sorted(counts)
    probs = scorer.posterior(masks)
    seed_value = seed if isinstance(seed, int) else None
    return SearchResult(
        probs=probs,
        visited=scorer.evaluations,
        top=_top(probs),
        chain_length=chain_length,
        burn_in=burn_in,
        visit_counts={ModelIndex.from_mask(m): counts[m] for m in masks},
        seed=seed_value,
        min_residual_fraction=scorer.min_residual_fraction,
    )


def search(
    d: Dataset,
    prior: GMixturePrior,
    mp: ModelPrior,
    mode: Literal["auto", "enumerate", "nested", "gibbs"] = "auto",
    max_p: int = DEFAULT_MAX_P,
    chain_length: int = DEFAULT_CHAIN_LENGTH,
    burn_in: int = DEFAULT_BURN_IN,
    seed: Seed = 0,
    method: Literal["exact", "approximation"] = "exact",
    tol: Optional[float] = None,
) -> SearchResult:
    """Enumerate when p <= max_p under mode='auto', otherwise run the Gibbs sampler."""
    if mode == "auto":
        mode = "enumerate" if d.p <= max_p else "gibbs"
    if mode == "enumerate":
        return enumerate_all(d, prior, mp, max_p=max_p, method=method, tol=tol)
    if mode == "nested":
        return enumerate_nested(d, prior, mp, method=method, tol=tol)
    if mode == "gibbs":
        return gibbs_search(
            d, prior, mp, chain_length=chain_length, burn_in=burn_in, seed=seed,
            method=method, tol=tol,
        )
    raise InvalidInputError(f"Unknown search mode {mode!r}")
