"""Model selection on a user dataset."""
import argparse
import logging
from typing import Optional

import yaml

from ..exceptions import ConfigError
from ..io import load_dataset
from ..settings import Settings
from ..stats.marginal import ModelPrior
from ..stats.priors import PriorSpec, get_prior_spec
from ..stats.search import DEFAULT_BURN_IN, DEFAULT_CHAIN_LENGTH, SearchResult, search

logger = logging.getLogger(__name__)


def parse_prior_arg(text: str) -> PriorSpec:
    """A preset name, or an inline mapping such as '{family: scaled-inv-chisq, nu: p, tau2: n^2}'."""
    if text.lstrip().startswith("{"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse prior spec {text!r}: {e}", keys=["prior"])
        return get_prior_spec(data)
    return get_prior_spec(text)


def cmd_select(
    dataset_path: str,
    prior_spec: str,
    model_prior_spec: str = "uniform",
    search_mode: str = "auto",
    settings: Optional[Settings] = None,
    seed: int = 0,
    chain_length: int = DEFAULT_CHAIN_LENGTH,
    burn_in: int = DEFAULT_BURN_IN,
    top: int = 10,
) -> SearchResult:
    """Print the top model, its posterior probability and the top-`top` table."""
    settings = settings or Settings()
    d = load_dataset(dataset_path)
    spec = parse_prior_arg(prior_spec)
    prior = spec.resolve(d.n, d.p)
    mp = ModelPrior.parse(model_prior_spec)

    res = search(
        d,
        prior,
        mp,
        mode=search_mode,
        max_p=settings.max_enumerate_p,
        chain_length=chain_length,
        burn_in=burn_in,
        seed=seed,
        tol=settings.quad_tol,
    )

    names = [d.column_names[i - 1] for i in res.top.indices]
    print(f"Dataset: n={d.n}, p={d.p}   prior: {spec.label} ({prior.describe()})")
    print(f"Models evaluated: {res.visited}")
    print(f"Top model: {res.top.label} [{', '.join(names) or 'intercept only'}]")
    print(f"Posterior probability: {res.prob(res.top):.4f}")
    print()
    print(res.to_frame().head(top).to_string(index=False))
    return res


def _run(args: argparse.Namespace, settings: Settings) -> int:
    cmd_select(
        args.dataset,
        args.prior,
        args.model_prior,
        args.search,
        settings=settings,
        seed=args.seed,
        chain_length=args.chain_length,
        burn_in=args.burn_in,
        top=args.top,
    )
    return 0


def register(subparsers) -> None:
    p = subparsers.add_parser("select", help="Posterior model search on a CSV dataset")
    p.add_argument("dataset", help="CSV with header; first column y, the rest regressors")
    p.add_argument("--prior", default="proposed-II", help="Preset name or inline spec mapping")
    p.add_argument("--model-prior", default="uniform", help="uniform or bernoulli:<q>")
    p.add_argument(
        "--search", default="auto", choices=["auto", "enumerate", "nested", "gibbs"],
        help="auto enumerates up to max_enumerate_p regressors, Gibbs beyond",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chain-length", type=int, default=DEFAULT_CHAIN_LENGTH)
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=_run)
