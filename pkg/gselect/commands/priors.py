"""priors-list: the preset registry resolved at a given (n, p)."""
import argparse

import pandas as pd

from ..exceptions import ConfigError
from ..settings import Settings
from ..stats.priors import PRESETS


def cmd_priors_list(n: int, p: int) -> pd.DataFrame:
    rows = []
    for name, spec in PRESETS.items():
        try:
            prior = spec.resolve(n, p)
            resolved, mode = prior.describe(), prior.mode()
            mode_text = f"{mode.value:.6g}" + (" (boundary)" if mode.boundary else "")
        except ConfigError as e:
            resolved, mode_text = f"invalid: {e}", ""
        rows.append({"name": name, "family": spec.family, "resolved": resolved, "mode": mode_text})
    df = pd.DataFrame(rows)
    print(df.to_string(index=False))
    return df


def register(subparsers) -> None:
    p = subparsers.add_parser("priors-list", help="List prior presets resolved at (n, p)")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=int, default=29)

    def _run(args: argparse.Namespace, settings: Settings) -> int:
        cmd_priors_list(args.n, args.p)
        return 0

    p.set_defaults(func=_run)
