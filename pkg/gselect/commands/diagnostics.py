"""Diagnostic commands: info-check, approx-study and simulate."""
import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from ..io import save_dataset
from ..lab.experiments import (
    ApproxStudy,
    InfoConsistencyProfile,
    info_consistency_sweep,
    run_approx_study,
    run_info_consistency,
)
from ..lab.generators import generate_dataset
from ..lab.reports import build_manifest, write_csv
from ..settings import Settings

logger = logging.getLogger(__name__)


def cmd_info_check(
    p_alpha: int,
    out_dir: Path,
    n: Optional[int] = None,
    nu: str = "both",
    tol: Optional[float] = None,
) -> List[InfoConsistencyProfile]:
    """A single profile per nu at a given n, or the boundary sweep when n is unset."""
    if n is None:
        profiles = info_consistency_sweep(p_alpha, tol=tol)
    else:
        choices = [1, "p"] if nu == "both" else [1 if nu == "1" else "p"]
        profiles = [run_info_consistency(n, p_alpha, c, tol=tol) for c in choices]

    df = pd.DataFrame([pr.summary() for pr in profiles])
    manifest = build_manifest(
        "info-check", {"p_alpha": p_alpha, "n": n, "nu": nu, "tol": tol}, base_seed=0
    )
    path = write_csv(df, Path(out_dir) / "info_check.csv", manifest)
    print(df.to_string(index=False))
    print(f"\nProfiles written to {path}")
    return profiles


def cmd_approx_study(
    b: float,
    n_list: Sequence[int],
    nu: str,
    out_dir: Path,
    models_per_n: int = 60,
    seed: int = 0,
    tol: Optional[float] = None,
    datasets_per_n: int = 8,
) -> ApproxStudy:
    study = run_approx_study(
        b, n_list, 1 if nu == "1" else "p", models_per_n, seed, tol, datasets_per_n=datasets_per_n
    )
    resolved = {
        "b": b,
        "n_list": list(n_list),
        "nu": nu,
        "models_per_n": models_per_n,
        "datasets_per_n": datasets_per_n,
        "tol": tol,
    }
    manifest = build_manifest("approx-study", resolved, seed)
    write_csv(study.errors, Path(out_dir) / "approx_errors.csv", manifest)
    write_csv(study.median_frame(), Path(out_dir) / "approx_medians.csv", manifest)
    print(study.median_frame().to_string(index=False))
    print(f"\nFitted exponent of median error in n: {study.exponent:.3f}")
    return study


def cmd_simulate(
    n: int,
    p: int,
    scheme: str,
    error_dist: str,
    seed: int,
    output: Path,
    dispersion: str = "mixed",
) -> Path:
    d, truth = generate_dataset(n, p, scheme, error_dist, seed, dispersion)
    resolved = {"n": n, "p": p, "scheme": scheme, "error_dist": error_dist, "dispersion": dispersion}
    path = save_dataset(d, output, manifest=build_manifest("simulate", resolved, seed))
    print(f"Wrote n={d.n}, p={d.p} dataset to {path}; true model {truth.alpha_c.label}")
    return path


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers (got {text!r})")


def register(subparsers) -> None:
    p = subparsers.add_parser("info-check", help="Bayes factor growth as 1 - R^2 -> 0")
    p.add_argument("--p-alpha", type=int, default=10)
    p.add_argument("--n", type=int, help="Sample size (default: sweep boundary sizes)")
    p.add_argument("--nu", choices=["1", "p", "both"], default="both")
    p.add_argument("--out-dir", type=Path)

    def _info(args: argparse.Namespace, settings: Settings) -> int:
        cmd_info_check(args.p_alpha, args.out_dir or settings.out_dir, args.n, args.nu, settings.quad_tol)
        return 0

    p.set_defaults(func=_info)

    p = subparsers.add_parser("approx-study", help="Accuracy of the closed-form marginal approximation")
    p.add_argument("--b", type=float, default=0.5, help="p = ceil(n^b)")
    p.add_argument("--n-list", type=_int_list, default=[100, 200, 400, 800])
    p.add_argument("--nu", choices=["1", "p"], default="p")
    p.add_argument("--models-per-n", type=int, default=60)
    p.add_argument("--datasets-per-n", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path)

    def _approx(args: argparse.Namespace, settings: Settings) -> int:
        cmd_approx_study(
            args.b, args.n_list, args.nu, args.out_dir or settings.out_dir,
            args.models_per_n, args.seed, settings.quad_tol, args.datasets_per_n,
        )
        return 0

    p.set_defaults(func=_approx)

    p = subparsers.add_parser("simulate", help="Write one simulated dataset as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument(
        "--scheme",
        choices=["table1", "scheme1", "scheme2", "model_false", "nested"],
        default="table1",
    )
    p.add_argument("--error-dist", choices=["normal", "laplace", "t3"], default="normal")
    p.add_argument("--dispersion", choices=["mixed", "variance", "scale"], default="mixed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", type=Path, required=True)

    def _simulate(args: argparse.Namespace, settings: Settings) -> int:
        cmd_simulate(args.n, args.p, args.scheme, args.error_dist, args.seed, args.output, args.dispersion)
        return 0

    p.set_defaults(func=_simulate)
