"""Replicated experiment commands: table1, scheme1, scheme2, model-false, nested, experiment."""
import argparse
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from ..exceptions import ConfigError
from ..lab.experiments import run_experiment
from ..lab.reports import build_manifest, write_report
from ..schemas import ExperimentConfig, ExperimentReport
from ..settings import Settings

logger = logging.getLogger(__name__)

# Built-in configs when no --config is given.
SCHEME_DEFAULTS: Dict[str, dict] = {
    "table1": {"scheme": "table1"},
    "scheme1": {"scheme": "scheme1"},
    "scheme2": {"scheme": "scheme2"},
    "model_false": {
        "scheme": "model_false",
        "n_list": [100, 200, 400],
        "p_plus_1_list": [11],
        "priors": ["proposed-I", "proposed-II"],
        "replicates": 50,
    },
    "nested": {
        "scheme": "nested",
        "n_list": [50, 100, 200],
        "p_plus_1_list": [11],
        "search_mode": "nested",
    },
}

_SUMMARY_COLUMNS = ["error_dist", "p_plus_1", "n", "prior", "mean", "mse", "replicates"]


def load_experiment_config(
    config_path: Optional[Union[str, Path]],
    scheme: Optional[str] = None,
    seed: Optional[int] = None,
    replicates: Optional[int] = None,
) -> ExperimentConfig:
    overrides = {"base_seed": seed, "replicates": replicates}
    if config_path is not None:
        cfg = ExperimentConfig.from_yaml(config_path, **overrides)
    elif scheme is not None:
        cfg = ExperimentConfig.build(SCHEME_DEFAULTS[scheme], **overrides)
    else:
        raise ConfigError("experiment needs --config", keys=["config"])
    if scheme is not None and cfg.scheme != scheme:
        raise ConfigError(
            f"Config {config_path} is for scheme {cfg.scheme!r}, not {scheme!r}", keys=["scheme"]
        )
    return cfg


def cmd_experiment(
    config_path: Optional[Union[str, Path]],
    out_dir: Union[str, Path],
    command: str = "experiment",
    scheme: Optional[str] = None,
    seed: Optional[int] = None,
    replicates: Optional[int] = None,
    threads: int = 1,
) -> Tuple[ExperimentReport, Dict[str, Path]]:
    """Run the configured experiment and write report.csv, replicates.csv and plot_data.csv."""
    cfg = load_experiment_config(config_path, scheme, seed, replicates)
    logger.info(
        "Running %s (%d cells, %d replicates, %d threads)",
        cfg.scheme, len(cfg.cells()), cfg.replicates, threads,
    )

    report = run_experiment(cfg, threads=threads)
    manifest = build_manifest(command, cfg.resolved_dump(), cfg.base_seed)
    paths = write_report(report, out_dir, manifest)

    print(report.to_frame()[_SUMMARY_COLUMNS].to_string(index=False))
    print(f"\nReport written to {paths['report']}")
    return report, paths


def _handler(scheme: Optional[str], command: str):
    def _run(args: argparse.Namespace, settings: Settings) -> int:
        cmd_experiment(
            args.config,
            out_dir=args.out_dir or settings.out_dir,
            command=command,
            scheme=scheme,
            seed=args.seed,
            replicates=args.replicates,
            threads=args.threads or settings.threads,
        )
        return 0

    return _run


def experiment_flags() -> argparse.ArgumentParser:
    """Flags shared by every experiment command."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="YAML experiment config")
    parent.add_argument("--seed", type=int, help="Override base_seed")
    parent.add_argument("--out-dir", type=Path, help="Output directory (default GSELECT_OUT_DIR or results)")
    parent.add_argument("--replicates", type=int, help="Override the replicate count")
    parent.add_argument("--threads", type=int, help="Parallel replicates (default GSELECT_THREADS or 1)")
    return parent


def register(subparsers) -> None:
    parent = experiment_flags()
    commands = [
        ("table1", "table1", "Posterior probability of the true model across priors"),
        ("scheme1", "scheme1", "Null model true"),
        ("scheme2", "scheme2", "Sparse target {1,2,3,4} inside a larger true model"),
        ("model-false", "model_false", "D_n(selected) / min D_n with a nonlinear mean"),
        ("nested", "nested", "Consistency within the nested model space"),
    ]
    for name, scheme, help_text in commands:
        p = subparsers.add_parser(name, parents=[parent], help=help_text)
        p.set_defaults(func=_handler(scheme, name))

    p = subparsers.add_parser("experiment", parents=[parent], help="Run the scheme named in --config")
    p.set_defaults(func=_handler(None, "experiment"))
