"""CSV report files, each headed by `# key: value` manifest lines."""
import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Optional, Union

import pandas as pd
import yaml

from .. import __version__
from ..schemas import ExperimentReport, RunManifest

logger = logging.getLogger(__name__)

REPORT_FILES = {
    "report": "report.csv",
    "replicates": "replicates.csv",
    "plot_data": "plot_data.csv",
}


def config_hash(resolved: dict) -> str:
    """sha256 of the canonical JSON form of a resolved config."""
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_manifest(command: str, resolved: dict, base_seed: int) -> RunManifest:
    return RunManifest(
        command=command,
        config_hash=config_hash(resolved),
        base_seed=base_seed,
        library_version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def write_csv(df: pd.DataFrame, path: Union[str, Path], manifest: Optional[RunManifest] = None) -> Path:
    """Write the manifest header then the frame; floats use their shortest round-trip form."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        if manifest is not None:
            for key, value in manifest.model_dump().items():
                f.write(f"# {key}: {value}\n")
        df.to_csv(f, index=False, lineterminator="\n")
    return path


def read_manifest(path: Union[str, Path]) -> Dict[str, str]:
    out = {}
    with open(path) as f:
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            out[key] = value
    return out


def read_body(path: Union[str, Path]) -> str:
    """File contents without the manifest header."""
    with open(path) as f:
        return "".join(line for line in f if not line.startswith("# "))


def write_report(
    report: ExperimentReport,
    out_dir: Union[str, Path],
    manifest: RunManifest,
) -> Dict[str, Path]:
    """report.csv, replicates.csv and plot_data.csv under out_dir."""
    out_dir = Path(out_dir)
    frames = {
        "report": report.to_frame(),
        "replicates": report.replicates_frame(),
        "plot_data": report.plot_frame(),
    }
    paths = {name: write_csv(frames[name], out_dir / fname, manifest) for name, fname in REPORT_FILES.items()}
    logger.info("Wrote %d report files to %s", len(paths), out_dir)
    return paths


def load_reference(path: Union[str, Path]) -> pd.DataFrame:
    """Published cell means as a long frame (error_dist, p_plus_1, n, prior, reference)."""
    with open(path) as f:
        data = yaml.safe_load(f)
    priors = data["priors"]
    rows = []
    for dist, by_p in data["means"].items():
        for p_plus_1, by_n in by_p.items():
            for n, means in by_n.items():
                rows.extend(
                    {"error_dist": dist, "p_plus_1": int(p_plus_1), "n": int(n), "prior": pr, "reference": m}
                    for pr, m in zip(priors, means)
                )
    return pd.DataFrame(rows)


def compare_with_reference(
    report: pd.DataFrame,
    reference: pd.DataFrame,
    tol: float = 0.10,
) -> pd.DataFrame:
    """Join report means to reference means; `within_tol` flags |mean - reference| <= tol."""
    keys = ["error_dist", "p_plus_1", "n", "prior"]
    merged = report[keys + ["mean", "mse"]].merge(reference, on=keys, how="inner")
    merged["diff"] = merged["mean"] - merged["reference"]
    merged["within_tol"] = merged["diff"].abs() <= tol
    return merged


def ordering_violations(
    report: pd.DataFrame,
    order=("proposed-II", "proposed-I", "robust", "zellner-siow"),
    slack: float = 0.05,
) -> pd.DataFrame:
    """Cells where a prior's mean falls more than `slack` below the next one in `order`."""
    rows = []
    for key, cell in report.groupby(["error_dist", "p_plus_1", "n"], sort=True):
        means = dict(zip(cell["prior"], cell["mean"]))
        present = [pr for pr in order if pr in means]
        for hi, lo in zip(present, present[1:]):
            if means[hi] < means[lo] - slack:
                rows.append(dict(zip(["error_dist", "p_plus_1", "n"], key), higher=hi, lower=lo,
                                 gap=means[lo] - means[hi]))
    return pd.DataFrame(rows, columns=["error_dist", "p_plus_1", "n", "higher", "lower", "gap"])


def read_report(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#", float_precision="round_trip")
