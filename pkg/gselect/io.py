"""Dataset CSV reading and writing: first column y, remaining columns regressors."""
import logging
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from .exceptions import InvalidInputError
from .lab.reports import write_csv
from .schemas import RunManifest
from .stats.regression import Dataset

logger = logging.getLogger(__name__)


def load_dataset(path: Union[str, Path]) -> Dataset:
    """
    Read a CSV with a header row into a centered Dataset.

    Lines starting with '#' are manifest comments and are skipped.
    """
    try:
        df = pd.read_csv(path, comment="#", float_precision="round_trip")
    except FileNotFoundError:
        raise InvalidInputError(f"Dataset file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InvalidInputError(f"Cannot parse {path}: {e}")

    if df.shape[1] < 2:
        raise InvalidInputError(f"{path}: need a y column and at least one regressor")
    if df.isna().any().any():
        rows = (df.index[df.isna().any(axis=1)] + 2).tolist()[:5]
        raise InvalidInputError(f"{path}: missing values (file lines {rows})")
    non_numeric = [c for c in df.columns if not pd.api.types.is_numeric_dtype(df[c])]
    if non_numeric:
        raise InvalidInputError(f"{path}: non-numeric cells in columns {non_numeric}")

    values = df.to_numpy(dtype=float)
    d = Dataset.from_arrays(values[:, 0], values[:, 1:], column_names=[str(c) for c in df.columns[1:]])
    logger.info("Loaded %s: n=%d, p=%d (%d columns centered)", path, d.n, d.p, d.centered_columns)
    return d


def save_dataset(
    d: Dataset,
    path: Union[str, Path],
    y_name: str = "y",
    manifest: Optional[RunManifest] = None,
) -> Path:
    """Write a dataset that `load_dataset` reads back bit-identically."""
    df = pd.DataFrame(d.X, columns=list(d.column_names))
    df.insert(0, y_name, d.y)
    return write_csv(df, path, manifest)
