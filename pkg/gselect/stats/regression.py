"""Centered-design linear regression statistics for arbitrary submodels."""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sl

from ..exceptions import DegenerateDesignError, InvalidInputError, InvalidRegimeError

logger = logging.getLogger(__name__)

# Pivoted |R_ii| below RANK_TOL * max |R_ii| declare rank deficiency.
RANK_TOL = 1e-10
# Column sums must stay below CENTER_TOL * n.
CENTER_TOL = 1e-9


@dataclass(frozen=True)
class ModelIndex:
    """
    Candidate model M_alpha as a sorted set of 1-based regressor indices.

    The empty index set is the intercept-only (null) model.
    """

    indices: Tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(i < 1 for i in idx):
            raise InvalidInputError(f"Model indices must be >= 1 (got {idx!r})")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidInputError(
                f"Model indices must be strictly increasing (got {idx!r})"
            )
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ModelIndex":
        """Build from any iterable of indices, sorting them."""
        return cls(tuple(sorted(int(i) for i in indices)))

    @classmethod
    def null(cls) -> "ModelIndex":
        return cls(())

    @classmethod
    def full(cls, p: int) -> "ModelIndex":
        return cls(tuple(range(1, p + 1)))

    @classmethod
    def prefix(cls, k: int) -> "ModelIndex":
        """The nested-chain member {1, ..., k}."""
        return cls(tuple(range(1, k + 1)))

    @classmethod
    def from_mask(cls, mask: int) -> "ModelIndex":
        """Inverse of `mask`: bit j set means regressor j+1 included."""
        return cls(tuple(j + 1 for j in range(mask.bit_length()) if (mask >> j) & 1))

    @property
    def mask(self) -> int:
        out = 0
        for i in self.indices:
            out |= 1 << (i - 1)
        return out

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def is_null(self) -> bool:
        return not self.indices

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Tie-break order: smaller models first, then lexicographic."""
        return (self.size, self.indices)

    @property
    def label(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"

    def columns(self) -> np.ndarray:
        """0-based column positions into X."""
        return np.asarray(self.indices, dtype=int) - 1

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Dataset:
    """Response y and column-centered design X, immutable after construction."""

    y: np.ndarray
    X: np.ndarray
    column_names: Tuple[str, ...] = ()
    centered_columns: int = 0

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        X = np.array(self.X, dtype=float)

        if y.ndim != 1:
            raise InvalidInputError(f"y must be a vector (got shape {y.shape})")
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise InvalidInputError(
                f"X must be an n x p matrix with n = len(y) (got {X.shape} for n={y.shape[0]})"
            )

        n, p = X.shape
        if n < 3 or p < 1:
            raise InvalidInputError(f"Need n >= 3 and p >= 1 (got n={n}, p={p})")
        if p >= n:
            raise InvalidRegimeError(f"Need p < n (got n={n}, p={p})")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise InvalidInputError("Dataset contains non-finite values")

        sums = np.abs(X.sum(axis=0))
        if np.any(sums > CENTER_TOL * n):
            bad = (np.flatnonzero(sums > CENTER_TOL * n) + 1).tolist()
            raise InvalidInputError(f"Columns {bad} of X are not centered")

        y.setflags(write=False)
        X.setflags(write=False)
        names = tuple(self.column_names) or tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise InvalidInputError(f"Expected {p} column names (got {len(names)})")

        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_names", names)

    @classmethod
    def from_arrays(
        cls,
        y: Sequence[float],
        X: np.ndarray,
        center: bool = True,
        column_names: Optional[Sequence[str]] = None,
    ) -> "Dataset":
        """
        Build a dataset, centering the design once.

        Columns already centered within tolerance are left untouched so that a
        saved dataset reloads bit-identically.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        centered = 0
        if center:
            if X.shape[0] < 2:
                raise InvalidInputError("Centering needs at least 2 rows")
            sums = np.abs(X.sum(axis=0))
            off = sums > CENTER_TOL * X.shape[0]
            if np.any(off):
                X = X.copy()
                X[:, off] = center_columns(X[:, off])
                centered = int(off.sum())
        return cls(y=y, X=X, column_names=tuple(column_names or ()), centered_columns=centered)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def total_ss(self) -> float:
        """||y - ybar 1||^2 = n S_y^2."""
        r = self.y - self.y.mean()
        return float(r @ r)

    @property
    def s_y2(self) -> float:
        return self.total_ss / self.n

    def check_model(self, alpha: ModelIndex) -> None:
        if alpha.size and alpha.indices[-1] > self.p:
            raise InvalidInputError(
                f"Model {alpha.label} refers to regressors beyond p={self.p}"
            )

    def design(self, alpha: ModelIndex) -> np.ndarray:
        """Z_{n alpha} = (1  X_alpha)."""
        self.check_model(alpha)
        return np.column_stack([np.ones(self.n), self.X[:, alpha.columns()]])


@dataclass(frozen=True)
class RegressionStats:
    s_y2: float
    r2: float
    rss: float
    p_alpha: int
    effective_rank: int
    n: int

    @property
    def residual_fraction(self) -> float:
        """1 - R^2 taken as rss / (n S_y^2), precise near saturation."""
        if self.s_y2 <= 0.0:
            return 1.0
        return self.rss / (self.n * self.s_y2)


def center_columns(X_raw: np.ndarray) -> np.ndarray:
    """Subtract each column's mean."""
    X = np.asarray(X_raw, dtype=float)
    if X.ndim != 2:
        raise InvalidInputError(f"Expected an n x p matrix (got shape {X.shape})")
    if X.shape[0] < 2:
        raise InvalidInputError(f"Centering needs n >= 2 (got n={X.shape[0]})")
    return X - X.mean(axis=0)


def _orthonormal_basis(d: Dataset, alpha: ModelIndex) -> np.ndarray:
    """Q factor of a pivoted QR of Z_{n alpha}; raises on rank deficiency."""
    Z = d.design(alpha)
    Q, R, _ = sl.qr(Z, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_TOL * diag[0])) if diag.size else 0
    if rank < Z.shape[1]:
        logger.debug("Rank deficient design %s: rank %d", alpha.label, rank)
        raise DegenerateDesignError(alpha.indices, rank)
    return Q


def fit_stats(d: Dataset, alpha: ModelIndex) -> RegressionStats:
    """S_y^2, R^2_alpha and RSS for model alpha."""
    tss = d.total_ss
    s_y2 = tss / d.n

    if alpha.is_null:
        d.check_model(alpha)
        return RegressionStats(s_y2=s_y2, r2=0.0, rss=tss, p_alpha=0, effective_rank=1, n=d.n)

    Q = _orthonormal_basis(d, alpha)
    resid = d.y - Q @ (Q.T @ d.y)
    rss = float(resid @ resid)

    if tss <= 0.0:
        return RegressionStats(
            s_y2=s_y2, r2=0.0, rss=0.0, p_alpha=alpha.size, effective_rank=Q.shape[1], n=d.n
        )

    r2 = 1.0 - rss / tss
    # Clamp roundoff; keep rss consistent with the clamped value.
    if r2 < 0.0:
        r2, rss = 0.0, tss
    elif r2 > 1.0 or rss <= 0.0:
        r2, rss = 1.0, 0.0

    return RegressionStats(
        s_y2=s_y2, r2=r2, rss=rss, p_alpha=alpha.size, effective_rank=Q.shape[1], n=d.n
    )


def residual_quadratic(mu: np.ndarray, alpha: ModelIndex, d: Dataset) -> float:
    """mu'(I - P_n(alpha)) mu, the sigma-free kernel of D_n(alpha)."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (d.n,):
        raise InvalidInputError(f"mu must have length n={d.n} (got shape {mu.shape})")

    if alpha.is_null:
        d.check_model(alpha)
        r = mu - mu.mean()
    else:
        Q = _orthonormal_basis(d, alpha)
        r = mu - Q @ (Q.T @ mu)
    return max(float(r @ r), 0.0)
