"""Error types raised by the library and mapped to CLI exit codes."""
from typing import Iterable, Optional, Sequence


class GSelectError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidInputError(GSelectError, ValueError):
    """Malformed input: wrong shapes, non-numeric cells, bad arguments."""

    exit_code = 2


class InvalidRegimeError(InvalidInputError):
    """Dimensions outside the p < n regime."""


class ConfigError(InvalidInputError):
    """Experiment configuration failed validation."""

    def __init__(self, message: str, keys: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.keys = list(keys or [])


class UnsupportedOperationError(GSelectError):
    """Operation not defined for the given prior or regime."""

    exit_code = 2


class SpaceTooLargeError(GSelectError):
    """Exhaustive enumeration requested for too many regressors."""

    exit_code = 2

    def __init__(self, p: int, max_p: int):
        super().__init__(
            f"Model space 2^{p} is too large for enumeration (max_p={max_p}); "
            "use gibbs_search instead"
        )
        self.p = p
        self.max_p = max_p


class DegenerateDataError(GSelectError):
    """Data that no marginal can be computed from."""

    exit_code = 3


class DegenerateDesignError(DegenerateDataError):
    """Rank-deficient (1 X_alpha)."""

    def __init__(self, indices: Iterable[int], effective_rank: int):
        self.indices = tuple(indices)
        self.effective_rank = effective_rank
        super().__init__(
            f"Design for model {list(self.indices)} is rank deficient "
            f"(effective rank {effective_rank}, need {len(self.indices) + 1})"
        )


class DegenerateResponseError(DegenerateDataError):
    """Constant response: S_y^2 = 0."""


class SaturatedFitError(DegenerateDataError):
    """1 - R^2 below the saturation floor; the g-integral may diverge."""

    def __init__(self, n: int, p_alpha: int, one_minus_r2: float):
        self.n = n
        self.p_alpha = p_alpha
        self.one_minus_r2 = one_minus_r2
        super().__init__(
            f"Saturated fit: 1 - R^2 = {one_minus_r2:.3e} for p(alpha)={p_alpha}, n={n}"
        )


class QuadratureError(GSelectError):
    """Adaptive refinement did not reach the requested tolerance."""

    exit_code = 3

    def __init__(self, message: str, partial: float, abs_err: float):
        super().__init__(message)
        self.partial = partial
        self.abs_err = abs_err


class ModelFalseDesignError(InvalidInputError):
    """Model-false experiment whose mean lies inside the span of the regressors."""
