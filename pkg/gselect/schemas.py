"""Pydantic schemas for experiment configs, report rows and run manifests."""
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import pandas as pd
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import ConfigError
from .stats.marginal import ModelPrior
from .stats.priors import TABLE1_PRIORS, PriorSpec, get_prior_spec

Scheme = Literal["table1", "scheme1", "scheme2", "model_false", "nested"]
ErrorDist = Literal["normal", "laplace", "t3"]
Dispersion = Literal["mixed", "variance", "scale"]
SearchMode = Literal["auto", "enumerate", "nested", "gibbs"]
MarginalMethod = Literal["exact", "approximation"]

ERROR_CODES: Dict[str, int] = {"normal": 0, "laplace": 1, "t3": 2}


# Experiment configuration
class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    scheme: Scheme = "table1"
    n_list: List[int] = Field(default=[50, 100, 150], min_length=1)
    p_plus_1_list: List[int] = Field(default=[30], min_length=1)
    error_dist: List[ErrorDist] = Field(default=["normal"], min_length=1)
    priors: List[PriorSpec] = Field(default_factory=lambda: [get_prior_spec(p) for p in TABLE1_PRIORS])
    replicates: int = Field(default=100, ge=1)
    chain_length: int = Field(default=10000, ge=1)
    burn_in: int = Field(default=5000, ge=0)
    base_seed: int = Field(default=0, ge=0)
    b_exponent: Optional[float] = Field(default=None, gt=0, lt=1)
    s_exponent: Optional[float] = Field(default=None, ge=0, lt=1)
    min_abs_coef: float = Field(default=0.0, ge=0)
    dispersion: Dispersion = "mixed"
    scheme_p: Literal[29, 30] = 29
    model_prior: str = "uniform"
    search_mode: SearchMode = "gibbs"
    max_enumerate_p: int = Field(default=20, ge=1)
    marginal_method: MarginalMethod = "exact"
    tol: float = Field(default=1e-10, ge=1e-12, le=1e-6)
    small_coef_range: Tuple[float, float] = (0.0005, 0.008)
    mu_builder: str = "exp-square"
    nested_k: Optional[int] = Field(default=None, ge=0)
    sigma: float = Field(default=1.0, gt=0)

    @field_validator("error_dist", mode="before")
    @classmethod
    def _listify_error_dist(cls, v):
        return [v] if isinstance(v, str) else v

    @field_validator("priors", mode="before")
    @classmethod
    def _resolve_priors(cls, v):
        if isinstance(v, (str, dict)):
            v = [v]
        return [get_prior_spec(item) for item in v]

    @field_validator("n_list")
    @classmethod
    def _check_n(cls, v):
        if any(n < 3 for n in v):
            raise ValueError(f"every n must be >= 3 (got {v})")
        return v

    @field_validator("p_plus_1_list")
    @classmethod
    def _check_p_plus_1(cls, v):
        if any(pp < 2 for pp in v):
            raise ValueError(f"every p+1 must be >= 2 (got {v})")
        return v

    @field_validator("model_prior")
    @classmethod
    def _check_model_prior(cls, v):
        ModelPrior.parse(v)
        return v

    @field_validator("small_coef_range")
    @classmethod
    def _check_small_range(cls, v):
        lo, hi = v
        if not 0 < lo < hi:
            raise ValueError(f"small_coef_range needs 0 < lo < hi (got {v})")
        return v

    @model_validator(mode="after")
    def _check_chain(self):
        if self.burn_in >= self.chain_length:
            raise ValueError(
                f"burn_in must be < chain_length (got {self.burn_in} >= {self.chain_length})"
            )
        labels = [spec.label for spec in self.priors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"prior names must be unique (got {labels})")
        return self

    @classmethod
    def from_yaml(cls, path: Union[str, Path], **overrides) -> "ExperimentConfig":
        """Load a YAML config; `overrides` (non-None values only) win over the file."""
        try:
            with open(path) as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}")
        except yaml.YAMLError as e:
            raise ConfigError(f"Config {path} is not valid YAML: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path} must be a mapping of keys to values")
        return cls.build(data, **overrides)

    @classmethod
    def build(cls, data: Optional[dict] = None, **overrides) -> "ExperimentConfig":
        merged = dict(data or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls.model_validate(merged)
        except ValidationError as e:
            keys = [".".join(str(x) for x in err["loc"]) for err in e.errors()]
            raise ConfigError(f"Invalid experiment config (keys: {', '.join(keys)}): {e}", keys=keys)

    def p_for(self, n: int, p_plus_1: Optional[int] = None) -> int:
        """Number of regressors for a cell."""
        if self.scheme in ("scheme1", "scheme2"):
            return self.scheme_p
        if self.scheme == "nested" and self.b_exponent is not None:
            return math.ceil(n ** self.b_exponent)
        return (p_plus_1 if p_plus_1 is not None else self.p_plus_1_list[0]) - 1

    def cells(self) -> List[Tuple[str, int, int]]:
        """(error_dist, n, p) in report order."""
        out = []
        for dist in self.error_dist:
            if self.scheme in ("scheme1", "scheme2") or (
                self.scheme == "nested" and self.b_exponent is not None
            ):
                out.extend((dist, n, self.p_for(n)) for n in self.n_list)
            else:
                out.extend(
                    (dist, n, self.p_for(n, pp)) for pp in self.p_plus_1_list for n in self.n_list
                )
        return out

    def resolved_dump(self) -> dict:
        """JSON-ready dump used for the config digest."""
        return self.model_dump(mode="json")


# Report schemas
class ReportRow(BaseModel):
    scheme: Scheme
    error_dist: ErrorDist
    dispersion: Dispersion
    prior: str
    n: int
    p_plus_1: int
    target: Literal["true", "null", "sparse", "ratio"]
    target_model: str
    mean: float
    mse: float
    replicates: int
    visit_rate: Optional[float] = None
    min_residual_fraction: Optional[float] = None
    base_seed: int


class ReplicateRecord(BaseModel):
    scheme: Scheme
    error_dist: ErrorDist
    prior: str
    n: int
    p_plus_1: int
    replicate: int
    value: float
    visited: bool
    top: str


class ExperimentReport(BaseModel):
    config: ExperimentConfig
    rows: List[ReportRow] = []
    records: List[ReplicateRecord] = []

    def to_frame(self):
        return pd.DataFrame([r.model_dump() for r in self.rows], columns=list(ReportRow.model_fields))

    def replicates_frame(self):
        return pd.DataFrame(
            [r.model_dump() for r in self.records], columns=list(ReplicateRecord.model_fields)
        )

    def plot_frame(self):
        """n against mean and mse, one series per (error_dist, p+1, prior)."""
        cols = ["scheme", "error_dist", "p_plus_1", "prior", "n", "mean", "mse"]
        df = self.to_frame()[cols]
        return df.sort_values(["error_dist", "p_plus_1", "prior", "n"], kind="mergesort").reset_index(
            drop=True
        )

    def row(
        self, prior: str, n: int, error_dist: str = "normal", p_plus_1: Optional[int] = None
    ) -> ReportRow:
        for r in self.rows:
            if (
                r.prior == prior
                and r.n == n
                and r.error_dist == error_dist
                and (p_plus_1 is None or r.p_plus_1 == p_plus_1)
            ):
                return r
        raise KeyError((prior, n, error_dist, p_plus_1))


class RunManifest(BaseModel):
    command: str
    config_hash: str
    base_seed: int
    library_version: str
    timestamp: str
