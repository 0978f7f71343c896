"""Mixing densities on g, their supports and modes, and fixed-g baselines."""
import ast
import math
import operator
from typing import Annotated, ClassVar, Dict, List, Literal, NamedTuple, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator
from scipy.special import gammaln

from ..exceptions import ConfigError, InvalidInputError, InvalidRegimeError, UnsupportedOperationError


class PriorMode(NamedTuple):
    """Argmax of pi(g); `boundary` is set when it sits on the edge of the support."""

    value: float
    boundary: bool


def _inv_gamma_logpdf(g: np.ndarray, shape: float, scale: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = shape * math.log(scale) - gammaln(shape) - scale / g - (shape + 1.0) * np.log(g)
    return np.where(g > 0, out, -np.inf)


def _beta_prime_logpdf(g: np.ndarray, gamma0: float, gamma1: float) -> np.ndarray:
    const = gammaln(gamma0 + gamma1) - gammaln(gamma0) - gammaln(gamma1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = const - (gamma0 + gamma1) * np.log1p(g)
        if gamma0 != 1.0:
            out = out + (gamma0 - 1.0) * np.log(g)
    return np.where(g > 0, out, -np.inf)


class _GPrior(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    continuous: ClassVar[bool] = True

    def log_density(self, g):
        """Log pi(g), vectorised; -inf outside the support."""
        arr = np.asarray(g, dtype=float)
        out = self._log_density(arr)
        return float(out) if np.ndim(g) == 0 else out

    def _log_density(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mode(self) -> PriorMode:
        raise NotImplementedError

    def support(self) -> float:
        """Lower end of the support; the upper end is always +inf."""
        return 0.0

    def for_model(self, p_alpha: int) -> "_GPrior":
        """Prior bound to a model of size p_alpha."""
        return self

    def describe(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.model_dump().items() if k != "family")
        return f"{self.family}({params})"


class ScaledInvChiSq(_GPrior):
    """Scaled inverse chi-square(nu, tau2) = inverse gamma(nu/2, tau2 nu/2)."""

    family: Literal["scaled-inv-chisq"] = "scaled-inv-chisq"
    nu: float = Field(gt=0)
    tau2: float = Field(gt=0)

    def _log_density(self, g):
        return _inv_gamma_logpdf(g, 0.5 * self.nu, 0.5 * self.tau2 * self.nu)

    def mode(self) -> PriorMode:
        return PriorMode(self.tau2 * self.nu / (self.nu + 2.0), False)


class BetaPrime(_GPrior):
    family: Literal["beta-prime"] = "beta-prime"
    gamma0: float = Field(gt=0)
    gamma1: float = Field(gt=0)

    def _log_density(self, g):
        return _beta_prime_logpdf(g, self.gamma0, self.gamma1)

    def mode(self) -> PriorMode:
        if self.gamma0 > 1.0:
            return PriorMode((self.gamma0 - 1.0) / (self.gamma1 + 1.0), False)
        return PriorMode(0.0, True)


class ZellnerSiow(_GPrior):
    """Inverse gamma with shape 1/2 and scale n/2."""

    family: Literal["zellner-siow"] = "zellner-siow"
    n: int = Field(gt=0)

    def _log_density(self, g):
        return _inv_gamma_logpdf(g, 0.5, 0.5 * self.n)

    def mode(self) -> PriorMode:
        return PriorMode(self.n / 3.0, False)


class HyperG(_GPrior):
    """Beta prime(1, a/2 - 1); J-shaped with its mode at 0."""

    family: Literal["hyper-g"] = "hyper-g"
    a: float = Field(default=3.0, gt=2)

    def _log_density(self, g):
        return _beta_prime_logpdf(g, 1.0, 0.5 * self.a - 1.0)

    def mode(self) -> PriorMode:
        return PriorMode(0.0, True)


class HyperGOverN(_GPrior):
    """pi(g) = (a-2)/(2n) (1 + g/n)^(-a/2)."""

    family: Literal["hyper-g/n"] = "hyper-g/n"
    a: float = Field(default=3.0, gt=2)
    n: int = Field(gt=0)

    def _log_density(self, g):
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                math.log(0.5 * (self.a - 2.0) / self.n)
                - 0.5 * self.a * np.log1p(g / self.n)
            )
        return np.where(g > 0, out, -np.inf)

    def mode(self) -> PriorMode:
        return PriorMode(0.0, True)


class GeneralizedG(_GPrior):
    """Beta prime(A+1, B+1) with A = (n - p(alpha) - 1)/2 - B."""

    family: Literal["generalized-g"] = "generalized-g"
    b_param: float = Field(default=0.25, gt=-1, lt=0.5)
    n: int = Field(gt=0)
    p_alpha: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_shape(self):
        if self.gamma0 <= 0:
            raise ValueError(
                f"generalized-g needs A > -1 (got A={self.gamma0 - 1.0} for n={self.n}, "
                f"p_alpha={self.p_alpha})"
            )
        return self

    @property
    def gamma0(self) -> float:
        return 0.5 * (self.n - self.p_alpha - 1) - self.b_param + 1.0

    @property
    def gamma1(self) -> float:
        return self.b_param + 1.0

    def _log_density(self, g):
        return _beta_prime_logpdf(g, self.gamma0, self.gamma1)

    def mode(self) -> PriorMode:
        return BetaPrime(gamma0=self.gamma0, gamma1=self.gamma1).mode()

    def for_model(self, p_alpha: int) -> "GeneralizedG":
        return GeneralizedG(b_param=self.b_param, n=self.n, p_alpha=p_alpha)


class Robust(_GPrior):
    """
    Truncated scaled beta prime:
    (g + B) / (rho (n + B)) - 1 ~ beta prime(1, A), supported on g > rho (n + B) - B.
    """

    family: Literal["robust"] = "robust"
    A: float = Field(default=0.5, gt=0)
    B: float = Field(default=1.0, gt=0)
    rho_rule: Literal["per-model", "constant"] = "per-model"
    rho: float = Field(default=0.5, gt=0)
    n: int = Field(gt=0)
    p_alpha: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_rho(self):
        if self.rho_value <= self.B / (self.B + self.n):
            raise ValueError(
                f"robust prior needs rho > B/(B+n) = {self.B / (self.B + self.n):.6g} "
                f"(got rho={self.rho_value:.6g})"
            )
        return self

    @property
    def rho_value(self) -> float:
        if self.rho_rule == "per-model":
            return 1.0 / (1.0 + self.p_alpha)
        return self.rho

    @property
    def g0(self) -> float:
        return self.rho_value * (self.n + self.B) - self.B

    def _log_density(self, g):
        scale = self.rho_value * (self.n + self.B)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = math.log(self.A) + self.A * math.log(scale) - (self.A + 1.0) * np.log(g + self.B)
        return np.where(g > self.g0, out, -np.inf)

    def mode(self) -> PriorMode:
        return PriorMode(self.g0, True)

    def support(self) -> float:
        return self.g0

    def for_model(self, p_alpha: int) -> "Robust":
        if self.rho_rule == "constant":
            return self
        return Robust(
            A=self.A, B=self.B, rho_rule=self.rho_rule, rho=self.rho, n=self.n, p_alpha=p_alpha
        )


class FixedG(_GPrior):
    """Point mass at g."""

    family: Literal["fixed-g"] = "fixed-g"
    g: float = Field(gt=0)

    continuous: ClassVar[bool] = False

    def log_density(self, g):
        raise UnsupportedOperationError("fixed-g is a point mass and has no density")

    def mode(self) -> PriorMode:
        return PriorMode(self.g, False)


GMixturePrior = Annotated[
    Union[
        ScaledInvChiSq,
        BetaPrime,
        ZellnerSiow,
        HyperG,
        HyperGOverN,
        GeneralizedG,
        Robust,
        FixedG,
    ],
    Field(discriminator="family"),
]

_PRIOR_ADAPTER = TypeAdapter(GMixturePrior)

Family = Literal[
    "scaled-inv-chisq",
    "beta-prime",
    "zellner-siow",
    "hyper-g",
    "hyper-g/n",
    "generalized-g",
    "robust",
    "fixed-g",
]

FAMILIES = Family.__args__


def log_density(prior: GMixturePrior, g):
    return prior.log_density(g)


def mode(prior: GMixturePrior) -> PriorMode:
    return prior.mode()


def make_proposed(n: int, p: int, variant: str) -> ScaledInvChiSq:
    """Proposed prior I (nu = 1) or II (nu = p), both with tau2 = n^2."""
    if n < 3 or p < 1:
        raise InvalidInputError(f"Need n >= 3 and p >= 1 (got n={n}, p={p})")
    if p >= n:
        raise InvalidRegimeError(f"Proposed priors need p < n (got n={n}, p={p})")
    if variant not in ("I", "II"):
        raise InvalidInputError(f"variant must be 'I' or 'II' (got {variant!r})")
    nu = 1.0 if variant == "I" else float(p)
    return ScaledInvChiSq(nu=nu, tau2=float(n) ** 2)


# --- symbolic hyperparameters -------------------------------------------------

_BIN_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY_OPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"max": max, "min": min, "sqrt": math.sqrt, "log": math.log}


def resolve_symbol(value: Union[float, str], n: int, p: int) -> float:
    """Evaluate a hyperparameter such as 'n^2', 'p' or 'max(n, p^2)'."""
    if isinstance(value, (int, float)):
        return float(value)

    expr = str(value).replace("^", "**")
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError:
        raise ConfigError(f"Cannot parse hyperparameter {value!r}")

    names = {"n": float(n), "p": float(p)}

    def _eval(node):
        if isinstance(node, ast.Expression):
            return _eval(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in names:
            return names[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
            return _BIN_OPS[type(node.op)](_eval(node.left), _eval(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
            return _UNARY_OPS[type(node.op)](_eval(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and not node.keywords
        ):
            return float(_FUNCS[node.func.id](*[_eval(a) for a in node.args]))
        raise ConfigError(f"Unsupported hyperparameter expression {value!r}")

    return float(_eval(tree))


Symbolic = Union[float, str]

_HYPERPARAMS = ("nu", "tau2", "gamma0", "gamma1", "a", "b_param", "A", "B", "rho", "g")


class PriorSpec(BaseModel):
    """
    Config-level prior: a family plus hyperparameters that may refer to n and p.

    `resolve` turns it into a concrete prior for one (n, p) cell.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    family: Family
    name: Optional[str] = None
    nu: Optional[Symbolic] = None
    tau2: Optional[Symbolic] = None
    gamma0: Optional[Symbolic] = None
    gamma1: Optional[Symbolic] = None
    a: Optional[Symbolic] = None
    b_param: Optional[Symbolic] = None
    A: Optional[Symbolic] = None
    B: Optional[Symbolic] = None
    rho_rule: Optional[Literal["per-model", "constant"]] = None
    rho: Optional[Symbolic] = None
    g: Optional[Symbolic] = None

    @property
    def label(self) -> str:
        return self.name or self.family

    def resolve(self, n: int, p: int) -> GMixturePrior:
        data: Dict[str, object] = {"family": self.family}
        for key in _HYPERPARAMS:
            value = getattr(self, key)
            if value is not None:
                data[key] = resolve_symbol(value, n, p)
        if self.rho_rule is not None:
            data["rho_rule"] = self.rho_rule
        if self.family in ("zellner-siow", "hyper-g/n", "generalized-g", "robust"):
            data["n"] = n
        try:
            return _PRIOR_ADAPTER.validate_python(data)
        except ValidationError as e:
            keys = [".".join(str(x) for x in err["loc"]) for err in e.errors()]
            raise ConfigError(f"Invalid hyperparameters for {self.label}: {e}", keys=keys)


PRESETS: Dict[str, PriorSpec] = {
    spec.label: spec
    for spec in [
        PriorSpec(name="zellner-siow", family="zellner-siow"),
        PriorSpec(name="hyper-g", family="hyper-g", a=3.0),
        PriorSpec(name="hyper-g/n", family="hyper-g/n", a=3.0),
        PriorSpec(name="generalized-g", family="generalized-g", b_param=0.25),
        PriorSpec(name="robust", family="robust", A=0.5, B=1.0, rho_rule="per-model"),
        PriorSpec(name="robust-constant", family="robust", A=0.5, B=1.0,
                  rho_rule="constant", rho=0.5),
        PriorSpec(name="proposed-I", family="scaled-inv-chisq", nu=1.0, tau2="n^2"),
        PriorSpec(name="proposed-II", family="scaled-inv-chisq", nu="p", tau2="n^2"),
        PriorSpec(name="g=n^2", family="fixed-g", g="n^2"),
        PriorSpec(name="unit-information", family="fixed-g", g="n"),
        PriorSpec(name="ric", family="fixed-g", g="p^2"),
        PriorSpec(name="benchmark", family="fixed-g", g="max(n, p^2)"),
    ]
}

TABLE1_PRIORS: List[str] = [
    "zellner-siow",
    "hyper-g/n",
    "generalized-g",
    "robust",
    "proposed-I",
    "proposed-II",
]


def get_prior_spec(spec: Union[str, PriorSpec, dict]) -> PriorSpec:
    """Look up a preset by name, or validate an explicit spec."""
    if isinstance(spec, PriorSpec):
        return spec
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ConfigError(
                f"Unknown prior {spec!r}; choose one of {sorted(PRESETS)}", keys=["priors"]
            )
        return PRESETS[spec]
    try:
        return PriorSpec.model_validate(spec)
    except ValidationError as e:
        keys = [".".join(str(x) for x in err["loc"]) for err in e.errors()]
        raise ConfigError(f"Invalid prior spec: {e}", keys=keys)
