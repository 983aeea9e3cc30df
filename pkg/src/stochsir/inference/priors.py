"""Priors on the positive SIR parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.special import gammaln

PARAM_NAMES = ("b0", "b1", "omega")


@dataclass(frozen=True)
class ParameterPoint:
    b0: float
    b1: float
    omega: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.b0, self.b1, self.omega)

    def is_valid(self) -> bool:
        return all(math.isfinite(v) and v > 0 for v in self.as_tuple())

    @property
    def r0(self) -> float:
        return self.b0 / self.b1


@dataclass(frozen=True)
class ParamPrior:
    """Prior on one parameter.

    Families and their log-densities (``b`` the parameter):

    ``gamma``
        ``(shape - 1) log b - b / scale - shape log scale - lgamma(shape)``
    ``inverse_gamma``
        the density of ``rho = 1/b`` is inverse-Gamma,
        ``shape log scale - lgamma(shape) - (shape + 1) log rho - scale / rho``,
        transported to ``b`` with the Jacobian ``1/b**2``
        (this is a Gamma in ``b`` with rate ``scale``).
    ``uniform``
        flat on ``[lower, upper]``.

    A parameter with ``fixed`` set is not sampled and contributes nothing.
    """

    family: str = "gamma"
    shape: float = 1.0
    scale: float = 1.0
    lower: float = 0.0
    upper: float = math.inf
    fixed: float | None = None

    def __post_init__(self):
        if self.fixed is not None:
            if not (self.fixed > 0 and math.isfinite(self.fixed)):
                raise ValueError(f"fixed value must be positive, got {self.fixed}")
            return
        if self.family in ("gamma", "inverse_gamma"):
            if not (self.shape > 0 and self.scale > 0):
                raise ValueError(f"{self.family} prior needs positive shape and scale")
        elif self.family == "uniform":
            if not (0 <= self.lower < self.upper):
                raise ValueError("uniform prior needs 0 <= lower < upper")
        else:
            raise ValueError(f"unknown prior family {self.family!r}")

    def logpdf(self, b: float) -> float:
        if not b > 0:
            return -math.inf
        if self.family == "gamma":
            return ((self.shape - 1.0) * math.log(b) - b / self.scale
                    - self.shape * math.log(self.scale) - gammaln(self.shape))
        if self.family == "inverse_gamma":
            rho = 1.0 / b
            log_rho = (self.shape * math.log(self.scale) - gammaln(self.shape)
                       - (self.shape + 1.0) * math.log(rho) - self.scale / rho)
            return log_rho - 2.0 * math.log(b)
        if self.lower <= b <= self.upper:
            return 0.0 if math.isinf(self.upper) else -math.log(self.upper - self.lower)
        return -math.inf


@dataclass(frozen=True)
class PriorSpec:
    b0: ParamPrior = field(default_factory=ParamPrior)
    b1: ParamPrior = field(default_factory=ParamPrior)
    omega: ParamPrior = field(default_factory=ParamPrior)

    def __getitem__(self, name: str) -> ParamPrior:
        return getattr(self, name)

    @property
    def sampled(self) -> tuple[str, ...]:
        return tuple(n for n in PARAM_NAMES if self[n].fixed is None)

    def fixed_values(self) -> dict[str, float]:
        return {n: self[n].fixed for n in PARAM_NAMES if self[n].fixed is not None}


def log_prior(point: ParameterPoint, prior: PriorSpec) -> float:
    """Sum of the log prior densities of the non-fixed parameters."""
    if not point.is_valid():
        return -math.inf
    total = 0.0
    for name in prior.sampled:
        total += prior[name].logpdf(getattr(point, name))
    return total
