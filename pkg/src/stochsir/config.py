"""Declarative run configuration (a single JSON document).

Every field has a default; the resolved document, with defaults filled
in and command-line overrides applied, is written next to each run's
outputs so the run can be repeated exactly.

Prior densities (``b`` the parameter):

* ``gamma``: shape ``shape``, scale ``scale``;
  ``log p(b) = (shape-1) log b - b/scale - shape log scale - lgamma(shape)``.
* ``inverse_gamma``: ``1/b`` is inverse-Gamma with ``shape`` and ``scale``,
  i.e. ``b`` is Gamma with shape ``shape`` and *rate* ``scale``.
* ``uniform``: flat on ``[lower, upper]`` (``upper`` null means unbounded).

The default hyper-parameters are weakly informative choices of this
package.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .inference.priors import ParameterPoint, ParamPrior, PriorSpec

__all__ = ["RunConfig", "ConfigError", "load_config"]

WEEK = 1.0 / 52.0
STREAMS = {"simulate": 0, "mcmc": 1, "predict": 2}


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TrueParams(_Strict):
    b0: float = Field(40.0, ge=0)
    b1: float = Field(7.0, gt=0)
    omega: float = Field(200.0, gt=0)


class ModelBlock(_Strict):
    true_params: TrueParams = TrueParams()
    initial_infectives: int = Field(2, ge=0)
    t_max: float = Field(1.0, gt=0)
    cadence: float = Field(WEEK, gt=0)
    # known population size; null means omega is sampled under prior.omega
    omega: float | None = Field(200.0, gt=0)
    # re-simulate until at least this many removals happen (0 = keep the first run)
    min_outbreak: int = Field(0, ge=0)
    max_attempts: int = Field(1000, ge=1)


class PriorBlock(_Strict):
    family: Literal["gamma", "inverse_gamma", "uniform"] = "gamma"
    shape: float = Field(2.0, gt=0)
    scale: float = Field(1.0, gt=0)
    lower: float = Field(0.0, ge=0)
    upper: float | None = None

    def to_prior(self, fixed: float | None = None) -> ParamPrior:
        upper = math.inf if self.upper is None else self.upper
        return ParamPrior(self.family, self.shape, self.scale, self.lower, upper, fixed)


class Priors(_Strict):
    b0: PriorBlock = PriorBlock(shape=2.0, scale=50.0)
    b1: PriorBlock = PriorBlock(shape=2.0, scale=10.0)
    omega: PriorBlock = PriorBlock(shape=2.0, scale=200.0)


class PointBlock(_Strict):
    b0: float = Field(gt=0)
    b1: float = Field(gt=0)
    omega: float = Field(gt=0)


class McmcBlock(_Strict):
    iterations: int = Field(200_000, ge=10)
    burn_in: int | None = Field(None, ge=0)
    thin: int = Field(1, ge=1)
    init_a: PointBlock = PointBlock(b0=30.0, b1=5.0, omega=250.0)
    init_b: PointBlock = PointBlock(b0=50.0, b1=10.0, omega=350.0)

    @model_validator(mode="after")
    def _check(self):
        bi = self.iterations // 5 if self.burn_in is None else self.burn_in
        if bi >= self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        self.burn_in = bi
        return self


class DataBlock(_Strict):
    path: str | None = None
    time_unit: str = "year"
    trim: int = Field(0, ge=0)
    # data came from `simulate` with model.true_params; reports overlay the truth
    synthetic: bool = False


class PredictBlock(_Strict):
    # empty: predict at the trimmed-away observation times
    future_times: list[float] = []
    probs: list[float] = [0.05, 0.25, 0.5, 0.75, 0.95]
    max_draws: int | None = Field(5000, ge=1)
    save_draws: bool = False

    @model_validator(mode="after")
    def _check(self):
        if any(not 0 < p < 1 for p in self.probs) or self.probs != sorted(self.probs):
            raise ValueError("predict.probs must be sorted values in (0, 1)")
        if 0.05 not in self.probs or 0.95 not in self.probs:
            raise ValueError("predict.probs must include 0.05 and 0.95")
        return self


class RunConfig(_Strict):
    model: ModelBlock = ModelBlock()
    prior: Priors = Priors()
    mcmc: McmcBlock = McmcBlock()
    data: DataBlock = DataBlock()
    predict: PredictBlock = PredictBlock()
    output_dir: str = "out"
    seed: int = Field(2012, ge=0, lt=2**64)
    figures: bool = True

    def rng(self, stream: str) -> np.random.Generator:
        """Independent generator per command (simulate / mcmc / predict)."""
        return np.random.default_rng([self.seed, STREAMS[stream]])

    def prior_spec(self) -> PriorSpec:
        om = self.model.omega
        return PriorSpec(
            b0=self.prior.b0.to_prior(),
            b1=self.prior.b1.to_prior(),
            omega=self.prior.omega.to_prior(fixed=om),
        )

    def init_points(self) -> tuple[ParameterPoint, ParameterPoint]:
        a, b = self.mcmc.init_a, self.mcmc.init_b
        return ParameterPoint(a.b0, a.b1, a.omega), ParameterPoint(b.b0, b.b1, b.omega)

    def resolved(self) -> dict:
        return json.loads(self.model_dump_json())


def load_config(path=None, seed: int | None = None, out: str | None = None) -> RunConfig:
    """Parse and validate a config file, then apply ``--seed``/``--out`` overrides."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    try:
        cfg = RunConfig.model_validate(raw)
        if seed is not None:
            cfg = RunConfig.model_validate({**cfg.model_dump(), "seed": seed})
        if out is not None:
            cfg.output_dir = out
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg
