"""Moment-matched approximate likelihood and the log-posterior."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..gdd import log_pmf_moments
from ..moments import DEFAULT_ATOL, DEFAULT_RTOL, IntegrationError, observation_moments
from ..reaction_network import ObservationSeries
from .priors import PARAM_NAMES, ParameterPoint, PriorSpec, log_prior

log = logging.getLogger(__name__)

MOMENT_FLOOR = 1e-10


@dataclass(frozen=True)
class InitialCondition:
    """Known infective count at the start of the epidemic clock.

    Observations at ``time`` are the conditioning value and are not scored.
    """

    infectives: float
    time: float = 0.0

    @classmethod
    def from_data(cls, data: ObservationSeries) -> "InitialCondition":
        return cls(float(data.counts[0]), float(data.times[0]))


def predicted_moments(point: ParameterPoint, init: InitialCondition, times, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """``(m, v)`` of the infective count at absolute ``times`` (>= init.time)."""
    rel = np.asarray(times, dtype=float) - init.time
    return observation_moments(point.b0, point.b1, point.omega, init.infectives, rel, rtol, atol)


def log_likelihood(point: ParameterPoint, data: ObservationSeries, init: InitialCondition | None = None,
                   rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> float:
    """Sum over observation times of ``log Gd(x2(t_i) | m_ti, v_ti)``."""
    if init is None:
        init = InitialCondition.from_data(data)
    if not point.is_valid():
        return -math.inf
    if point.omega < max(int(data.counts.max()), init.infectives):
        return -math.inf
    keep = data.times > init.time
    if not keep.any():
        return 0.0
    try:
        m, v = predicted_moments(point, init, data.times[keep], rtol, atol)
    except IntegrationError as exc:
        log.warning("moment integration failed at %s: %s", point, exc)
        return -math.inf
    m = np.maximum(m, MOMENT_FLOOR)
    v = np.maximum(v, MOMENT_FLOOR)
    return float(np.sum(log_pmf_moments(data.counts[keep], m, v)))


def log_posterior(point: ParameterPoint, data: ObservationSeries, prior: PriorSpec,
                  init: InitialCondition | None = None, rtol: float = DEFAULT_RTOL,
                  atol: float = DEFAULT_ATOL) -> float:
    """Unnormalised log posterior; fixed parameters in ``prior`` override ``point``."""
    fixed = prior.fixed_values()
    if fixed:
        point = ParameterPoint(**{n: fixed.get(n, getattr(point, n)) for n in PARAM_NAMES})
    lp = log_prior(point, prior)
    if lp == -math.inf:
        return lp
    return lp + log_likelihood(point, data, init, rtol, atol)


class Posterior:
    """Log posterior as a function of the vector of sampled parameters."""

    def __init__(self, data: ObservationSeries, prior: PriorSpec, init: InitialCondition | None = None,
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
        self.data = data
        self.prior = prior
        self.init = init if init is not None else InitialCondition.from_data(data)
        self.rtol = rtol
        self.atol = atol
        self.names = prior.sampled
        self._fixed = prior.fixed_values()

    @property
    def dim(self) -> int:
        return len(self.names)

    def to_point(self, vec) -> ParameterPoint:
        vals = dict(self._fixed)
        vals.update(zip(self.names, (float(v) for v in vec)))
        return ParameterPoint(**vals)

    def to_vector(self, point: ParameterPoint) -> np.ndarray:
        return np.array([getattr(point, n) for n in self.names], dtype=float)

    def __call__(self, vec) -> float:
        return log_posterior(self.to_point(vec), self.data, self.prior, self.init, self.rtol, self.atol)
