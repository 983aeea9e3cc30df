"""Posterior summaries: MAP, HPD intervals, R0."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .priors import ParameterPoint
from .twalk import Chain

MIN_HPD_SAMPLES = 100


@dataclass
class PosteriorSummary:
    map_point: ParameterPoint
    map_logpost: float
    means: dict[str, float]
    hpd: dict[str, tuple[float, float]]
    r0: np.ndarray
    prob: float
    acceptance_rate: float | None = None

    @property
    def r0_map(self) -> float:
        return self.map_point.r0

    def to_dict(self) -> dict:
        return {
            "map": {"b0": self.map_point.b0, "b1": self.map_point.b1, "omega": self.map_point.omega,
                    "r0": self.r0_map, "logpost": self.map_logpost},
            "mean": dict(self.means),
            "hpd_prob": self.prob,
            "hpd": {k: list(v) for k, v in self.hpd.items()},
            "acceptance_rate": self.acceptance_rate,
            "n_samples": int(len(self.r0)),
        }


def map_estimate(chain: Chain) -> ParameterPoint:
    """Retained sample with the highest log posterior (first one on ties)."""
    if len(chain) == 0:
        raise ValueError("empty chain")
    i = int(np.argmax(chain.logpost))
    return ParameterPoint(*map(float, chain.samples[i]))


def hpd_interval(samples, prob: float = 0.95) -> tuple[float, float]:
    """Shortest window of the sorted samples holding ``ceil(prob * n)`` of them (leftmost on ties)."""
    if not 0 < prob < 1:
        raise ValueError("prob must lie in (0, 1)")
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    n = s.size
    if n < MIN_HPD_SAMPLES:
        raise ValueError(f"need at least {MIN_HPD_SAMPLES} samples for an HPD interval, got {n}")
    k = math.ceil(prob * n)
    widths = s[k - 1:] - s[: n - k + 1]
    i = int(np.argmin(widths))
    return float(s[i]), float(s[i + k - 1])


def r0_samples(chain: Chain) -> np.ndarray:
    return chain.column("b0") / chain.column("b1")


def summarize_chain(chain: Chain, prob: float = 0.95) -> PosteriorSummary:
    r0 = r0_samples(chain)
    i = int(np.argmax(chain.logpost))
    hpd = {name: hpd_interval(chain.column(name), prob) for name in chain.names
           if np.ptp(chain.column(name)) > 0}
    hpd["r0"] = hpd_interval(r0, prob)
    means = {name: float(chain.column(name).mean()) for name in chain.names}
    means["r0"] = float(r0.mean())
    return PosteriorSummary(
        map_point=ParameterPoint(*map(float, chain.samples[i])),
        map_logpost=float(chain.logpost[i]),
        means=means,
        hpd=hpd,
        r0=r0,
        prob=prob,
        acceptance_rate=chain.acceptance.get("rate"),
    )
