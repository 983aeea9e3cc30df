"""Posterior-predictive draws of future infective counts and their quantile summaries."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gdd import gd_from_moments, sample as gd_sample
from .inference.likelihood import MOMENT_FLOOR, InitialCondition, predicted_moments
from .inference.priors import ParameterPoint
from .inference.twalk import Chain
from .moments import IntegrationError
from .reaction_network import ObservationSeries

log = logging.getLogger(__name__)

DEFAULT_PROBS = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass
class PredictiveDraws:
    future_times: np.ndarray
    draws: np.ndarray  # (rows, times), non-negative integers
    rows: np.ndarray  # chain row used for each draw row
    dropped: int = 0


@dataclass
class QuantileBand:
    times: np.ndarray
    probs: tuple[float, ...]
    values: np.ndarray  # (len(probs), len(times))

    def at(self, prob: float) -> np.ndarray:
        return self.values[self.probs.index(prob)]

    @property
    def lower(self):
        return self.at(0.05)

    @property
    def median(self):
        return self.at(0.5)

    @property
    def upper(self):
        return self.at(0.95)


def _row_rngs(rng, n):
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return rng.spawn(n)


def predictive_samples(chain: Chain, data: ObservationSeries, future_times, rng=None,
                       init: InitialCondition | None = None, max_draws: int | None = None) -> PredictiveDraws:
    """One Gd draw per chain row and future time.

    For each retained parameter sample the moments are integrated out to
    ``future_times`` and a count is drawn from Gd(m, v).  Rows are drawn on
    independent streams spawned from ``rng``.  ``max_draws`` thins the chain
    evenly.
    """
    ft = np.asarray(future_times, dtype=float)
    if ft.ndim != 1 or len(ft) == 0 or np.any(np.diff(ft) <= 0):
        raise ValueError("future times must be a non-empty increasing vector")
    if ft[0] <= data.times[-1]:
        raise ValueError(f"future times must follow the last observation at t={data.times[-1]}")
    if init is None:
        init = InitialCondition.from_data(data)
    return posterior_draws(chain, init, ft, rng, max_draws)


def posterior_draws(chain: Chain, init: InitialCondition, times, rng=None,
                    max_draws: int | None = None) -> PredictiveDraws:
    """Gd draws at arbitrary ``times`` >= ``init.time`` (used for in-sample bands too)."""
    ft = np.asarray(times, dtype=float)
    if len(chain) == 0:
        raise ValueError("empty chain")
    if ft[0] < init.time:
        raise ValueError("times must not precede the initial condition")
    rows = np.arange(len(chain))
    if max_draws is not None and max_draws < len(rows):
        rows = np.unique(np.linspace(0, len(chain) - 1, max_draws).round().astype(int))
    streams = _row_rngs(rng, len(rows))
    draws = np.empty((len(rows), len(ft)), dtype=np.int64)
    ok = np.ones(len(rows), dtype=bool)
    for k, (r, g) in enumerate(zip(rows, streams)):
        point = ParameterPoint(*map(float, chain.samples[r]))
        try:
            m, v = predicted_moments(point, init, ft)
        except IntegrationError as exc:
            log.debug("row %d: %s", r, exc)
            ok[k] = False
            continue
        for j in range(len(ft)):
            gd = gd_from_moments(max(m[j], MOMENT_FLOOR), max(v[j], MOMENT_FLOOR))
            draws[k, j] = gd_sample(gd, g)
    dropped = int((~ok).sum())
    if dropped:
        log.warning("dropped %d of %d predictive rows after integration failures", dropped, len(rows))
    return PredictiveDraws(ft, draws[ok], rows[ok], dropped)


def quantile_bands(draws: PredictiveDraws, probs=DEFAULT_PROBS) -> QuantileBand:
    """Nearest-rank empirical quantiles per time column."""
    probs = tuple(float(p) for p in probs)
    if any(not 0 < p < 1 for p in probs) or list(probs) != sorted(probs):
        raise ValueError("probs must be sorted and lie in (0, 1)")
    vals = np.quantile(draws.draws, probs, axis=0, method="inverted_cdf")
    return QuantileBand(draws.future_times, probs, np.asarray(vals, dtype=float).reshape(len(probs), -1))


def boxplot_stats(draws: PredictiveDraws, whis: float = 1.5) -> list[dict]:
    """Box-plot numbers per future time (whiskers at the extreme draws within ``whis`` IQR)."""
    out = []
    for j, t in enumerate(draws.future_times):
        col = np.sort(draws.draws[:, j])
        q1, med, q3 = np.quantile(col, (0.25, 0.5, 0.75), method="inverted_cdf")
        iqr = q3 - q1
        lo = col[col >= q1 - whis * iqr][0]
        hi = col[col <= q3 + whis * iqr][-1]
        out.append({"time": float(t), "min": int(col[0]), "q1": float(q1), "median": float(med),
                    "q3": float(q3), "max": int(col[-1]), "whisker_lo": int(lo), "whisker_hi": int(hi)})
    return out


def band_coverage(band: QuantileBand, observed, lower: float = 0.05, upper: float = 0.95) -> float:
    """Fraction of observed counts lying inside ``[q_lower, q_upper]``."""
    obs = np.asarray(observed)
    inside = (obs >= band.at(lower)) & (obs <= band.at(upper))
    return float(inside.mean())
