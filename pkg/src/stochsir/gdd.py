"""Generic Discrete count distribution Gd(mu, v).

A two-moment family that is Binomial when under-dispersed (mu > v),
Poisson when mu == v and Negative-Binomial when over-dispersed (mu < v).
All pmf arithmetic is done in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

__all__ = [
    "Branch",
    "GdParams",
    "gd_from_moments",
    "log_pmf",
    "log_pmf_moments",
    "sample",
    "mean",
    "variance",
    "BRANCH_TOL",
]

BRANCH_TOL = 1e-6
# shape counts this close (relatively) to an integer are not rounded up past it
INT_SNAP = 1e-9


class Branch(str, Enum):
    BINOMIAL = "binomial"
    POISSON = "poisson"
    NEGATIVE_BINOMIAL = "negative_binomial"


@dataclass(frozen=True)
class GdParams:
    """Resolved parameters.

    ``m`` is the real shape count mu**2/|mu - v| (``inf`` on the Poisson
    branch).  On the Binomial branch ``m_int = ceil(m)`` and ``p = mu/m_int``;
    on the Negative-Binomial branch ``p = 1 - mu/v``.  ``p == 1`` (a point
    mass at ``m_int``) is possible when ``v`` is negligible.
    """

    mu: float
    v: float
    branch: Branch
    m: float
    p: float
    m_int: int | None = None


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_POISSON, _BINOMIAL, _NEGBIN = 0, 1, 2
_CODES = {Branch.POISSON: _POISSON, Branch.BINOMIAL: _BINOMIAL, Branch.NEGATIVE_BINOMIAL: _NEGBIN}


@njit(cache=True)
def _stirlerr(n):
    # log(n!) - log(sqrt(2 pi n) (n/e)**n), real n > 0
    if n <= 15.0:
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - _HALF_LOG_2PI
    nn = n * n
    return (1.0 / 12 - (1.0 / 360 - (1.0 / 1260 - (1.0 / 1680 - 1.0 / 1188 / nn) / nn) / nn) / nn) / n


@njit(cache=True)
def _bd0(x, np_):
    # x log(x/np) + np - x, series form when x ~ np to avoid cancellation
    d = x - np_
    if abs(d) < 0.1 * (x + np_):
        v = d / (x + np_)
        s = d * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                break
            s = s1
        return s
    if np_ == 0.0:
        return math.inf
    return x * math.log(x / np_) + np_ - x


@njit(cache=True)
def _log_binom_raw(x, n, p, q):
    """Saddle-point form of ``log C(n, x) p**x q**(n-x)`` for real ``0 <= x <= n`` (``q = 1 - p``).

    Avoids the cancellation of ``lgamma`` differences when ``n`` is large.
    """
    if x == 0.0:
        return n * math.log1p(-p) if p < q else n * math.log(q)
    if x == n:
        return n * math.log1p(-q) if q < p else n * math.log(p)
    if x < 0.0 or x > n:
        return -math.inf
    lc = _stirlerr(n) - _stirlerr(x) - _stirlerr(n - x) - _bd0(x, n * p) - _bd0(n - x, n * q)
    lf = 2.0 * _HALF_LOG_2PI + math.log(x) + math.log1p(-x / n)
    return lc - 0.5 * lf


@njit(cache=True)
def _log_pmf_branch(x, code, mu, v, m, n):
    if x < 0.0:
        return -math.inf
    if code == _POISSON:
        return x * math.log(mu) - mu - math.lgamma(x + 1.0)
    if code == _BINOMIAL:
        if n <= mu:  # p == 1: point mass at n
            return 0.0 if x == n else -math.inf
        # the complement (n - mu)/n is exact even when p ~ 1
        return _log_binom_raw(x, n, mu / n, (n - mu) / n)
    # Gamma(x+m)/(Gamma(m) x!) (mu/v)**m (1 - mu/v)**x written as a binomial term
    return math.log(m / (m + x)) + _log_binom_raw(m, m + x, mu / v, (v - mu) / v)


@njit(cache=True)
def _resolve(mu, v, tol):
    gap = mu - v
    if abs(gap) <= tol * mu:
        return _POISSON, math.inf, 0.0
    m = mu * mu / abs(gap)
    if gap > 0:
        return _BINOMIAL, m, max(math.ceil(m * (1.0 - INT_SNAP)), math.ceil(mu))
    return _NEGBIN, m, 0.0


@njit(cache=True)
def _log_pmf_moments(x, mu, v, tol):
    out = np.empty(x.size)
    for i in range(x.size):
        code, m, n = _resolve(mu[i], v[i], tol)
        out[i] = _log_pmf_branch(x[i], code, mu[i], v[i], m, n)
    return out


@njit(cache=True)
def _log_pmf_fixed(x, code, mu, v, m, n):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _log_pmf_branch(x[i], code, mu, v, m, n)
    return out


def gd_from_moments(mu: float, v: float, tol: float = BRANCH_TOL) -> GdParams:
    mu = float(mu)
    v = float(v)
    if not (mu > 0 and v > 0) or not (math.isfinite(mu) and math.isfinite(v)):
        raise ValueError(f"Gd needs positive finite mean and variance, got mu={mu}, v={v}")
    gap = mu - v
    if abs(gap) <= tol * mu:
        return GdParams(mu, v, Branch.POISSON, math.inf, 0.0)
    m = mu * mu / abs(gap)
    if gap > 0:
        m_int = max(math.ceil(m * (1.0 - INT_SNAP)), math.ceil(mu))
        return GdParams(mu, v, Branch.BINOMIAL, m, mu / m_int, m_int)
    return GdParams(mu, v, Branch.NEGATIVE_BINOMIAL, m, 1.0 - mu / v)


def mean(g: GdParams) -> float:
    """Analytic mean of the resolved distribution."""
    if g.branch is Branch.BINOMIAL:
        return g.m_int * g.p
    if g.branch is Branch.POISSON:
        return g.mu
    return g.m * g.p / (1.0 - g.p)


def variance(g: GdParams) -> float:
    """Analytic variance of the resolved distribution."""
    if g.branch is Branch.BINOMIAL:
        return g.m_int * g.p * (1.0 - g.p)
    if g.branch is Branch.POISSON:
        return g.mu
    return g.m * g.p / (1.0 - g.p) ** 2


def log_pmf(x, g: GdParams):
    """Log-probability of count(s) ``x``; ``-inf`` outside the support."""
    x = np.asarray(x, dtype=float)
    n = float(g.m_int) if g.m_int is not None else 0.0
    out = _log_pmf_fixed(np.ascontiguousarray(x.ravel()), _CODES[g.branch], g.mu, g.v, g.m, n)
    return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


def sample(g: GdParams, rng: np.random.Generator, size=None):
    """Draw count(s) from the resolved branch distribution."""
    if g.branch is Branch.POISSON:
        return rng.poisson(g.mu, size)
    if g.branch is Branch.BINOMIAL:
        return rng.binomial(g.m_int, g.p, size)
    # numpy counts failures before the n-th success with success probability 1 - p
    return rng.negative_binomial(g.m, 1.0 - g.p, size)


def log_pmf_moments(x, mu, v, tol: float = BRANCH_TOL) -> np.ndarray:
    """Elementwise ``log Gd(x_i | mu_i, v_i)``; same branch rules as :func:`gd_from_moments`.

    Vectorised for the likelihood, which scores one count per observation time.
    """
    x, mu, v = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x, mu, v)))
    if np.any(~(mu > 0)) or np.any(~(v > 0)):
        raise ValueError("Gd needs positive mean and variance")
    flat = [np.ascontiguousarray(a.ravel()) for a in (x, mu, v)]
    return _log_pmf_moments(*flat, float(tol)).reshape(x.shape)
