"""The t-walk: a self-adjusting MCMC sampler on two coupled points.

Each iteration picks one of the two points, moves it with one of four
kernels (walk, traverse, blow, hop) using the other point as the pivot, and
accepts with the Metropolis-Hastings ratio of the product target
``pi(x) * pi(x')``.  The kernels are scale free, so no tuning is needed.
Kernel mix and constants are the sampler's standard defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

__all__ = ["Chain", "twalk", "twalk_sample", "KERNELS", "KERNEL_PROBS"]

KERNELS = ("walk", "traverse", "blow", "hop")
KERNEL_PROBS = (0.4918, 0.4918, 0.0082, 0.0082)
WALK_A = 1.5
TRAVERSE_A = 6.0
N1_PHI = 4
_CUM = np.cumsum(KERNEL_PROBS)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass
class Chain:
    """Retained samples of the first t-walk point.

    ``samples`` has one row per retained iteration and the columns of
    ``names``; ``logpost`` the matching log posterior values.
    """

    names: tuple[str, ...]
    samples: np.ndarray
    logpost: np.ndarray
    iters: np.ndarray
    iterations: int
    burn_in: int
    thin: int
    seed: int | None = None
    acceptance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.logpost)

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, self.names.index(name)]

    def append(self, sample, logpost: float) -> None:
        self.samples = np.vstack([self.samples, np.asarray(sample, dtype=float)[None, :]])
        self.logpost = np.append(self.logpost, logpost)
        last = self.iters[-1] + self.thin if len(self.iters) else 0
        self.iters = np.append(self.iters, last)


@njit(cache=True)
def _beta(u_sel, u):
    a = TRAVERSE_A
    if u_sel < (a - 1.0) / (2.0 * a):
        return u ** (1.0 / (a + 1.0))
    return u ** (1.0 / (1.0 - a))


@njit(cache=True)
def _gauss_logq(h, centre, sigma, phi):
    k = 0
    ss = 0.0
    for j in range(h.size):
        if phi[j]:
            d = h[j] - centre[j]
            ss += d * d
            k += 1
    return -k * (_HALF_LOG_2PI + math.log(sigma)) - 0.5 * ss / (sigma * sigma)


@njit(cache=True)
def _scale(b, a, phi):
    s = 0.0
    for j in range(a.size):
        if phi[j]:
            s = max(s, abs(b[j] - a[j]))
    return s


@njit(cache=True)
def _propose(kind, a, b, phi, u, z):
    """Move ``a`` with pivot ``b``; return the proposal and the log Hastings correction.

    ``u`` holds two uniforms and one per coordinate, ``z`` one standard normal per coordinate.
    """
    n = a.size
    nphi = 0
    for j in range(n):
        nphi += phi[j]
    h = a.copy()
    if kind == 0:
        for j in range(n):
            if phi[j]:
                w = u[2 + j]
                h[j] = a[j] + (a[j] - b[j]) * (WALK_A / (1.0 + WALK_A)) * (WALK_A * w * w + 2.0 * w - 1.0)
        return h, 0.0
    if kind == 1:
        beta = _beta(u[0], u[1])
        for j in range(n):
            if phi[j]:
                h[j] = b[j] + beta * (b[j] - a[j])
        return h, (nphi - 2) * math.log(beta)
    if kind == 2:
        sig = _scale(b, a, phi)
        for j in range(n):
            if phi[j]:
                h[j] = b[j] + sig * z[j]
        sig_back = _scale(b, h, phi)
        if sig_back == 0.0:
            return h, -math.inf
        return h, _gauss_logq(a, b, sig_back, phi) - _gauss_logq(h, b, sig, phi)
    sig = _scale(b, a, phi) / 3.0
    for j in range(n):
        if phi[j]:
            h[j] = a[j] + sig * z[j]
    sig_back = _scale(b, h, phi) / 3.0
    if sig_back == 0.0:
        return h, -math.inf
    return h, _gauss_logq(a, h, sig_back, phi) - _gauss_logq(h, a, sig, phi)


@njit(cache=True)
def _admissible(h, b, positive):
    # the proposal may not share a coordinate with the pivot, and optionally must stay positive
    for j in range(h.size):
        if h[j] == b[j] or (positive and not h[j] > 0.0):
            return False
    return True


def _positive(x: np.ndarray) -> bool:
    return bool(np.all(x > 0))


_BLOCK = 4096


def twalk(logpost: Callable[[np.ndarray], float], x0, xp0, iterations: int, rng: np.random.Generator,
          support: Callable[[np.ndarray], bool] = _positive):
    """Run the raw sampler.

    Returns ``(xs, lps, stats)`` where ``xs[i]`` is the first point after
    iteration ``i`` (row 0 is the start) and ``stats`` counts proposals and
    acceptances per kernel.  Random numbers are drawn from ``rng`` in
    blocks, so a given generator state always yields the same chain.
    """
    x = np.array(x0, dtype=float)
    xp = np.array(xp0, dtype=float)
    n = x.size
    if xp.shape != x.shape:
        raise ValueError("initial points must have the same dimension")
    if np.any(x == xp):
        raise ValueError("initial points must differ in every coordinate")
    if not (support(x) and support(xp)):
        raise ValueError("initial points lie outside the support")
    lp = float(logpost(x))
    lpp = float(logpost(xp))
    if not (math.isfinite(lp) and math.isfinite(lpp)):
        raise ValueError(f"initial points need a finite log posterior, got {lp}, {lpp}")
    pphi = min(n, N1_PHI) / n
    positive_only = support is _positive
    xs = np.empty((iterations + 1, n))
    lps = np.empty(iterations + 1)
    xs[0] = x
    lps[0] = lp
    proposed = np.zeros(4, dtype=np.int64)
    accepted = np.zeros(4, dtype=np.int64)
    it = 1
    while it <= iterations:
        nb = min(_BLOCK, iterations + 1 - it)
        # per iteration: kernel, side, acceptance, then the proposal's 2 + n uniforms and n coordinate picks
        U = rng.random((nb, 5 + 2 * n))
        Z = rng.standard_normal((nb, n))
        kinds = np.minimum(np.searchsorted(_CUM, U[:, 0] * _CUM[-1], side="right"), 3)
        for i in range(nb):
            kind = int(kinds[i])
            u = U[i]
            move_first = u[1] < 0.5
            phi = u[5 + n:] < pphi
            proposed[kind] += 1
            if phi.any():
                a, b, lpa = (x, xp, lp) if move_first else (xp, x, lpp)
                h, log_corr = _propose(kind, a, b, phi, u[3:5 + n], Z[i])
                if log_corr > -math.inf and _admissible(h, b, positive_only) and (positive_only or support(h)):
                    lph = float(logpost(h))
                    if math.isfinite(lph) and math.log(u[2]) < lph - lpa + log_corr:
                        accepted[kind] += 1
                        if move_first:
                            x, lp = h, lph
                        else:
                            xp, lpp = h, lph
            xs[it] = x
            lps[it] = lp
            it += 1
    stats = {
        "proposed": dict(zip(KERNELS, proposed.tolist())),
        "accepted": dict(zip(KERNELS, accepted.tolist())),
        "rate": float(accepted.sum() / max(proposed.sum(), 1)),
    }
    return xs, lps, stats


def twalk_sample(posterior, init_a, init_b, iterations: int, rng: np.random.Generator | int | None = None,
                 burn_in: int | None = None, thin: int = 1) -> Chain:
    """Sample a :class:`~stochsir.inference.likelihood.Posterior` and keep the first point's chain.

    ``init_a``/``init_b`` are ParameterPoints (or vectors over the sampled
    parameters).  Burn-in defaults to 20% of ``iterations``.
    """
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = rng
        rng = np.random.default_rng(rng)
    if burn_in is None:
        burn_in = iterations // 5
    if not (0 <= burn_in < iterations) or thin < 1:
        raise ValueError("need 0 <= burn_in < iterations and thin >= 1")
    va = init_a if isinstance(init_a, np.ndarray) else posterior.to_vector(init_a)
    vb = init_b if isinstance(init_b, np.ndarray) else posterior.to_vector(init_b)
    xs, lps, stats = twalk(posterior, va, vb, iterations, rng)
    keep = np.arange(burn_in + 1, iterations + 1, thin)
    full = np.array([posterior.to_point(v).as_tuple() for v in xs[keep]]) if len(keep) else np.empty((0, 3))
    return Chain(
        names=("b0", "b1", "omega"),
        samples=full.reshape(-1, 3),
        logpost=lps[keep],
        iters=keep,
        iterations=iterations,
        burn_in=burn_in,
        thin=thin,
        seed=seed,
        acceptance=stats,
    )
