"""Van Kampen system-size expansion for the SIR chain.

Counts are split as ``x = omega * y + sqrt(omega) * z``.  The macroscopic
densities ``y`` follow the deterministic SIR law, the fluctuation moments
``E[z]`` and ``E[z z^T]`` follow linear ODEs driven by the drift ``A``
(Jacobian of the macroscopic law) and diffusion ``B``.  The infective count
then has mean ``omega * y2`` and variance ``omega * E[z2^2]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _dopri5
from .reaction_network import SIRParameters

__all__ = [
    "IntegrationError",
    "MomentState",
    "DriftDiffusion",
    "ObservationMoments",
    "macroscopic_rhs",
    "drift_diffusion",
    "moment_rhs",
    "initial_state",
    "integrate_moments",
    "observation_moments",
    "write_moments_csv",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
]

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10
MAX_STEPS = 100_000

# packed layout: y(3), zmean(3), zcov upper triangle (11, 12, 13, 22, 23, 33)
_TRIU = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


class IntegrationError(RuntimeError):
    pass


@dataclass
class MomentState:
    y: np.ndarray
    zmean: np.ndarray
    zcov: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.zmean = np.asarray(self.zmean, dtype=float)
        self.zcov = np.asarray(self.zcov, dtype=float)
        if self.y.shape != (3,) or self.zmean.shape != (3,) or self.zcov.shape != (3, 3):
            raise ValueError("MomentState expects 3-vectors and a 3x3 matrix")

    def pack(self) -> np.ndarray:
        return np.concatenate([self.y, self.zmean, [self.zcov[i, j] for i, j in _TRIU]])

    @classmethod
    def unpack(cls, v, time: float = 0.0) -> "MomentState":
        v = np.asarray(v, dtype=float)
        return cls(v[:3].copy(), v[3:6].copy(), _unpack_cov(v[6:12]), time)


def _unpack_cov(c):
    c = np.asarray(c)
    cov = np.empty(c.shape[:-1] + (3, 3))
    for k, (i, j) in enumerate(_TRIU):
        cov[..., i, j] = c[..., k]
        cov[..., j, i] = c[..., k]
    return cov


@dataclass(frozen=True)
class DriftDiffusion:
    A: np.ndarray
    B: np.ndarray


@dataclass
class ObservationMoments:
    """Mean ``m`` and variance ``v`` of the infective count, with the full state series."""

    times: np.ndarray
    m: np.ndarray
    v: np.ndarray
    y: np.ndarray
    zmean: np.ndarray
    zcov: np.ndarray

    def states(self) -> list[MomentState]:
        return [MomentState(self.y[i], self.zmean[i], self.zcov[i], float(t)) for i, t in enumerate(self.times)]


def macroscopic_rhs(y, params: SIRParameters) -> np.ndarray:
    y1, y2, _ = y
    inf = params.b0 * y1 * y2
    rem = params.b1 * y2
    return np.array([-inf, inf - rem, rem])


def drift_diffusion(y, params: SIRParameters) -> DriftDiffusion:
    y1, y2, _ = y
    b0, b1 = params.b0, params.b1
    A = np.array([
        [-b0 * y2, -b0 * y1, 0.0],
        [b0 * y2, b0 * y1 - b1, 0.0],
        [0.0, b1, 0.0],
    ])
    inf = b0 * y1 * y2
    rem = b1 * y2
    B = np.array([
        [inf, -inf, 0.0],
        [-inf, inf + rem, -rem],
        [0.0, -rem, rem],
    ])
    return DriftDiffusion(A, B)


def moment_rhs(state: MomentState, params: SIRParameters) -> MomentState:
    """Time derivative of every component of ``state`` (returned as a MomentState)."""
    dd = drift_diffusion(state.y, params)
    A = dd.A
    dcov = A @ state.zcov + state.zcov @ A.T + dd.B
    return MomentState(macroscopic_rhs(state.y, params), A @ state.zmean, dcov, state.time)


@njit(cache=True)
def _packed_rhs(t, s, args, out):
    b0 = args[0]
    b1 = args[1]
    y1 = s[0]
    y2 = s[1]
    inf = b0 * y1 * y2
    rem = b1 * y2
    out[0] = -inf
    out[1] = inf - rem
    out[2] = rem
    a11 = -b0 * y2
    a12 = -b0 * y1
    a21 = b0 * y2
    a22 = b0 * y1 - b1
    a32 = b1
    m1, m2, m3 = s[3], s[4], s[5]
    out[3] = a11 * m1 + a12 * m2
    out[4] = a21 * m1 + a22 * m2
    out[5] = a32 * m2
    c11, c12, c13, c22, c23, c33 = s[6], s[7], s[8], s[9], s[10], s[11]
    # rows of A @ C (third column of A is zero)
    ac11 = a11 * c11 + a12 * c12
    ac12 = a11 * c12 + a12 * c22
    ac13 = a11 * c13 + a12 * c23
    ac21 = a21 * c11 + a22 * c12
    ac22 = a21 * c12 + a22 * c22
    ac23 = a21 * c13 + a22 * c23
    ac31 = a32 * c12
    ac32 = a32 * c22
    ac33 = a32 * c23
    # (A C + C A^T)_ij = (AC)_ij + (AC)_ji
    out[6] = 2.0 * ac11 + inf
    out[7] = ac12 + ac21 - inf
    out[8] = ac13 + ac31
    out[9] = 2.0 * ac22 + inf + rem
    out[10] = ac23 + ac32 - rem
    out[11] = 2.0 * ac33 + rem


def initial_state(x0, omega: float, time: float = 0.0) -> MomentState:
    """Deterministic initial condition from known counts: ``y = x0/omega``, zero fluctuations."""
    y = np.asarray(x0, dtype=float) / omega
    return MomentState(y, np.zeros(3), np.zeros((3, 3)), time)


def _solve_packed(b0, b1, s0, t0, times, rtol, atol):
    times = np.ascontiguousarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be increasing")
    if times[0] < t0:
        raise ValueError("output times must not precede the initial time")
    out, status, _ = _dopri5.dopri5(_packed_rhs, float(t0), s0, times,
                                    np.array([b0, b1], dtype=float), rtol, atol, MAX_STEPS)
    if status != _dopri5.OK:
        raise IntegrationError(_dopri5.STATUS_MESSAGES[status])
    if not np.all(np.isfinite(out)):
        raise IntegrationError(_dopri5.STATUS_MESSAGES[_dopri5.NON_FINITE])
    return out


def integrate_moments(params: SIRParameters, init: MomentState, times, rtol: float = DEFAULT_RTOL,
                      atol: float = DEFAULT_ATOL) -> ObservationMoments:
    """Solve the coupled 12-dimensional moment system and report it at ``times``."""
    times = np.asarray(times, dtype=float)
    sol = _solve_packed(params.b0, params.b1, init.pack(), init.time, times, rtol, atol)
    cov = _unpack_cov(sol[:, 6:12])
    return ObservationMoments(
        times=times,
        m=np.maximum(params.omega * sol[:, 1], 0.0),
        v=np.maximum(params.omega * cov[:, 1, 1], 0.0),
        y=sol[:, :3],
        zmean=sol[:, 3:6],
        zcov=cov,
    )


def observation_moments(b0: float, b1: float, omega: float, x2_0: float, times,
                        rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL):
    """Fast path returning only ``(m, v)`` for an epidemic started at t=0 with ``x2_0`` infectives.

    This is what the likelihood calls on every MCMC step.
    """
    y2 = x2_0 / omega
    s0 = np.zeros(12)
    s0[0] = 1.0 - y2
    s0[1] = y2
    sol = _solve_packed(b0, b1, s0, 0.0, times, rtol, atol)
    # undershoot below zero is integration error of order atol once the epidemic has died out
    return np.maximum(omega * sol[:, 1], 0.0), np.maximum(omega * sol[:, 9], 0.0)


def write_moments_csv(om: ObservationMoments, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "m", "v", "y1", "y2", "y3"])
        for i, t in enumerate(om.times):
            w.writerow([format(float(x), ".17g") for x in (t, om.m[i], om.v[i], *om.y[i])])
