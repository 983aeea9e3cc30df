"""General reaction systems, the stochastic SIR instance and exact (Gillespie) simulation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "PropensityError",
    "Reaction",
    "ReactionNetwork",
    "SIRParameters",
    "SystemState",
    "Trajectory",
    "ObservationSeries",
    "build_sir",
    "simulate_trajectory",
    "simulate_ensemble",
    "sample_at",
    "write_trajectory_csv",
    "read_trajectory_csv",
]


class PropensityError(ValueError):
    """A propensity evaluated to a negative or non-finite rate."""


@dataclass(frozen=True)
class Reaction:
    """One reaction channel.

    ``propensity(x, params)`` must accept either a single count vector of
    shape ``(u,)`` or a batch of shape ``(n, u)`` and return a rate of the
    matching leading shape.
    """

    reactants: tuple[int, ...]
    products: tuple[int, ...]
    propensity: Callable[[np.ndarray, Any], Any]
    name: str = ""

    @property
    def change(self) -> np.ndarray:
        return np.asarray(self.products, dtype=np.int64) - np.asarray(self.reactants, dtype=np.int64)


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    params: Any = None

    def __post_init__(self):
        u = len(self.species)
        if u < 1:
            raise ValueError("a network needs at least one species")
        for r in self.reactions:
            if len(r.reactants) != u or len(r.products) != u:
                raise ValueError(f"reaction {r.name!r}: stoichiometry length must be {u}")
            if min(r.reactants) < 0 or min(r.products) < 0:
                raise ValueError(f"reaction {r.name!r}: negative stoichiometry")
            if not np.any(r.change):
                raise ValueError(f"reaction {r.name!r}: net change is zero")

    @property
    def species_count(self) -> int:
        return len(self.species)

    @property
    def stoichiometry(self) -> np.ndarray:
        """Net change matrix, one row per reaction."""
        return np.array([r.change for r in self.reactions], dtype=np.int64)

    @property
    def reactant_matrix(self) -> np.ndarray:
        return np.array([r.reactants for r in self.reactions], dtype=np.int64)

    def propensities(self, x: np.ndarray) -> np.ndarray:
        """Rates of every reaction at ``x`` (last axis is reactions).

        Channels whose reactants are short of their stoichiometric
        requirement are forced to zero.
        """
        x = np.asarray(x)
        h = np.stack(
            [np.broadcast_to(np.asarray(r.propensity(x, self.params), dtype=float), x.shape[:-1])
             for r in self.reactions],
            axis=-1,
        )
        short = np.any(x[..., None, :] < self.reactant_matrix, axis=-1)
        h = np.where(short, 0.0, h)
        if not np.all(np.isfinite(h)) or np.any(h < 0):
            raise PropensityError(f"invalid propensities {h!r} at state {x!r}")
        return h


@dataclass(frozen=True)
class SIRParameters:
    """Contact rate ``b0``, removal rate ``b1`` and system size ``omega``.

    ``b0 = 0`` is allowed so that pure-removal chains can be simulated.
    """

    b0: float
    b1: float
    omega: float

    def __post_init__(self):
        vals = (self.b0, self.b1, self.omega)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite SIR parameters {vals}")
        if self.b0 < 0 or self.b1 <= 0 or self.omega <= 0:
            raise ValueError(f"SIR parameters must be positive, got {vals}")

    @property
    def r0(self) -> float:
        return self.b0 / self.b1


@dataclass(frozen=True)
class SystemState:
    counts: tuple[int, ...]
    time: float = 0.0

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError(f"negative counts {self.counts}")
        if self.time < 0:
            raise ValueError("negative time")


@dataclass
class Trajectory:
    """Right-continuous step path: ``states[i]`` holds on ``[times[i], times[i+1])``."""

    times: np.ndarray
    states: np.ndarray
    t_max: float

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class ObservationSeries:
    times: np.ndarray
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.times.ndim != 1 or self.times.shape != self.counts.shape:
            raise ValueError("times and counts must be 1-d of equal length")
        if len(self.times) < 1:
            raise ValueError("an observation series needs at least one point")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("observation times must be strictly increasing")
        if np.any(self.counts < 0):
            raise ValueError("observed counts must be non-negative")

    def __len__(self):
        return len(self.times)

    def head(self, n: int) -> "ObservationSeries":
        return ObservationSeries(self.times[:n], self.counts[:n], dict(self.meta))

    def tail(self, n: int) -> "ObservationSeries":
        return ObservationSeries(self.times[-n:], self.counts[-n:], dict(self.meta))


def _infection(x, p):
    return p.b0 * x[..., 0] * x[..., 1] / p.omega


def _removal(x, p):
    return p.b1 * x[..., 1]


def build_sir(params: SIRParameters) -> ReactionNetwork:
    """S + I -> 2I at ``b0*S*I/omega`` and I -> R at ``b1*I``."""
    return ReactionNetwork(
        species=("S", "I", "R"),
        reactions=(
            Reaction((1, 1, 0), (0, 2, 0), _infection, "infection"),
            Reaction((0, 1, 0), (0, 0, 1), _removal, "removal"),
        ),
        params=params,
    )


def _exp_wait(u: float, rate: float) -> float:
    # inverse CDF; 1 - u lies in (0, 1]
    return -math.log1p(-u) / rate


def simulate_trajectory(network: ReactionNetwork, init: SystemState, t_max: float,
                        rng: np.random.Generator) -> Trajectory:
    """Exact stochastic simulation up to ``t_max`` or absorption."""
    if not t_max > init.time:
        raise ValueError("t_max must exceed the initial time")
    if len(init.counts) != network.species_count:
        raise ValueError("initial state does not match the number of species")
    nu = network.stoichiometry
    x = np.array(init.counts, dtype=np.int64)
    t = float(init.time)
    times = [t]
    states = [x.copy()]
    while True:
        h = network.propensities(x)
        h0 = float(h.sum())
        if h0 <= 0.0:
            break
        u1, u2 = rng.random(2)
        t += _exp_wait(u1, h0)
        if t >= t_max:
            break
        k = int(np.searchsorted(np.cumsum(h), u2 * h0, side="right"))
        k = min(k, len(h) - 1)
        x = x + nu[k]
        times.append(t)
        states.append(x.copy())
    return Trajectory(np.array(times), np.array(states), float(t_max))


def simulate_ensemble(network: ReactionNetwork, init_counts: Sequence[int], sample_times: Sequence[float],
                      n: int, rng: np.random.Generator) -> np.ndarray:
    """Run ``n`` independent SSA replicates in lockstep and record the state at each sample time.

    Returns an integer array of shape ``(n, len(sample_times), u)``.  Same
    kernel as :func:`simulate_trajectory`, vectorised across replicates.
    """
    ts = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(ts) < 0) or ts[0] < 0:
        raise ValueError("sample times must be non-negative and increasing")
    nu = network.stoichiometry
    n_t = len(ts)
    x = np.tile(np.asarray(init_counts, dtype=np.int64), (n, 1))
    t = np.zeros(n)
    out = np.empty((n, n_t, network.species_count), dtype=np.int64)
    nxt = np.zeros(n, dtype=np.int64)
    t_pad = np.append(ts, np.inf)
    while True:
        h = network.propensities(x)
        h0 = h.sum(axis=1)
        u1 = rng.random(n)
        u2 = rng.random(n)
        with np.errstate(divide="ignore"):
            t_new = np.where(h0 > 0, t - np.log1p(-u1) / np.where(h0 > 0, h0, 1.0), np.inf)
        # record the pre-jump state for every sample time the jump crosses
        while True:
            hit = (nxt < n_t) & (t_pad[nxt] < t_new)
            if not hit.any():
                break
            rows = np.flatnonzero(hit)
            out[rows, nxt[rows]] = x[rows]
            nxt[rows] += 1
        active = nxt < n_t
        if not active.any():
            return out
        k = (u2[:, None] * h0[:, None] >= np.cumsum(h, axis=1)).sum(axis=1)
        k = np.minimum(k, len(network.reactions) - 1)
        x[active] += nu[k[active]]
        t = np.where(active, t_new, t)


def sample_at(traj: Trajectory, times: Sequence[float], species_index: int) -> ObservationSeries:
    """Counts of one species in force at each requested time (last event at or before t)."""
    ts = np.asarray(times, dtype=float)
    if np.any(ts < traj.times[0]) or np.any(ts > traj.t_max):
        raise ValueError(f"sample times must lie within [{traj.times[0]}, {traj.t_max}]")
    idx = np.searchsorted(traj.times, ts, side="right") - 1
    return ObservationSeries(ts, traj.states[idx, species_index])


def write_trajectory_csv(traj: Trajectory, path) -> None:
    u = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time"] + [f"x{j + 1}" for j in range(u)])
        for t, s in zip(traj.times, traj.states):
            w.writerow([format(float(t), ".17g")] + [int(c) for c in s])


def read_trajectory_csv(path, t_max: float | None = None) -> Trajectory:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    times = data[:, 0]
    return Trajectory(times, data[:, 1:].astype(np.int64), float(t_max if t_max is not None else times[-1]))
