"""CSV/JSON readers and writers for the delimited outputs.

Floats are written with 17 significant digits so that every file
round-trips byte for byte through read and write.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .inference.twalk import Chain
from .predict import PredictiveDraws, QuantileBand
from .reaction_network import ObservationSeries


class DataFormatError(ValueError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def read_observations_csv(path) -> ObservationSeries:
    """Read a two-column ``time,cases`` file."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != ["time", "cases"]:
        raise DataFormatError(f"{path}: expected header 'time,cases', got {','.join(header)!r}")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise DataFormatError(f"{path}: no observations")
    times, cases = [], []
    for lineno, r in enumerate(body, start=2):
        if len(r) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 2 columns")
        try:
            t = float(r[0])
            c = float(r[1])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
        if not math.isfinite(t) or c < 0 or c != int(c):
            raise DataFormatError(f"{path}:{lineno}: cases must be non-negative integers")
        times.append(t)
        cases.append(int(c))
    try:
        return ObservationSeries(np.array(times), np.array(cases))
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_observations_csv(obs: ObservationSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["time", "cases"])
        for t, c in zip(obs.times, obs.counts):
            w.writerow([fmt(t), int(c)])


CHAIN_HEADER = ["iter", "b0", "b1", "omega", "logpost"]


def write_chain_csv(chain: Chain, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(CHAIN_HEADER)
        for it, row, lp in zip(chain.iters, chain.samples, chain.logpost):
            w.writerow([int(it), *(fmt(v) for v in row), fmt(lp)])


def read_chain_csv(path) -> Chain:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CHAIN_HEADER:
        raise DataFormatError(f"{path}: expected header {','.join(CHAIN_HEADER)}")
    if len(rows) < 2:
        raise DataFormatError(f"{path}: empty chain")
    arr = np.array([[float(c) for c in r] for r in rows[1:]])
    iters = arr[:, 0].astype(np.int64)
    thin = int(iters[1] - iters[0]) if len(iters) > 1 else 1
    return Chain(("b0", "b1", "omega"), arr[:, 1:4], arr[:, 4], iters,
                 iterations=int(iters[-1]), burn_in=int(iters[0]) - 1, thin=thin)


def write_band_csv(band: QuantileBand, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["time"] + [f"q{round(p * 100):02d}" for p in band.probs])
        for j, t in enumerate(band.times):
            w.writerow([fmt(t)] + [fmt(v) for v in band.values[:, j]])


def read_band_csv(path) -> QuantileBand:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    probs = tuple(int(h[1:]) / 100 for h in rows[0][1:])
    arr = np.array([[float(c) for c in r] for r in rows[1:]])
    return QuantileBand(arr[:, 0], probs, arr[:, 1:].T.copy())


BOX_HEADER = ["time", "min", "q1", "median", "q3", "max", "whisker_lo", "whisker_hi"]


def write_boxplot_csv(stats: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(BOX_HEADER)
        for s in stats:
            w.writerow([fmt(s["time"]), s["min"], fmt(s["q1"]), fmt(s["median"]), fmt(s["q3"]),
                        s["max"], s["whisker_lo"], s["whisker_hi"]])


def write_draws_csv(pd: PredictiveDraws, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["row"] + [fmt(t) for t in pd.future_times])
        for r, d in zip(pd.rows, pd.draws):
            w.writerow([int(r), *(int(x) for x in d)])


def histogram(samples, bins: int = 50) -> tuple[np.ndarray, np.ndarray]:
    dens, edges = np.histogram(np.asarray(samples), bins=bins, density=True)
    return dens, edges


def write_histogram_csv(samples, path, bins: int = 50) -> None:
    dens, edges = histogram(samples, bins)
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["bin_lo", "bin_hi", "density"])
        for lo, hi, d in zip(edges[:-1], edges[1:], dens):
            w.writerow([fmt(lo), fmt(hi), fmt(d)])


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
