"""Command-line entry point: ``stochsir simulate | infer | predict | summarize``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, load_config
from .inference import InitialCondition, Posterior, summarize_chain, twalk_sample
from .inference.twalk import Chain
from .moments import IntegrationError, initial_state, integrate_moments, write_moments_csv
from .predict import boxplot_stats, posterior_draws, predictive_samples, quantile_bands
from .reaction_network import (
    ObservationSeries,
    SIRParameters,
    SystemState,
    build_sir,
    sample_at,
    simulate_trajectory,
    write_trajectory_csv,
)

log = logging.getLogger("stochsir")

EXIT_USAGE = 2
EXIT_FAILURE = 1


class CommandError(RuntimeError):
    """Run-time failure reported to the user with a nonzero exit."""


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(cfg: RunConfig, out: Path, command: str) -> None:
    io.write_json({"command": command, "config": cfg.resolved()}, out / f"resolved_config_{command}.json")


def _observation_times(cfg: RunConfig) -> np.ndarray:
    n = int(np.floor(cfg.model.t_max / cfg.model.cadence + 1e-9))
    return np.arange(n + 1) * cfg.model.cadence


def cmd_simulate(cfg: RunConfig) -> dict:
    """Seeded Gillespie run of the configured true model, sampled at the observation cadence."""
    tp = cfg.model.true_params
    params = SIRParameters(tp.b0, tp.b1, tp.omega)
    n = int(round(tp.omega))
    if abs(n - tp.omega) > 1e-9:
        raise CommandError("simulation needs an integer population size")
    i0 = cfg.model.initial_infectives
    if i0 > n:
        raise CommandError("initial infectives exceed the population")
    net = build_sir(params)
    rng = cfg.rng("simulate")
    init = SystemState((n - i0, i0, 0))
    for attempt in range(1, cfg.model.max_attempts + 1):
        traj = simulate_trajectory(net, init, cfg.model.t_max, rng)
        if traj.final_state[2] >= cfg.model.min_outbreak:
            break
    else:
        raise CommandError(f"no outbreak of size >= {cfg.model.min_outbreak} in {cfg.model.max_attempts} attempts")
    times = _observation_times(cfg)
    obs = sample_at(traj, times, 1)
    out = _out_dir(cfg)
    write_trajectory_csv(traj, out / "trajectory.csv")
    io.write_observations_csv(obs, out / "observations.csv")
    write_moments_csv(integrate_moments(params, initial_state(init.counts, tp.omega), times),
                      out / "true_moments.csv")
    _write_resolved(cfg, out, "simulate")
    log.info("simulated %d events (attempt %d), final state %s", len(traj) - 1, attempt, traj.final_state.tolist())
    return {"trajectory": traj, "observations": obs, "attempts": attempt}


def _load_data(cfg: RunConfig) -> tuple[ObservationSeries, ObservationSeries | None]:
    if cfg.data.path is None:
        raise ConfigError("data.path is required")
    full = io.read_observations_csv(cfg.data.path)
    trim = cfg.data.trim
    if trim == 0:
        return full, None
    if trim >= len(full) - 1:
        raise ConfigError(f"trim={trim} leaves fewer than two observations")
    return full.head(len(full) - trim), full.tail(trim)


def _check_omega(cfg: RunConfig, data: ObservationSeries) -> None:
    om = cfg.model.omega
    if om is not None and om < data.counts.max():
        raise ConfigError(f"fixed omega={om} is smaller than the largest observed count {data.counts.max()}")


def cmd_infer(cfg: RunConfig) -> dict:
    """Sample the posterior with the t-walk and write chain, summary and histograms."""
    data, held = _load_data(cfg)
    _check_omega(cfg, data)
    post = Posterior(data, cfg.prior_spec())
    a, b = cfg.init_points()
    t0 = time.perf_counter()
    try:
        chain = twalk_sample(post, a, b, cfg.mcmc.iterations, cfg.rng("mcmc"),
                             burn_in=cfg.mcmc.burn_in, thin=cfg.mcmc.thin)
    except ValueError as exc:
        raise CommandError(f"MCMC initialisation failed: {exc}") from exc
    chain.seed = cfg.seed
    elapsed = time.perf_counter() - t0
    out = _out_dir(cfg)
    io.write_chain_csv(chain, out / "chain.csv")
    io.write_json({"seed": cfg.seed, "acceptance": chain.acceptance, "iterations": chain.iterations,
                   "burn_in": chain.burn_in, "thin": chain.thin, "sampled": list(post.names)},
                  out / "chain_meta.json")
    _write_resolved(cfg, out, "infer")
    log.info("t-walk: %d iterations in %.1f s, acceptance %.3f", chain.iterations, elapsed, chain.acceptance["rate"])
    summary = _write_summary(cfg, chain, post.names, out)
    return {"chain": chain, "summary": summary, "data": data, "held_out": held}


def _write_summary(cfg: RunConfig, chain: Chain, sampled, out: Path, acceptance=None):
    s = summarize_chain(chain)
    if acceptance is not None:
        s.acceptance_rate = acceptance
    doc = s.to_dict()
    doc["seed"] = cfg.seed
    doc["time_unit"] = cfg.data.time_unit
    doc["rate_unit"] = f"1/{cfg.data.time_unit}"
    dens, edges = io.histogram(s.r0)
    doc["r0_histogram"] = {"edges": edges.tolist(), "density": dens.tolist()}
    io.write_json(doc, out / "summary.json")
    for name in sampled:
        io.write_histogram_csv(chain.column(name), out / f"hist_{name}.csv")
    io.write_histogram_csv(s.r0, out / "hist_r0.csv")
    return s


def _future_times(cfg: RunConfig, data: ObservationSeries, held: ObservationSeries | None) -> np.ndarray:
    if cfg.predict.future_times:
        return np.asarray(cfg.predict.future_times, dtype=float)
    if held is not None:
        return held.times
    raise ConfigError("predict.future_times is empty and no observations were trimmed")


def _read_chain(path) -> Chain:
    try:
        return io.read_chain_csv(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read chain {path}: {exc}") from exc


def cmd_predict(cfg: RunConfig, chain_path=None) -> dict:
    """Posterior-predictive bands and box-plot statistics at future times."""
    data, held = _load_data(cfg)
    out = _out_dir(cfg)
    chain = _read_chain(chain_path or out / "chain.csv")
    ft = _future_times(cfg, data, held)
    try:
        draws = predictive_samples(chain, data, ft, cfg.rng("predict"), max_draws=cfg.predict.max_draws)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    band = quantile_bands(draws, cfg.predict.probs)
    boxes = boxplot_stats(draws)
    io.write_band_csv(band, out / "bands.csv")
    io.write_boxplot_csv(boxes, out / "boxplot.csv")
    if cfg.predict.save_draws:
        io.write_draws_csv(draws, out / "draws.csv")
    _write_resolved(cfg, out, "predict")
    return {"draws": draws, "band": band, "boxes": boxes, "held_out": held}


def cmd_summarize(cfg: RunConfig, chain_path=None) -> dict:
    """Summary JSON, histogram CSVs, fit band/MAP curves and (optionally) figures."""
    data, held = _load_data(cfg)
    out = _out_dir(cfg)
    chain = _read_chain(chain_path or out / "chain.csv")
    meta_path = out / "chain_meta.json"
    acc = None
    sampled = [n for n in chain.names if np.ptp(chain.column(n)) > 0]
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        acc = meta.get("acceptance", {}).get("rate")
    s = _write_summary(cfg, chain, sampled, out, acceptance=acc)

    init = InitialCondition.from_data(data)
    t_end = max(float(data.times[-1]), float(held.times[-1]) if held is not None else 0.0)
    grid = np.linspace(init.time, t_end, 201)
    band = quantile_bands(posterior_draws(chain, init, grid, cfg.rng("predict"),
                                          max_draws=min(cfg.predict.max_draws or 2000, 2000)),
                          cfg.predict.probs)
    io.write_band_csv(band, out / "fit_band.csv")
    curves = {}
    map_pt = s.map_point
    try:
        om = integrate_moments(SIRParameters(map_pt.b0, map_pt.b1, map_pt.omega),
                               initial_state([map_pt.omega - init.infectives, init.infectives, 0],
                                             map_pt.omega, init.time), grid)
        write_moments_csv(om, out / "map_moments.csv")
        curves["map"] = (grid, om.m)
    except IntegrationError as exc:
        log.warning("MAP moment curve failed: %s", exc)
    tp = cfg.model.true_params
    if cfg.data.synthetic:
        true_om = integrate_moments(SIRParameters(tp.b0, tp.b1, tp.omega),
                                    initial_state([tp.omega - init.infectives, init.infectives, 0],
                                                  tp.omega, init.time), grid)
        curves["true"] = (grid, true_om.m)
    boxes = None
    if (out / "boxplot.csv").exists():
        boxes = _read_boxes(out / "boxplot.csv")

    if cfg.figures:
        from . import plotting

        plotting.fit_figure(out / "fit.png", data, band, curves.get("map"), curves.get("true"), held, boxes,
                            cfg.data.time_unit)
        truth = {"b0": tp.b0, "b1": tp.b1, "omega": tp.omega, "r0": tp.b0 / tp.b1}
        for name in list(sampled) + ["r0"]:
            samples = s.r0 if name == "r0" else chain.column(name)
            plotting.posterior_figure(out / f"posterior_{name}.png", samples, name,
                                      truth=truth[name] if cfg.data.synthetic else None,
                                      hpd=s.hpd.get(name))
    _write_resolved(cfg, out, "summarize")
    return {"summary": s, "band": band}


def _read_boxes(path) -> list[dict]:
    import csv

    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


COMMANDS = {
    "simulate": cmd_simulate,
    "infer": cmd_infer,
    "predict": cmd_predict,
    "summarize": cmd_summarize,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochsir", description="Stochastic SIR simulation, inference and forecasting.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.splitlines()[0])
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--seed", type=int, help="override the configured seed (u64)")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name in ("predict", "summarize"):
            sp.add_argument("--chain", help="chain CSV written by `infer` (default: <out>/chain.csv)")
        if name == "summarize":
            sp.add_argument("--no-figures", action="store_true", help="skip rendering PNG figures")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
        if getattr(args, "no_figures", False):
            cfg.figures = False
        fn = COMMANDS[args.command]
        if args.command in ("predict", "summarize"):
            fn(cfg, args.chain)
        else:
            fn(cfg)
    except (ConfigError, io.DataFormatError) as exc:
        print(f"stochsir {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CommandError as exc:
        print(f"stochsir {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return 0


if __name__ == "__main__":
    sys.exit(main())
