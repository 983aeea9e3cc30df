import csv
import json

import numpy as np
import pytest

from stochsir import io
from stochsir.cli import main
from stochsir.config import ConfigError, RunConfig, load_config

from conftest import synthetic_config, write_config


def run(cfg_path, *args):
    return main([args[0], "--config", str(cfg_path), *args[1:]])


@pytest.fixture
def small(tmp_path):
    cfg = synthetic_config(tmp_path / "out", mcmc={"iterations": 400}, predict={"max_draws": 50})
    return write_config(tmp_path / "c.json", cfg), tmp_path / "out"


def test_simulate_is_byte_reproducible(tmp_path):
    outs = []
    for k in range(2):
        cfg = synthetic_config(tmp_path / f"o{k}")
        assert run(write_config(tmp_path / f"c{k}.json", cfg), "simulate") == 0
        outs.append(tmp_path / f"o{k}")
    for name in ("trajectory.csv", "observations.csv", "true_moments.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_simulate_weekly_setup(small):
    cfg_path, out = small
    assert run(cfg_path, "simulate") == 0
    obs = io.read_observations_csv(out / "observations.csv")
    assert len(obs) == 53 and obs.counts[0] == 2
    np.testing.assert_allclose(np.diff(obs.times), 1 / 52)
    resolved = json.loads((out / "resolved_config_simulate.json").read_text())
    assert resolved["config"]["model"]["true_params"] == {"b0": 40.0, "b1": 7.0, "omega": 200.0}
    assert resolved["config"]["seed"] == 2012


def test_zero_infectives_flat_series(tmp_path):
    cfg = synthetic_config(tmp_path, model={"initial_infectives": 0, "min_outbreak": 0})
    assert run(write_config(tmp_path / "c.json", cfg), "simulate") == 0
    assert not io.read_observations_csv(tmp_path / "observations.csv").counts.any()


def test_seed_override_changes_output(small, tmp_path):
    cfg_path, out = small
    run(cfg_path, "simulate")
    assert main(["simulate", "--config", str(cfg_path), "--seed", "7", "--out", str(tmp_path / "s7")]) == 0
    assert (out / "trajectory.csv").read_bytes() != (tmp_path / "s7" / "trajectory.csv").read_bytes()
    assert json.loads((tmp_path / "s7" / "resolved_config_simulate.json").read_text())["config"]["seed"] == 7


def test_full_pipeline(small):
    cfg_path, out = small
    for cmd in ("simulate", "infer"):
        assert run(cfg_path, cmd) == 0
    chain = io.read_chain_csv(out / "chain.csv")
    assert len(chain) == 400 - 80
    summary = json.loads((out / "summary.json").read_text())
    assert {"map", "mean", "hpd", "acceptance_rate", "seed"} <= set(summary)
    assert set(summary["hpd"]) == {"b0", "b1", "r0"}
    assert main(["summarize", "--config", str(cfg_path)]) == 0
    for name in ("fit.png", "posterior_b0.png", "posterior_r0.png", "fit_band.csv", "map_moments.csv",
                 "hist_b0.csv", "hist_r0.csv", "resolved_config_summarize.json"):
        assert (out / name).exists(), name


def test_infer_is_reproducible_from_resolved_config(small, tmp_path):
    cfg_path, out = small
    run(cfg_path, "simulate")
    run(cfg_path, "infer")
    resolved = json.loads((out / "resolved_config_infer.json").read_text())["config"]
    resolved["output_dir"] = str(tmp_path / "again")
    again = tmp_path / "again.json"
    again.write_text(json.dumps(resolved))
    assert run(again, "infer") == 0
    assert (out / "chain.csv").read_bytes() == (tmp_path / "again" / "chain.csv").read_bytes()


def test_trimmed_predict(tmp_path):
    cfg = synthetic_config(tmp_path, model={"omega": None}, data={"trim": 14},
                           mcmc={"iterations": 300}, predict={"max_draws": 40, "save_draws": True})
    cfg_path = write_config(tmp_path / "c.json", cfg)
    for cmd in ("simulate", "infer", "predict"):
        assert run(cfg_path, cmd) == 0, cmd
    with open(tmp_path / "bands.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 14
    assert all(float(r["q05"]) <= float(r["q50"]) <= float(r["q95"]) for r in rows)
    with open(tmp_path / "boxplot.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 14
    assert (tmp_path / "draws.csv").exists()
    assert main(["summarize", "--config", str(cfg_path), "--no-figures"]) == 0
    assert not (tmp_path / "fit.png").exists()


def test_predict_at_last_observation_rejected(small, capsys):
    cfg_path, out = small
    run(cfg_path, "simulate")
    run(cfg_path, "infer")
    cfg = load_config(cfg_path)
    cfg.predict.future_times = [1.0]
    assert run(write_config(cfg_path, cfg), "predict") == 2
    assert "follow the last observation" in capsys.readouterr().err
    assert not (out / "bands.csv").exists()


def test_empty_data_file(tmp_path, capsys):
    data = tmp_path / "empty.csv"
    data.write_text("")
    cfg = RunConfig.model_validate({"data": {"path": str(data)}, "output_dir": str(tmp_path / "out")})
    assert run(write_config(tmp_path / "c.json", cfg), "infer") == 2
    assert "empty" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_omega_below_max_count(small):
    cfg_path, out = small
    run(cfg_path, "simulate")
    cfg = load_config(cfg_path)
    cfg.model.omega = 5.0
    assert run(write_config(cfg_path, cfg), "infer") == 2
    assert not (out / "chain.csv").exists()


def test_unknown_config_key(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"mcmc": {"iterations": 100, "tuning": 3}}))
    assert run(p, "infer") == 2
    assert "tuning" in capsys.readouterr().err


def test_load_config_defaults():
    cfg = load_config()
    assert cfg.mcmc.burn_in == cfg.mcmc.iterations // 5
    assert cfg.prior_spec().sampled == ("b0", "b1")

def test_band_probs_validated(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"predict": {"probs": [0.25, 0.75]}}))
    with pytest.raises(ConfigError, match="0.05 and 0.95"):
        load_config(p)
