import json

import numpy as np
import pytest

from stochsir.config import RunConfig

SIR_TRUE = (40.0, 7.0, 200.0)


def synthetic_config(tmp, **overrides) -> RunConfig:
    """Seeded weekly synthetic setup with the default true parameters."""
    doc = {
        "model": {"min_outbreak": 20},
        "data": {"path": str(tmp / "observations.csv"), "synthetic": True},
        "output_dir": str(tmp),
        "seed": 2012,
    }
    for key, val in overrides.items():
        doc.setdefault(key, {})
        if isinstance(val, dict):
            doc[key].update(val)
        else:
            doc[key] = val
    return RunConfig.model_validate(doc)


def write_config(path, cfg: RunConfig):
    path.write_text(json.dumps(cfg.resolved()))
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion id -> (passed, detail), filled in by test_acceptance.py
ACCEPTANCE = {}


def record(cid: str, passed: bool, detail: str) -> None:
    ACCEPTANCE[cid] = (bool(passed), detail)
    print(f"{cid} {'PASS' if passed else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}: {detail}")
