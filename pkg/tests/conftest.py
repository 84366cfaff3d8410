import time
from pathlib import Path

import pytest

from ppadas.config import load_run_config
from ppadas.pipeline import run_e2e

ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = ROOT / "configs"


@pytest.fixture(scope="session")
def config_dir() -> Path:
    return CONFIG_DIR


def _run_twice(config_path: Path, tmp_path_factory, label: str):
    """Same config and seed, two runs into separate directories."""
    cfg = load_run_config(config_path)
    out_a = tmp_path_factory.mktemp(f"{label}_a")
    out_b = tmp_path_factory.mktemp(f"{label}_b")
    t0 = time.perf_counter()
    report_a = run_e2e(cfg, out_a)
    elapsed = time.perf_counter() - t0
    report_b = run_e2e(cfg, out_b)
    return {
        "config": cfg,
        "report": report_a,
        "report_b": report_b,
        "out_a": out_a,
        "out_b": out_b,
        "elapsed_first": elapsed,
    }


@pytest.fixture(scope="session")
def profile_runs(tmp_path_factory):
    """The bundled 15 ms quiet recording, executed twice with one seed."""
    return _run_twice(CONFIG_DIR / "ladder3_profile.yaml", tmp_path_factory, "profile")


@pytest.fixture(scope="session")
def tones_runs(tmp_path_factory):
    """The bundled 25 ms three-tone recording, executed twice with one seed."""
    return _run_twice(CONFIG_DIR / "ladder3_tones.yaml", tmp_path_factory, "tones")
