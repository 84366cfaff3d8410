import json

import numpy as np
import pytest

from ppadas import cli
from ppadas.config import ConfigError, load_run_config, load_scenario
from ppadas.fibersim import load_capture

LOOPBACK_SCENARIO = """\
group_velocity: 2.0e+8
fiber_attenuation_db_per_km: 0.0
code: {n: 251, chip_duration: 20.0e-9}
sensors:
  - {id: mzi_a, kind: mzi, position: 50.0, imbalance: 40.0, input_tap: 1.0, output_tap: 1.0}
"""

LOOPBACK_RUN = """\
scenario: scenario.yaml
oversampling: 4
duration: 2.0e-3
seed: 7
mode: perfect
window: none
min_separation: 30.0e-9
noise: {laser_linewidth: 0.0, receiver_noise_sigma: 0.0}
excitations:
  - {sensor: mzi_a, frequency: 20000.0, amplitude: 0.8, phase: 0.0}
"""

# Two identical stages one whole n=7 period apart: their residues coincide.
COINCIDENT_SCENARIO = """\
group_velocity: 2.0e+8
code: {n: 7, chip_duration: 20.0e-9}
sensors:
  - {id: a, kind: mzi, position: 0.0, imbalance: 10.0}
  - {id: b, kind: mzi, position: 14.0, imbalance: 10.0}
"""


@pytest.fixture
def loopback_cfg(tmp_path):
    (tmp_path / "scenario.yaml").write_text(LOOPBACK_SCENARIO)
    run = tmp_path / "run.yaml"
    run.write_text(LOOPBACK_RUN)
    return run


class TestConfigLoading:
    def test_scenario_roundtrip(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text(LOOPBACK_SCENARIO)
        scenario = load_scenario(path)
        assert scenario.code.n == 251
        assert scenario.sensors[0].sensor_id == "mzi_a"
        assert scenario.group_velocity == 2.0e8

    def test_run_config(self, loopback_cfg):
        cfg = load_run_config(loopback_cfg)
        assert cfg.seed == 7
        assert cfg.excitations[0].frequency == 20000.0
        assert cfg.noise.receiver_noise_sigma == 0.0

    def test_seed_override(self, loopback_cfg):
        assert load_run_config(loopback_cfg, seed_override=99).seed == 99

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(tmp_path / "nope.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("sensors: [unclosed\n")
        with pytest.raises(ConfigError, match="YAML"):
            load_scenario(path)

    def test_bad_code_length(self, tmp_path):
        path = tmp_path / "bad_n.yaml"
        path.write_text(LOOPBACK_SCENARIO.replace("n: 251", "n: 252"))
        with pytest.raises(ConfigError, match="4k - 1"):
            load_scenario(path)

    def test_duration_shorter_than_period(self, tmp_path):
        (tmp_path / "scenario.yaml").write_text(LOOPBACK_SCENARIO)
        run = tmp_path / "run.yaml"
        run.write_text(LOOPBACK_RUN.replace("duration: 2.0e-3", "duration: 1.0e-9"))
        with pytest.raises(ConfigError, match="period"):
            load_run_config(run)

    def test_unknown_excited_sensor(self, tmp_path):
        (tmp_path / "scenario.yaml").write_text(LOOPBACK_SCENARIO)
        run = tmp_path / "run.yaml"
        run.write_text(LOOPBACK_RUN.replace("sensor: mzi_a", "sensor: ghost"))
        with pytest.raises(ConfigError, match="unknown sensor"):
            load_run_config(run)


class TestCliPlan:
    def test_gen_code_stdout(self, capsys):
        assert cli.main(["gen-code", "--n", "7"]) == 0
        out = capsys.readouterr().out.split()
        assert out == ["1", "1", "1", "-1", "1", "-1", "-1"]

    def test_gen_code_invalid_n(self, capsys):
        assert cli.main(["gen-code", "--n", "6"]) == 4

    def test_gen_code_binary(self, tmp_path):
        out = tmp_path / "code.bin"
        assert cli.main(["gen-code", "--n", "7", "--binary", "--out", str(out)]) == 0
        assert out.stat().st_size == 7

    def test_plan_check_feasible(self, tmp_path, capsys):
        path = tmp_path / "s.yaml"
        path.write_text(LOOPBACK_SCENARIO)
        assert cli.main(["plan", "check", "--config", str(path), "--delta", "30e-9"]) == 0
        assert "feasible         : True" in capsys.readouterr().out

    def test_plan_check_infeasible_names_pair(self, tmp_path, capsys):
        path = tmp_path / "s.yaml"
        path.write_text(COINCIDENT_SCENARIO)
        rc = cli.main(["plan", "check", "--config", str(path)])
        out = capsys.readouterr().out
        assert rc == 2
        assert "violating pair" in out

    def test_plan_check_json(self, tmp_path):
        path = tmp_path / "s.yaml"
        path.write_text(LOOPBACK_SCENARIO)
        report = tmp_path / "report.json"
        cli.main(["plan", "check", "--config", str(path), "--delta", "30e-9",
                  "--json", str(report)])
        doc = json.loads(report.read_text())
        assert doc["feasible"] is True
        assert len(doc["peaks"]) == 2

    def test_plan_check_missing_config(self, capsys):
        assert cli.main(["plan", "check", "--config", "/nonexistent.yaml"]) == 4

    def test_plan_search(self, tmp_path, capsys):
        path = tmp_path / "s.yaml"
        path.write_text(LOOPBACK_SCENARIO)
        rc = cli.main([
            "plan", "search", "--config", str(path),
            "--n-min", "240", "--n-max", "260", "--delta", "30e-9",
        ])
        assert rc == 0
        assert "251" in capsys.readouterr().out.split()

    def test_plan_couplers(self, capsys):
        assert cli.main(["plan", "couplers", "--count", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3
        assert lines[-1].split("\t")[1].startswith("1.0")


class TestCliPipeline:
    def test_simulate_demod_spectrum(self, loopback_cfg, tmp_path, capsys):
        cap_path = tmp_path / "cap.bin"
        assert cli.main([
            "simulate", "--config", str(loopback_cfg), "--out", str(cap_path)
        ]) == 0
        cap = load_capture(cap_path)
        assert cap.oversampling == 4
        assert len(cap.samples) == int(round(2e-3 * 200e6))

        demod_dir = tmp_path / "demod"
        assert cli.main([
            "demod", "--capture", str(cap_path), "--config", str(loopback_cfg),
            "--out", str(demod_dir),
        ]) == 0
        assert (demod_dir / "profile.csv").exists()
        assert (demod_dir / "phase_mzi_a.csv").exists()

        spec_dir = tmp_path / "spec"
        assert cli.main([
            "spectrum", "--capture", str(cap_path), "--config", str(loopback_cfg),
            "--out", str(spec_dir),
        ]) == 0
        data = np.loadtxt(spec_dir / "spectrum_mzi_a.csv", delimiter=",", skiprows=1)
        peak = data[np.argmax(data[:, 1]), 0]
        n_periods = int(2e-3 / (251 * 20e-9))
        bin_hz = (1.0 / (251 * 20e-9)) / n_periods
        assert abs(peak - 20000.0) <= bin_hz

    def test_e2e_loopback(self, loopback_cfg, tmp_path, capsys):
        out_dir = tmp_path / "e2e"
        assert cli.main([
            "e2e", "--config", str(loopback_cfg), "--out", str(out_dir)
        ]) == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["feasible"] is True
        tone = report["sensors"][0]["dominant_tone_hz"]
        n_periods = report["n_periods"]
        bin_hz = report["scan_rate_hz"] / n_periods
        assert abs(tone - 20000.0) <= bin_hz
        assert (out_dir / "report.txt").exists()

    def test_e2e_infeasible_exits_2(self, tmp_path, capsys):
        (tmp_path / "scenario.yaml").write_text(COINCIDENT_SCENARIO)
        run = tmp_path / "run.yaml"
        run.write_text(
            "scenario: scenario.yaml\noversampling: 4\nduration: 1.0e-3\nseed: 1\n"
            "noise: {laser_linewidth: 0.0, receiver_noise_sigma: 0.0}\n"
        )
        rc = cli.main(["e2e", "--config", str(run), "--out", str(tmp_path / "out")])
        assert rc == 2
        assert "infeasible" in capsys.readouterr().err

    def test_e2e_without_out_dir_is_config_error(self, loopback_cfg):
        assert cli.main(["e2e", "--config", str(loopback_cfg)]) == 4

    def test_sync_flag_on_rolled_capture(self, loopback_cfg, tmp_path):
        import ppadas.fibersim as fibersim

        cap_path = tmp_path / "cap.bin"
        cli.main(["simulate", "--config", str(loopback_cfg), "--out", str(cap_path)])
        cap = load_capture(cap_path)
        cap.samples = np.roll(cap.samples, 321)
        rolled_path = tmp_path / "rolled.bin"
        fibersim.save_capture(rolled_path, cap)
        out_dir = tmp_path / "sync_out"
        assert cli.main([
            "demod", "--capture", str(rolled_path), "--config", str(loopback_cfg),
            "--out", str(out_dir), "--sync",
        ]) == 0

    def test_bench_cli(self, capsys):
        assert cli.main([
            "bench", "--n", "103", "--oversampling", "2", "--periods", "8"
        ]) == 0
        out = capsys.readouterr().out
        assert "throughput" in out
        assert "real-time capable" in out
