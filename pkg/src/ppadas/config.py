"""YAML configuration for scenarios and end-to-end runs.

A scenario file is self-contained: the sensor array plus the fiber constants
and the code it is interrogated with.  A run file references a scenario and
adds acquisition choices (duration, oversampling, noise, excitations, seed).
Bundled run files spell out every physical constant; nothing is left to
hidden defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .codes import CodeLengthError, LegendreCode, legendre_sequence
from .fibersim import (
    DEFAULT_OVERSAMPLING,
    PHASE_PER_PERIOD,
    PHASE_PER_SAMPLE,
    Excitation,
    NoiseModel,
)
from .planner import (
    DEFAULT_GROUP_VELOCITY,
    DEFAULT_LOOP_GAIN,
    DEFAULT_MIN_SEPARATION,
    DEFAULT_RING_TAPS,
    LadderScenario,
    RING,
    SensorElement,
)


class ConfigError(ValueError):
    """Configuration file is missing, malformed, or inconsistent."""


def _load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1})" if mark else ""
        raise ConfigError(f"{path}{where}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def _require(doc: dict, key: str, path) -> object:
    if key not in doc:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return doc[key]


_MISSING = object()


def _number(doc: dict, key: str, path, default=_MISSING) -> float:
    if key not in doc:
        if default is _MISSING:
            raise ConfigError(f"{path}: missing required key {key!r}")
        return float(default)
    val = doc[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        raise ConfigError(f"{path}: {key!r} must be a number, got {val!r}")
    return float(val)


def _sensor_from_dict(entry: dict, index: int, path) -> SensorElement:
    if not isinstance(entry, dict):
        raise ConfigError(f"{path}: sensors[{index}] must be a mapping")
    try:
        kind = entry.get("kind", "mzi")
        return SensorElement(
            sensor_id=str(entry.get("id", f"sensor{index + 1}")),
            kind=kind,
            position=_number(entry, "position", path),
            imbalance=_number(entry, "imbalance", path),
            input_tap=_number(entry, "input_tap", path, 1.0),
            output_tap=_number(entry, "output_tap", path, 1.0),
            ring_taps=int(entry.get("ring_taps", DEFAULT_RING_TAPS)),
            loop_gain=_number(entry, "loop_gain", path, DEFAULT_LOOP_GAIN),
            arm_loss_db=_number(entry, "arm_loss_db", path, 0.0),
            arm_phase=_number(entry, "arm_phase", path, 0.0),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: sensors[{index}]: {exc}") from exc


def load_scenario(path) -> LadderScenario:
    """Parse a scenario file and attach its code."""
    doc = _load_yaml(path)
    code_doc = _require(doc, "code", path)
    if not isinstance(code_doc, dict):
        raise ConfigError(f"{path}: 'code' must be a mapping with n and chip_duration")
    n = code_doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool):
        raise ConfigError(f"{path}: code.n must be an integer, got {n!r}")
    chip = _number(code_doc, "chip_duration", path)
    try:
        code = legendre_sequence(n, chip)
    except CodeLengthError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    sensors_doc = _require(doc, "sensors", path)
    if not isinstance(sensors_doc, list) or not sensors_doc:
        raise ConfigError(f"{path}: 'sensors' must be a non-empty list")
    sensors = [_sensor_from_dict(s, i, path) for i, s in enumerate(sensors_doc)]
    try:
        return LadderScenario(
            sensors=sensors,
            group_velocity=_number(doc, "group_velocity", path, DEFAULT_GROUP_VELOCITY),
            fiber_attenuation_db_per_km=_number(doc, "fiber_attenuation_db_per_km", path, 0.2),
            code=code,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass
class RunConfig:
    """Everything one end-to-end run needs, resolved and validated."""

    scenario: LadderScenario
    scenario_path: str
    oversampling: int
    duration: float
    seed: int
    noise: NoiseModel
    excitations: list[Excitation] = field(default_factory=list)
    mode: str = "perfect"
    window: str = "hann"
    min_separation: float = DEFAULT_MIN_SEPARATION
    phase_sampling: str = PHASE_PER_PERIOD
    output_dir: str | None = None

    @property
    def code(self) -> LegendreCode:
        return self.scenario.code


def load_run_config(path, seed_override: int | None = None) -> RunConfig:
    """Parse a run file; the scenario path resolves relative to the run file."""
    doc = _load_yaml(path)
    scenario_ref = str(_require(doc, "scenario", path))
    scenario_path = os.path.join(os.path.dirname(os.path.abspath(path)), scenario_ref)
    scenario = load_scenario(scenario_path)

    oversampling = doc.get("oversampling", DEFAULT_OVERSAMPLING)
    if not isinstance(oversampling, int) or oversampling < 1:
        raise ConfigError(f"{path}: oversampling must be a positive integer")
    duration = _number(doc, "duration", path)
    if duration < scenario.code.period_duration:
        raise ConfigError(
            f"{path}: duration {duration} s is shorter than one code period "
            f"({scenario.code.period_duration} s)"
        )
    seed = seed_override if seed_override is not None else doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError(f"{path}: seed must be an integer")

    noise_doc = doc.get("noise", {})
    if not isinstance(noise_doc, dict):
        raise ConfigError(f"{path}: 'noise' must be a mapping")
    try:
        noise = NoiseModel(
            laser_linewidth=_number(noise_doc, "laser_linewidth", path, 100.0),
            receiver_noise_sigma=_number(noise_doc, "receiver_noise_sigma", path, 0.012),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    excitations = []
    known = {s.sensor_id for s in scenario.sensors}
    for i, e in enumerate(doc.get("excitations", []) or []):
        if not isinstance(e, dict):
            raise ConfigError(f"{path}: excitations[{i}] must be a mapping")
        sensor = str(_require(e, "sensor", path))
        if sensor not in known:
            raise ConfigError(f"{path}: excitations[{i}] names unknown sensor {sensor!r}")
        try:
            excitations.append(
                Excitation(
                    sensor_id=sensor,
                    frequency=_number(e, "frequency", path),
                    amplitude=_number(e, "amplitude", path, 1.0),
                    phase=_number(e, "phase", path, 0.0),
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{path}: excitations[{i}]: {exc}") from exc

    mode = doc.get("mode", "perfect")
    if mode not in ("perfect", "matched"):
        raise ConfigError(f"{path}: mode must be 'perfect' or 'matched', got {mode!r}")
    window = doc.get("window", "hann")
    if window not in ("none", "hann"):
        raise ConfigError(f"{path}: window must be 'none' or 'hann', got {window!r}")
    phase_sampling = doc.get("phase_sampling", PHASE_PER_PERIOD)
    if phase_sampling not in (PHASE_PER_PERIOD, PHASE_PER_SAMPLE):
        raise ConfigError(f"{path}: phase_sampling must be 'period' or 'sample'")

    return RunConfig(
        scenario=scenario,
        scenario_path=scenario_path,
        oversampling=oversampling,
        duration=duration,
        seed=seed,
        noise=noise,
        excitations=excitations,
        mode=mode,
        window=window,
        min_separation=_number(doc, "min_separation", path, DEFAULT_MIN_SEPARATION),
        phase_sampling=phase_sampling,
        output_dir=str(doc["output_dir"]) if "output_dir" in doc else None,
    )
