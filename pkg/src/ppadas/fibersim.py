"""Coherent baseband channel model for the sensor ladder.

The optical carrier is removed: each reflection is a complex tap whose
static carrier phase is folded into the tap amplitude, and the detected
stream is the sum of delayed copies of the cyclic chip waveform, rotated
by the sensor phase and by the differential laser phase theta(t) -
theta(t - tau), plus circular receiver noise.  Delays are rounded to the
sample grid; at the default oversampling of 4 (5 ns samples) one sample
equals one meter of path at v = 2e8 m/s, so the reference imbalances land
on exact sample counts.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .codes import LegendreCode
from .planner import MZI, RING, LadderScenario

DEFAULT_OVERSAMPLING = 4
DEFAULT_LASER_LINEWIDTH = 100.0  # Hz
# Receiver noise sigma is calibrated on the bundled 3-sensor ladder: it puts
# the per-period correlation peaks near 40 dB above the bin noise, which
# keeps the acoustic spectra's noise floor safely below the -40 dB
# cross-talk budget while leaving the weakest ring pass ~20 dB proud of the
# averaged profile floor.
DEFAULT_RECEIVER_SIGMA = 0.012

PHASE_PER_PERIOD = "period"
PHASE_PER_SAMPLE = "sample"


@dataclass(frozen=True)
class Tap:
    """One reflection of the interrogation sequence.

    ``phase_mult`` counts how many times this light passed the sensing
    element: 0 for the reference arm, 1 for the interferometer sensing arm,
    m for the m-th ring pass.  The dynamic sensor phase enters multiplied
    by this count.
    """

    sensor_id: str
    peak_id: str
    delay: float
    amplitude: complex
    phase_mult: int = 0

    @property
    def arm(self) -> str:
        return "reference" if self.phase_mult == 0 else "sensing"


@dataclass(frozen=True)
class Excitation:
    """Sinusoidal phase drive on one sensor (fiber-stretcher stand-in)."""

    sensor_id: str
    frequency: float        # Hz
    amplitude: float = 1.0  # radians
    phase: float = 0.0      # radians

    def __post_init__(self):
        if self.frequency < 0 or self.amplitude < 0:
            raise ValueError("frequency and amplitude must be >= 0")


@dataclass(frozen=True)
class NoiseModel:
    """Laser linewidth (Hz) plus per-sample complex receiver noise sigma."""

    laser_linewidth: float = DEFAULT_LASER_LINEWIDTH
    receiver_noise_sigma: float = DEFAULT_RECEIVER_SIGMA
    seed: int | None = 0

    def __post_init__(self):
        if self.laser_linewidth < 0 or self.receiver_noise_sigma < 0:
            raise ValueError("linewidth and sigma must be >= 0")


@dataclass
class RawCapture:
    """Complex baseband sample stream with its acquisition metadata."""

    samples: np.ndarray
    sample_rate: float
    oversampling: int
    start_time: float = 0.0
    seed: int | None = None
    scenario_digest: str = ""

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def build_taps(scenario: LadderScenario) -> list[Tap]:
    """Expand the ladder into its tap-delay impulse response.

    Per stage, the field amplitude collects sqrt(kappa) at its own input and
    output couplers, sqrt(1 - kappa) at every earlier coupler on both buses,
    a 1/2 element split factor, and fiber attenuation over the full optical
    path of that tap.  Ring passes multiply loop_gain (and the per-pass arm
    loss/phase) once per circulation.
    """
    v = scenario.group_velocity
    alpha = scenario.fiber_attenuation_db_per_km
    taps: list[Tap] = []
    through_in = 1.0
    through_out = 1.0
    for s in scenario.sensors:
        bus_amp = math.sqrt(s.input_tap * through_in) * math.sqrt(s.output_tap * through_out)
        base = bus_amp * 0.5
        arm_amp = 10.0 ** (-s.arm_loss_db / 20.0) * np.exp(1j * s.arm_phase)
        tau0 = 2.0 * s.position / v
        tau_step = s.imbalance / v

        def path_amp(extra_m: float) -> float:
            path_km = (2.0 * s.position + extra_m) / 1000.0
            return 10.0 ** (-alpha * path_km / 20.0)

        if s.kind == MZI:
            taps.append(Tap(s.sensor_id, "ref", tau0, base * path_amp(0.0), 0))
            taps.append(
                Tap(s.sensor_id, "arm", tau0 + tau_step, base * path_amp(s.imbalance) * arm_amp, 1)
            )
        else:
            for m in range(s.ring_taps):
                amp = base * path_amp(m * s.imbalance) * (s.loop_gain * arm_amp) ** m
                taps.append(Tap(s.sensor_id, f"pass{m}", tau0 + m * tau_step, amp, m))
        through_in *= 1.0 - s.input_tap
        through_out *= 1.0 - s.output_tap
    return taps


def synthesize_waveform(code: LegendreCode, oversampling: int = DEFAULT_OVERSAMPLING) -> np.ndarray:
    """Rectangular chip shaping: each chip repeated ``oversampling`` times."""
    if oversampling < 1:
        raise ValueError("oversampling must be >= 1")
    return np.repeat(code.chips, oversampling).astype(np.complex128)


def laser_phase_path(linewidth: float, n_samples: int, dt: float, seed=None) -> np.ndarray:
    """Wiener phase walk: increments are N(0, 2*pi*linewidth*dt), theta[0] = 0.

    ``seed`` may be an int or a numpy Generator; the path is deterministic
    per seed.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    if linewidth == 0.0:
        return np.zeros(n_samples)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    steps = rng.normal(0.0, math.sqrt(2.0 * math.pi * linewidth * dt), n_samples - 1)
    theta = np.empty(n_samples)
    theta[0] = 0.0
    np.cumsum(steps, out=theta[1:])
    return theta


def simulate_capture(
    taps: list[Tap],
    waveform: np.ndarray,
    excitations: list[Excitation],
    noise: NoiseModel,
    duration: float,
    *,
    oversampling: int,
    chip_duration: float,
    start_time: float = 0.0,
    phase_sampling: str = PHASE_PER_PERIOD,
    scenario_digest: str = "",
) -> RawCapture:
    """Detect the ladder response to the cyclic waveform over ``duration``.

    Transmission is continuous, so delayed copies wrap cyclically.  The
    sensor phase is quasi-static by default: it is sampled once per code
    period (the acoustic tones move over hundreds of microseconds, the
    period lasts eighty), so each correlation trace sees one frozen phase.
    ``phase_sampling="sample"`` switches to per-sample evaluation, which
    additionally models the intra-period modulation smear.

    The laser term theta(t) - theta(t - tau) always uses the full round-trip
    delay of a tap, which is what degrades distant sensors first.
    """
    if phase_sampling not in (PHASE_PER_PERIOD, PHASE_PER_SAMPLE):
        raise ValueError(f"unknown phase_sampling {phase_sampling!r}")
    fs = oversampling / chip_duration
    period = len(waveform)
    n_samples = int(round(duration * fs))
    if n_samples < period:
        raise ValueError(
            f"duration {duration} s is shorter than one code period "
            f"({period / fs} s)"
        )
    exc_map: dict[str, Excitation] = {}
    for e in excitations:
        if e.sensor_id in exc_map:
            raise ValueError(f"duplicate excitation for sensor {e.sensor_id!r}")
        exc_map[e.sensor_id] = e
    known = {t.sensor_id for t in taps}
    unknown = set(exc_map) - known
    if unknown:
        raise ValueError(f"excitation references unknown sensor(s): {sorted(unknown)}")

    ss = np.random.SeedSequence(noise.seed if noise.seed is not None else None)
    laser_rng, laser_back_rng, rx_rng = (np.random.default_rng(c) for c in ss.spawn(3))

    delays = [int(round(t.delay * fs)) for t in taps]
    d_max = max(delays, default=0)
    theta = None
    if noise.laser_linewidth > 0.0:
        # theta is anchored at t = 0 and extended backward from a separate
        # stream, so theta(t) does not depend on the largest delay present
        # and captures superpose tap-by-tap.
        fwd = laser_phase_path(noise.laser_linewidth, n_samples, 1.0 / fs, laser_rng)
        if d_max:
            step = math.sqrt(2.0 * math.pi * noise.laser_linewidth / fs)
            back_steps = laser_back_rng.normal(0.0, step, d_max)
            back = -np.cumsum(back_steps)[::-1]
            theta = np.concatenate([back, fwd])
        else:
            theta = fwd

    # Periodic extension long enough that any cyclic shift is a plain slice.
    reps = n_samples // period + 2
    extended = np.tile(waveform, reps)

    n_periods_ceil = -(-n_samples // period)
    tau_p = period / fs
    period_times = start_time + np.arange(n_periods_ceil) * tau_p
    sample_times = None
    if phase_sampling == PHASE_PER_SAMPLE and exc_map:
        sample_times = start_time + np.arange(n_samples) / fs

    out = np.zeros(n_samples, dtype=np.complex128)
    for tap, d in zip(taps, delays):
        offset = period - (d % period)
        sig = tap.amplitude * extended[offset : offset + n_samples]
        phase = None
        if theta is not None:
            phase = theta[d_max : d_max + n_samples] - theta[d_max - d : d_max - d + n_samples]
        exc = exc_map.get(tap.sensor_id)
        if exc is not None and tap.phase_mult:
            if phase_sampling == PHASE_PER_PERIOD:
                per_period = exc.amplitude * np.sin(
                    2.0 * math.pi * exc.frequency * period_times + exc.phase
                )
                tone = np.repeat(per_period, period)[:n_samples]
            else:
                tone = exc.amplitude * np.sin(
                    2.0 * math.pi * exc.frequency * sample_times + exc.phase
                )
            phase = tap.phase_mult * tone if phase is None else phase + tap.phase_mult * tone
        out += sig if phase is None else sig * np.exp(1j * phase)

    if noise.receiver_noise_sigma > 0.0:
        scale = noise.receiver_noise_sigma / math.sqrt(2.0)
        out += scale * (rx_rng.standard_normal(n_samples) + 1j * rx_rng.standard_normal(n_samples))

    return RawCapture(
        samples=out,
        sample_rate=fs,
        oversampling=oversampling,
        start_time=start_time,
        seed=noise.seed,
        scenario_digest=scenario_digest,
    )


# --- capture files: small header + interleaved float32 I/Q ---

_MAGIC = b"PPADAS\x00\x01"
_HEADER = struct.Struct("<8sdIQdqB16s")


def save_capture(path, capture: RawCapture) -> None:
    digest = capture.scenario_digest[:16].encode().ljust(16, b"\x00")
    header = _HEADER.pack(
        _MAGIC,
        capture.sample_rate,
        capture.oversampling,
        len(capture.samples),
        capture.start_time,
        capture.seed if capture.seed is not None else 0,
        1 if capture.seed is not None else 0,
        digest,
    )
    iq = np.empty(2 * len(capture.samples), dtype=np.float32)
    iq[0::2] = capture.samples.real
    iq[1::2] = capture.samples.imag
    with open(path, "wb") as fh:
        fh.write(header)
        iq.tofile(fh)


def load_capture(path) -> RawCapture:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError(f"{path}: truncated capture header")
        magic, fs, ovs, n, t0, seed, has_seed, digest = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a capture file")
        iq = np.fromfile(fh, dtype=np.float32, count=2 * n)
    if len(iq) != 2 * n:
        raise ValueError(f"{path}: truncated capture payload")
    samples = iq[0::2].astype(np.float64) + 1j * iq[1::2].astype(np.float64)
    return RawCapture(
        samples=samples,
        sample_rate=fs,
        oversampling=ovs,
        start_time=t0,
        seed=seed if has_seed else None,
        scenario_digest=digest.rstrip(b"\x00").decode(),
    )


def save_capture_csv(path, capture: RawCapture) -> None:
    """Plain-text export for short captures: time_s,i,q."""
    with open(path, "w") as fh:
        fh.write("time_s,i,q\n")
        t = capture.start_time + np.arange(len(capture.samples)) / capture.sample_rate
        for tk, z in zip(t, capture.samples):
            fh.write(f"{tk!r},{z.real!r},{z.imag!r}\n")
