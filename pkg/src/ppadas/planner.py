"""Layout feasibility under the wrap-around non-overlap rule.

Interrogating with a cyclic code whose period tau_p is shorter than the
longest round trip folds every reflection into [0, tau_p).  A layout is
usable when all folded delays (residues) keep a circular distance greater
than the minimum separation delta -- peaks near 0 and near tau_p are
physically adjacent in the folded trace, so the distance is circular.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

from .codes import LegendreCode, is_valid_length

MZI = "mzi"
RING = "ring"

DEFAULT_GROUP_VELOCITY = 2.0e8  # m/s in fiber
DEFAULT_MIN_SEPARATION = 250e-9  # s
DEFAULT_RING_TAPS = 6
DEFAULT_LOOP_GAIN = 0.5  # amplitude per ring pass; 6 modeled passes put the
                         # 5th below a ~20 dB correlation noise floor


@dataclass
class SensorElement:
    """One ladder stage: an imbalanced interferometer or a fiber ring.

    ``position`` is the one-way bus distance in meters; ``imbalance`` is the
    interferometer path difference or the ring circumference (meters).  Tap
    ratios are power fractions of the bus couplers.  ``arm_loss_db`` and
    ``arm_phase`` sit on the sensing arm (per pass, for rings) and stand in
    for insertion/polarization losses and static carrier phase.
    """

    sensor_id: str
    kind: str
    position: float
    imbalance: float
    input_tap: float = 1.0
    output_tap: float = 1.0
    ring_taps: int = DEFAULT_RING_TAPS
    loop_gain: float = DEFAULT_LOOP_GAIN
    arm_loss_db: float = 0.0
    arm_phase: float = 0.0

    def __post_init__(self):
        if self.kind not in (MZI, RING):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.position < 0:
            raise ValueError("position must be >= 0")
        if self.imbalance <= 0:
            raise ValueError("imbalance must be > 0")
        for name, ratio in (("input_tap", self.input_tap), ("output_tap", self.output_tap)):
            if not 0.0 < ratio <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {ratio}")
        if self.kind == RING and self.ring_taps < 2:
            raise ValueError("a ring needs at least 2 modeled passes")

    @property
    def n_peaks(self) -> int:
        return 2 if self.kind == MZI else self.ring_taps


@dataclass
class LadderScenario:
    """Sensor geometry plus the fiber and code constants it is read with."""

    sensors: list[SensorElement]
    group_velocity: float = DEFAULT_GROUP_VELOCITY
    fiber_attenuation_db_per_km: float = 0.2
    code: LegendreCode | None = None

    def __post_init__(self):
        if self.group_velocity <= 0:
            raise ValueError("group_velocity must be positive")
        pos = [s.position for s in self.sensors]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("sensor positions must be strictly increasing")
        ids = [s.sensor_id for s in self.sensors]
        if len(set(ids)) != len(ids):
            raise ValueError("sensor ids must be unique")

    def with_code(self, code: LegendreCode) -> "LadderScenario":
        return replace(self, code=code)

    def fingerprint(self) -> str:
        """Stable digest of the scenario for capture metadata."""
        parts = [f"v={self.group_velocity!r};att={self.fiber_attenuation_db_per_km!r}"]
        if self.code is not None:
            parts.append(f"n={self.code.n};chip={self.code.chip_duration!r}")
        for s in self.sensors:
            parts.append(
                f"{s.sensor_id}:{s.kind}:{s.position!r}:{s.imbalance!r}:"
                f"{s.input_tap!r}:{s.output_tap!r}:{s.ring_taps}:{s.loop_gain!r}:"
                f"{s.arm_loss_db!r}:{s.arm_phase!r}"
            )
        return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class PeakDelay:
    """One reflection: its sensor, which pass/arm produced it, and when."""

    sensor_id: str
    peak_id: str
    delay: float     # full round-trip, seconds
    residue: float   # delay mod tau_p, seconds


@dataclass
class ResidueSet:
    period: float
    peaks: list[PeakDelay]

    @property
    def residues(self) -> list[float]:
        return [p.residue for p in self.peaks]


@dataclass
class FeasibilityReport:
    feasible: bool
    min_circular_gap: float
    violating_pair: tuple[str, str] | None = None


def element_delays(
    sensors: list[SensorElement], group_velocity: float = DEFAULT_GROUP_VELOCITY
) -> list[tuple[str, str, float]]:
    """(sensor_id, peak_id, round-trip delay) for every reflection.

    An interferometer at one-way distance z reflects at 2z/v and at
    2z/v + imbalance/v; a ring adds one imbalance/v step per modeled pass.
    """
    out = []
    for s in sensors:
        base = 2.0 * s.position / group_velocity
        step = s.imbalance / group_velocity
        if s.kind == MZI:
            out.append((s.sensor_id, "ref", base))
            out.append((s.sensor_id, "arm", base + step))
        else:
            for m in range(s.ring_taps):
                out.append((s.sensor_id, f"pass{m}", base + m * step))
    return out


def roundtrip_delays(scenario: LadderScenario) -> ResidueSet:
    """Fold every reflection delay into [0, tau_p)."""
    if scenario.code is None:
        raise ValueError("scenario has no code attached; residues need tau_p")
    tau_p = scenario.code.period_duration
    peaks = [
        PeakDelay(sid, pid, delay, delay % tau_p)
        for sid, pid, delay in element_delays(scenario.sensors, scenario.group_velocity)
    ]
    return ResidueSet(period=tau_p, peaks=peaks)


def check_separation(residues: ResidueSet, delta: float = DEFAULT_MIN_SEPARATION) -> FeasibilityReport:
    """Smallest circular distance between any two residues, compared to delta.

    Sorting makes the minimum gap the smallest adjacent difference (plus the
    wrap-around gap); an O(P^2) pair scan gives the same answer and is kept
    as the test oracle.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    peaks = residues.peaks
    if len(peaks) < 2:
        return FeasibilityReport(feasible=True, min_circular_gap=residues.period)
    order = sorted(range(len(peaks)), key=lambda i: peaks[i].residue)
    best_gap = math.inf
    best_pair = None
    for i in range(len(order)):
        a = peaks[order[i]]
        b = peaks[order[(i + 1) % len(order)]]
        # Cyclically adjacent after sorting; the wrap-around pair comes out as
        # a negative difference that the modulo folds back into [0, period).
        gap = (b.residue - a.residue) % residues.period
        if gap < best_gap:
            best_gap = gap
            best_pair = (
                f"{a.sensor_id}/{a.peak_id}",
                f"{b.sensor_id}/{b.peak_id}",
            )
    feasible = best_gap > delta
    return FeasibilityReport(
        feasible=feasible,
        min_circular_gap=float(best_gap),
        violating_pair=None if feasible else best_pair,
    )


def max_sensor_bound(tau_p: float, delta: float) -> int:
    """Capacity estimate floor(tau_p / delta)."""
    if tau_p <= 0 or delta <= 0:
        raise ValueError("tau_p and delta must be positive")
    return int(math.floor(tau_p / delta))


def search_code_length(
    sensors: list[SensorElement],
    chip_duration: float,
    delta: float,
    n_min: int,
    n_max: int,
    group_velocity: float = DEFAULT_GROUP_VELOCITY,
) -> list[int]:
    """Valid code lengths in [n_min, n_max] whose period keeps all residues apart.

    Exhaustive scan; an empty result just means no candidate works.
    """
    delays = element_delays(sensors, group_velocity)
    found = []
    for n in range(n_min, n_max + 1):
        if not is_valid_length(n):
            continue
        tau_p = n * chip_duration
        rs = ResidueSet(
            period=tau_p,
            peaks=[PeakDelay(sid, pid, d, d % tau_p) for sid, pid, d in delays],
        )
        if check_separation(rs, delta).feasible:
            found.append(n)
    return found


def equalize_couplers(n_sensors: int) -> list[float]:
    """Tap ratios 1/(n-j+1) so every stage draws the same 1/n of the bus power.

    The j-th coupler taps 1/(n-j+1) of what survives the first j-1 couplers;
    the product telescopes to exactly 1/n per stage, and the last stage takes
    the whole remaining bus (ratio 1).
    """
    if n_sensors < 1:
        raise ValueError("need at least one sensor")
    return [1.0 / (n_sensors - j) for j in range(n_sensors)]


def drive_powers(ratios: list[float]) -> list[float]:
    """One-way power fraction delivered to each stage for given tap ratios."""
    out = []
    through = 1.0
    for k in ratios:
        out.append(k * through)
        through *= 1.0 - k
    return out
