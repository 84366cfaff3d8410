"""Code-multiplexed quasi-distributed fiber acoustic sensing toolkit.

Design sidelobe-free interrogation codes, check sensor layouts against the
wrap-around non-overlap rule, synthesize coherent baseband captures of a
ladder of interferometric sensors, and decode them back to per-sensor
phase spectra.
"""

from .codes import (
    LegendreCode,
    ReferenceCode,
    is_valid_length,
    legendre_sequence,
    peak_to_sidelobe,
    perfect_reference,
    periodic_correlation_fast,
    periodic_correlation_naive,
)
from .fibersim import (
    Excitation,
    NoiseModel,
    RawCapture,
    Tap,
    build_taps,
    laser_phase_path,
    simulate_capture,
    synthesize_waveform,
)
from .planner import (
    FeasibilityReport,
    LadderScenario,
    ResidueSet,
    SensorElement,
    check_separation,
    equalize_couplers,
    max_sensor_bound,
    roundtrip_delays,
    search_code_length,
)

__version__ = "0.1.0"
