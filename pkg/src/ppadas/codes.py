"""Quadratic-residue codes with perfect periodic correlation.

A bipolar sequence of prime length n with n = 3 (mod 4), built from the
quadratic residues mod n, has the two-level periodic autocorrelation
{n, -1, ..., -1}.  Correlating it against the unipolar reference
``chips + 1`` (values {0, 2}) shifts every off-peak lag to exactly zero:
the sidelobes vanish in integer arithmetic, not merely below a float
threshold.  That mismatched reference is what the decoder uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft


class CodeLengthError(ValueError):
    """Length cannot host a quadratic-residue code (not prime or not 4k-1)."""


def _is_prime(n: int) -> bool:
    # Deterministic trial division; code lengths of interest stay far below 1e6.
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def is_valid_length(n: int) -> bool:
    """True iff ``n`` is a prime of the form 4k - 1."""
    return n >= 3 and n % 4 == 3 and _is_prime(n)


def valid_lengths(n_min: int, n_max: int) -> list[int]:
    """All usable code lengths in the closed interval [n_min, n_max]."""
    return [n for n in range(max(3, n_min), n_max + 1) if is_valid_length(n)]


@dataclass(frozen=True)
class LegendreCode:
    """Bipolar chip sequence plus its timing.

    ``chips`` holds +-1 (int8): chips[0] = +1 and chips[k] = +1 exactly when
    k is a quadratic residue mod n.  The sequence sum is +1, which is what
    makes the {0, 2} reference sidelobe-free.
    """

    n: int
    chips: np.ndarray
    chip_duration: float = 20e-9

    def __post_init__(self):
        if len(self.chips) != self.n:
            raise ValueError(f"chips length {len(self.chips)} != n {self.n}")
        if self.chip_duration <= 0:
            raise ValueError("chip_duration must be positive")

    @property
    def period_duration(self) -> float:
        """One code period in seconds (tau_p)."""
        return self.n * self.chip_duration

    @property
    def scan_rate(self) -> float:
        """Independent readouts per second, 1 / tau_p."""
        return 1.0 / self.period_duration


@dataclass(frozen=True)
class ReferenceCode:
    """Unipolar correlation reference, taps = chips + 1 (values {0, 2})."""

    n: int
    taps: np.ndarray


def legendre_sequence(n: int, chip_duration: float = 20e-9) -> LegendreCode:
    """Build the quadratic-residue code of length ``n``.

    Raises CodeLengthError unless ``n`` is prime with n = 3 (mod 4).
    """
    if not is_valid_length(n):
        raise CodeLengthError(f"{n} is not a prime of the form 4k - 1")
    residues = np.zeros(n, dtype=bool)
    for x in range(1, (n - 1) // 2 + 1):
        residues[(x * x) % n] = True
    chips = np.where(residues, 1, -1).astype(np.int8)
    chips[0] = 1
    return LegendreCode(n=n, chips=chips, chip_duration=chip_duration)


def perfect_reference(code: LegendreCode) -> ReferenceCode:
    """Zero-sidelobe reference for ``code``: taps = chips + 1.

    Cross-correlating chips against these taps gives n + 1 at zero lag and
    exactly 0 everywhere else, because the off-peak lags equal the bipolar
    autocorrelation (-1) plus the sequence sum (+1).
    """
    return ReferenceCode(n=code.n, taps=(code.chips.astype(np.int16) + 1).astype(np.int8))


def periodic_correlation_naive(a, b) -> np.ndarray:
    """Direct-sum circular correlation: out[m] = sum_k a[(k+m) mod n] * conj(b[k]).

    O(n^2) but exact on integer inputs; serves as the independent oracle for
    the transform-based path.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    # Narrow integer chips would overflow the same-dtype accumulator.
    if np.issubdtype(a.dtype, np.integer):
        a = a.astype(np.int64)
    if np.issubdtype(b.dtype, np.integer):
        b = b.astype(np.int64)
    bc = np.conj(b)
    return np.array([np.dot(np.roll(a, -m), bc) for m in range(len(a))])


def periodic_correlation_fast(a, b) -> np.ndarray:
    """Circular correlation via forward/inverse FFT.

    Same lag convention as the naive sum.  Real inputs give a real result;
    integer-valued inputs round-trip exactly after rounding.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    out = _fft.ifft(_fft.fft(a) * np.conj(_fft.fft(b)))
    if not np.iscomplexobj(a) and not np.iscomplexobj(b):
        return out.real
    return out


def peak_to_sidelobe(corr, exact_threshold: float = 1e-9) -> float:
    """Peak magnitude over the largest off-peak magnitude.

    Returns ``math.inf`` when every sidelobe falls below
    ``exact_threshold * peak`` -- that cutoff separates genuinely
    sidelobe-free references from float round-off dust.
    """
    v = np.abs(np.asarray(corr))
    if v.size < 2:
        raise ValueError("need at least 2 lags")
    peak_idx = int(np.argmax(v))
    peak = v[peak_idx]
    if peak == 0.0:
        raise ValueError("degenerate correlation: all values are zero")
    side = np.max(np.delete(v, peak_idx))
    if side < exact_threshold * peak:
        return math.inf
    return float(peak / side)


def write_chips_text(path, chips) -> None:
    """One chip value per line, plain text."""
    with open(path, "w") as fh:
        for c in np.asarray(chips):
            fh.write(f"{int(c)}\n")


def write_chips_binary(path, chips) -> None:
    """Signed 8-bit binary, one byte per chip."""
    np.asarray(chips, dtype=np.int8).tofile(path)


def read_chips_text(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int8, ndmin=1)


def read_chips_binary(path) -> np.ndarray:
    return np.fromfile(path, dtype=np.int8)
