import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ppadas import codes

VALID_SMALL = [n for n in range(3, 522) if codes.is_valid_length(n)]


class TestValidLength:
    def test_reference_values(self):
        assert codes.is_valid_length(4003)
        assert codes.is_valid_length(7)
        assert codes.is_valid_length(3)
        assert not codes.is_valid_length(5)       # 5 = 1 mod 4
        assert not codes.is_valid_length(15)      # 15 = 3 mod 4 but composite
        assert not codes.is_valid_length(2)
        assert not codes.is_valid_length(4)

    @given(st.integers(min_value=3, max_value=5000))
    @settings(max_examples=300)
    def test_against_sympy(self, n):
        assert codes.is_valid_length(n) == (sympy.isprime(n) and n % 4 == 3)

    def test_valid_lengths_range(self):
        assert codes.valid_lengths(3, 23) == [3, 7, 11, 19, 23]


class TestLegendreSequence:
    def test_n7(self):
        code = codes.legendre_sequence(7)
        assert code.chips.tolist() == [1, 1, 1, -1, 1, -1, -1]

    def test_n3(self):
        assert codes.legendre_sequence(3).chips.tolist() == [1, 1, -1]

    def test_invalid_length_raises(self):
        with pytest.raises(codes.CodeLengthError):
            codes.legendre_sequence(5)
        with pytest.raises(codes.CodeLengthError):
            codes.legendre_sequence(15)

    def test_n4003_counts(self):
        code = codes.legendre_sequence(4003)
        chips = code.chips.astype(np.int64)
        assert chips[0] == 1
        assert chips.sum() == 1
        assert np.count_nonzero(chips[1:] == 1) == (4003 - 1) // 2
        assert code.period_duration == pytest.approx(80.06e-6)

    def test_deterministic(self):
        a = codes.legendre_sequence(103).chips
        b = codes.legendre_sequence(103).chips
        assert a.tobytes() == b.tobytes()

    @pytest.mark.parametrize("n", [3, 7, 11, 19, 103])
    def test_quadratic_residue_rule(self, n):
        chips = codes.legendre_sequence(n).chips
        residues = {(x * x) % n for x in range(1, n)}
        for k in range(1, n):
            assert chips[k] == (1 if k in residues else -1)


class TestPerfectReference:
    def test_elementwise(self):
        code = codes.legendre_sequence(3)
        assert codes.perfect_reference(code).taps.tolist() == [2, 2, 0]

    def test_n7_crosscorrelation(self):
        code = codes.legendre_sequence(7)
        ref = codes.perfect_reference(code)
        cc = codes.periodic_correlation_naive(code.chips, ref.taps)
        assert cc.tolist() == [8, 0, 0, 0, 0, 0, 0]

    def test_n4003_exact(self):
        code = codes.legendre_sequence(4003)
        ref = codes.perfect_reference(code)
        cc = codes.periodic_correlation_naive(code.chips, ref.taps)
        assert cc[0] == 4004
        assert not np.any(cc[1:])

    @pytest.mark.parametrize("n", VALID_SMALL[:12])
    def test_two_level_autocorrelation(self, n):
        chips = codes.legendre_sequence(n).chips
        ac = codes.periodic_correlation_naive(chips, chips)
        assert ac[0] == n
        assert np.all(ac[1:] == -1)


class TestPeriodicCorrelation:
    def test_constant_sequence(self):
        assert codes.periodic_correlation_naive([1, 1, 1], [1, 1, 1]).tolist() == [3, 3, 3]

    def test_lag_convention(self):
        # out[m] = sum_k a[(k+m) mod n] conj(b[k]), frozen by hand for n=2
        out = codes.periodic_correlation_naive([1, 0], [0, 1j])
        assert out.tolist() == [0, -1j]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            codes.periodic_correlation_naive([1, 2], [1, 2, 3])
        with pytest.raises(ValueError):
            codes.periodic_correlation_fast([1, 2], [1, 2, 3])

    def test_int8_inputs_do_not_overflow(self):
        chips = codes.legendre_sequence(251).chips  # stored int8
        ac = codes.periodic_correlation_naive(chips, chips)
        assert ac[0] == 251

    def test_fast_zero_vector(self):
        out = codes.periodic_correlation_fast(np.zeros(16, complex), np.zeros(16, complex))
        assert np.all(out == 0)

    def test_fast_real_inputs_give_real_output(self):
        out = codes.periodic_correlation_fast([1.0, 2.0, 3.0], [0.5, 0.0, 1.0])
        assert not np.iscomplexobj(out)

    @given(
        n=st.integers(min_value=3, max_value=128),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_fast_matches_naive(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        naive = codes.periodic_correlation_naive(a, b)
        fast = codes.periodic_correlation_fast(a, b)
        assert np.max(np.abs(fast - naive)) < 1e-9 * np.linalg.norm(naive)

    def test_fast_integer_roundtrip(self):
        code = codes.legendre_sequence(103)
        ref = codes.perfect_reference(code)
        fast = codes.periodic_correlation_fast(
            code.chips.astype(float), ref.taps.astype(float)
        )
        assert np.rint(fast).astype(int).tolist() == \
            codes.periodic_correlation_naive(code.chips, ref.taps).tolist()


class TestPeakToSidelobe:
    def test_infinite_for_perfect(self):
        assert codes.peak_to_sidelobe([8, 0, 0, 0, 0, 0, 0]) == math.inf

    def test_bipolar_matched(self):
        assert codes.peak_to_sidelobe([7, -1, -1, -1, -1, -1, -1]) == pytest.approx(7.0)

    def test_flat(self):
        assert codes.peak_to_sidelobe([3, 3, 3]) == pytest.approx(1.0)

    def test_all_zero_raises(self):
        with pytest.raises(ValueError):
            codes.peak_to_sidelobe([0.0, 0.0, 0.0])

    def test_too_short_raises(self):
        with pytest.raises(ValueError):
            codes.peak_to_sidelobe([1.0])

    def test_float_dust_counts_as_infinite(self):
        corr = np.array([1e6, 1e-6, -1e-6])
        assert codes.peak_to_sidelobe(corr) == math.inf


class TestExport:
    def test_text_roundtrip(self, tmp_path):
        chips = codes.legendre_sequence(19).chips
        path = tmp_path / "chips.txt"
        codes.write_chips_text(path, chips)
        assert codes.read_chips_text(path).tolist() == chips.tolist()
        assert path.read_text().splitlines()[0] == "1"

    def test_binary_roundtrip(self, tmp_path):
        code = codes.legendre_sequence(19)
        taps = codes.perfect_reference(code).taps
        path = tmp_path / "taps.bin"
        codes.write_chips_binary(path, taps)
        assert path.stat().st_size == 19
        assert codes.read_chips_binary(path).tolist() == taps.tolist()
