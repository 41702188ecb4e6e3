import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaosforge import special
from chaosforge.errors import TooShortError
from chaosforge.randtest import (
    ALPHA,
    block_frequency,
    monobit,
    run_all,
    runs_test,
)

REFERENCE_BITS = np.random.default_rng(12345).integers(
    0, 2, size=1_000_000
).astype(np.uint8)


class TestSpecialFunctions:
    def test_erfc_against_mpmath_grid(self):
        mpmath = pytest.importorskip("mpmath")
        xs = np.concatenate([
            np.linspace(-6.0, 6.0, 121),
            np.array([1e-8, 1e-4, 7.0, 8.0, 10.0, 15.0, 20.0]),
        ])
        for x in xs:
            want = float(mpmath.erfc(mpmath.mpf(float(x))))
            got = special.erfc(float(x))
            err = abs(got - want) / max(abs(want), 1e-300)
            assert err < 1e-10, (x, got, want)

    def test_gamma_q_against_mpmath_grid(self):
        mpmath = pytest.importorskip("mpmath")
        # 10_000 covers block-frequency on multi-megabit streams
        for a in (0.5, 1.0, 2.5, 10.0, 64.0, 500.0, 4687.5, 10_000.0):
            for x in (0.0, 1e-6, 0.1, 0.5 * a, a, a + 1.0, 2.0 * a, 4.0 * a):
                want = float(mpmath.gammainc(mpmath.mpf(a), mpmath.mpf(x),
                                             mpmath.inf, regularized=True))
                got = special.gamma_q(a, float(x))
                err = abs(got - want) / max(abs(want), 1e-300)
                assert err < 1e-10, (a, x, got, want)

    def test_gamma_p_q_complementary(self):
        for a in (0.5, 3.0, 12.0):
            for x in (0.2, 1.0, 5.0, 30.0):
                total = special.gamma_p(a, x) + special.gamma_q(a, x)
                assert total == pytest.approx(1.0, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            special.gamma_q(0.0, 1.0)
        with pytest.raises(ValueError):
            special.gamma_q(1.0, -0.5)


class TestMonobit:
    def test_all_ones_fails_hard(self):
        rep = monobit(np.ones(100, dtype=np.uint8))
        assert rep.statistic == 100
        assert rep.p_value < 1e-20
        assert not rep.passed

    def test_perfect_alternation_passes_with_p_one(self):
        bits = np.tile([0, 1], 500).astype(np.uint8)
        rep = monobit(bits)
        assert rep.statistic == 0
        assert rep.p_value == 1.0
        assert rep.passed

    def test_reference_generator_passes(self):
        rep = monobit(REFERENCE_BITS)
        assert rep.p_value >= 0.01

    def test_too_short(self):
        with pytest.raises(TooShortError):
            monobit(np.ones(99, dtype=np.uint8))


class TestBlockFrequency:
    def test_all_ones_fails(self):
        rep = block_frequency(np.ones(10_000, dtype=np.uint8), 128)
        assert rep.p_value < 1e-10
        assert not rep.passed

    def test_half_ones_per_block_gives_p_one(self):
        block = np.array([0, 1] * 64, dtype=np.uint8)  # 128 bits, half ones
        bits = np.tile(block, 20)
        rep = block_frequency(bits, 128)
        assert rep.statistic == 0.0
        assert rep.p_value == 1.0

    def test_reference_generator_passes(self):
        rep = block_frequency(REFERENCE_BITS, 128)
        assert rep.p_value >= 0.01

    def test_minimum_block_size(self):
        with pytest.raises(ValueError):
            block_frequency(np.ones(1000, dtype=np.uint8), 19)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            block_frequency(np.ones(100, dtype=np.uint8), 128)


class TestRuns:
    def test_perfect_alternation_fails(self):
        bits = np.tile([0, 1], 5000).astype(np.uint8)
        rep = runs_test(bits)
        assert rep.applicable
        assert rep.statistic == bits.size  # a run boundary at every step
        assert rep.p_value < 1e-20
        assert not rep.passed

    def test_two_long_runs_fails(self):
        bits = np.concatenate([np.ones(50), np.zeros(50)]).astype(np.uint8)
        rep = runs_test(bits)
        assert rep.applicable  # pi == 1/2 exactly
        assert rep.statistic == 2
        assert not rep.passed

    def test_prerequisite_failure_reports_not_applicable(self):
        rep = runs_test(np.ones(1000, dtype=np.uint8))
        assert not rep.applicable
        assert rep.p_value == 0.0
        assert not rep.passed

    def test_reference_generator_passes(self):
        rep = runs_test(REFERENCE_BITS)
        assert rep.p_value >= 0.01

    def test_too_short(self):
        with pytest.raises(TooShortError):
            runs_test(np.ones(50, dtype=np.uint8))


class TestBattery:
    def test_run_all_order_and_purity(self):
        reports = run_all(REFERENCE_BITS[:10_000])
        assert [r.test_name for r in reports] == [
            "monobit", "block_frequency", "runs"]
        again = run_all(REFERENCE_BITS[:10_000])
        assert [(r.statistic, r.p_value) for r in reports] == \
            [(r.statistic, r.p_value) for r in again]

    @settings(deadline=None, max_examples=60)
    @given(st.binary(min_size=40, max_size=400))
    def test_p_values_always_in_unit_interval(self, blob):
        bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))
        for rep in run_all(bits, block_size=20):
            assert 0.0 <= rep.p_value <= 1.0
            assert rep.passed == (rep.p_value >= ALPHA)

    @settings(deadline=None, max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_biased_streams_still_bounded(self, seed):
        rng = np.random.default_rng(seed)
        bits = (rng.random(4096) < 0.9).astype(np.uint8)
        for rep in run_all(bits):
            assert 0.0 <= rep.p_value <= 1.0
