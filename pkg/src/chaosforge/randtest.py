"""A three-test slice of the standard statistical randomness battery.

Monobit frequency, block frequency, and the runs test, each returning a
TestReport with the raw statistic and p-value.  A stream passes a test at
the conventional significance level ALPHA = 0.01.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooShortError
from .special import erfc, gamma_q

__all__ = [
    "ALPHA",
    "TestReport",
    "monobit",
    "block_frequency",
    "runs_test",
    "run_all",
]

ALPHA = 0.01
MIN_BITS = 100


@dataclass
class TestReport:
    test_name: str
    n: int
    statistic: float
    p_value: float
    passed: bool
    applicable: bool = True
    note: str = ""

    def as_dict(self):
        return {
            "test": self.test_name,
            "n": self.n,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "pass": self.passed,
            "applicable": self.applicable,
            "note": self.note,
        }


def _as_bits(bits):
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D bit array")
    if arr.size and arr.max() > 1:
        raise ValueError("bit values must be 0 or 1")
    return arr


def monobit(bits):
    """Frequency test: S = sum(2b - 1), p = erfc(|S| / sqrt(2n))."""
    arr = _as_bits(bits)
    n = arr.size
    if n < MIN_BITS:
        raise TooShortError(f"monobit needs >= {MIN_BITS} bits, got {n}")
    s = 2.0 * int(np.count_nonzero(arr)) - n
    p = erfc(abs(s) / math.sqrt(2.0 * n))
    return TestReport(
        test_name="monobit",
        n=n,
        statistic=s,
        p_value=p,
        passed=p >= ALPHA,
    )


def block_frequency(bits, block_size=128):
    """Block frequency test with chi^2 = 4 M sum (pi_i - 1/2)^2."""
    arr = _as_bits(bits)
    n = arr.size
    if block_size < 20:
        raise ValueError("block_size must be >= 20")
    if n < block_size:
        raise TooShortError(
            f"block_frequency needs >= {block_size} bits, got {n}"
        )
    n_blocks = n // block_size
    blocks = arr[: n_blocks * block_size].reshape(n_blocks, block_size)
    pi = blocks.mean(axis=1, dtype=np.float64)
    chi2 = 4.0 * block_size * float(np.sum((pi - 0.5) ** 2))
    p = gamma_q(n_blocks / 2.0, chi2 / 2.0)
    return TestReport(
        test_name="block_frequency",
        n=n,
        statistic=chi2,
        p_value=p,
        passed=p >= ALPHA,
    )


def runs_test(bits):
    """Runs test: V = 1 + #transitions, gated on the monobit prerequisite.

    When the ones fraction deviates from 1/2 by 2/sqrt(n) or more the test
    is reported as not applicable with p = 0 (the stream already failed the
    frequency prerequisite).
    """
    arr = _as_bits(bits)
    n = arr.size
    if n < MIN_BITS:
        raise TooShortError(f"runs_test needs >= {MIN_BITS} bits, got {n}")
    pi = float(np.count_nonzero(arr)) / n
    if abs(pi - 0.5) >= 2.0 / math.sqrt(n):
        return TestReport(
            test_name="runs",
            n=n,
            statistic=0.0,
            p_value=0.0,
            passed=False,
            applicable=False,
            note="monobit prerequisite failed",
        )
    v = 1 + int(np.count_nonzero(np.diff(arr)))
    num = abs(v - 2.0 * n * pi * (1.0 - pi))
    den = 2.0 * math.sqrt(2.0 * n) * pi * (1.0 - pi)
    p = erfc(num / den)
    return TestReport(
        test_name="runs",
        n=n,
        statistic=float(v),
        p_value=p,
        passed=p >= ALPHA,
    )


def run_all(bits, block_size=128):
    """All three tests in battery order."""
    return [monobit(bits), block_frequency(bits, block_size), runs_test(bits)]
