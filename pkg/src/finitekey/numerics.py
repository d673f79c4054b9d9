"""Scalar math used by the finite-key bounds.

Everything here is exact or log-domain: the security parameters we
manipulate (2^-163 and friends) underflow linear doubles, so failure
probabilities are carried as base-2 logarithms throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LOG2E = math.log2(math.e)

# Above this block length the binomial-volume sum switches from exact
# big-integer arithmetic to a log-domain float accumulation.
_EXACT_VOLUME_LIMIT = 10_000


@dataclass(frozen=True, order=True)
class LogProb:
    """A non-negative real carried as its base-2 logarithm.

    Values representing probabilities satisfy ``log2_value <= 0``;
    vacuous bounds (> 1) are representable on purpose so that callers
    can detect them instead of crashing in infeasible parameter regions.
    ``-inf`` encodes zero.
    """

    log2_value: float

    @classmethod
    def from_linear(cls, p: float) -> "LogProb":
        if p < 0:
            raise ValueError(f"negative probability {p}")
        return cls(math.log2(p)) if p > 0 else cls(float("-inf"))

    @property
    def linear(self) -> float:
        """Linear-scale value; underflows to 0.0 below ~2^-1074."""
        return 2.0 ** self.log2_value

    def __add__(self, other: "LogProb") -> "LogProb":
        a, b = self.log2_value, other.log2_value
        if a < b:
            a, b = b, a
        if b == float("-inf"):
            return LogProb(a)
        # a + log2(1 + 2^(b-a)); the correction term degrades gracefully
        # to 0 once b - a < -1074, so huge negative exponents never trap.
        return LogProb(a + math.log1p(2.0 ** (b - a)) / math.log(2))

    def __mul__(self, other: "LogProb") -> "LogProb":
        return LogProb(self.log2_value + other.log2_value)

    def scaled(self, factor: float) -> "LogProb":
        """Multiply the linear value by a positive constant."""
        if factor <= 0:
            raise ValueError("factor must be positive")
        return LogProb(self.log2_value + math.log2(factor))

    def decimal_sci(self) -> str:
        """Render as decimal scientific notation without underflow."""
        if self.log2_value == float("-inf"):
            return "0"
        d = self.log2_value * math.log10(2)
        exp = math.floor(d)
        mant = 10.0 ** (d - exp)
        if mant >= 9.99995:  # rounding pushed the mantissa over
            mant /= 10.0
            exp += 1
        return f"{mant:.4f}e{exp:+d}"


def binary_entropy(x: float) -> float:
    """Binary entropy h(x) = -x log2 x - (1-x) log2(1-x), h(0) = h(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _floor_exactish(v: float) -> int:
    """Floor with a tiny guard so that 20 * 0.35 == 7 does not floor to 6."""
    return math.floor(v + 1e-9)


def hamming_ball_log2(n: int, f: float) -> float:
    """log2 of the number of n-bit strings with relative weight <= f.

    Exact big-integer summation of binomial coefficients for n up to
    10^4, log-domain accumulation above.  Requires f <= 1/2, matching
    the regime where the 2^(n h(f)) entropy bound applies.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= f <= 0.5:
        raise ValueError(f"relative radius {f} outside [0, 1/2]")
    radius = _floor_exactish(n * f)
    if n <= _EXACT_VOLUME_LIMIT:
        total = 0
        term = 1
        for lam in range(radius + 1):
            total += term
            term = term * (n - lam) // (lam + 1)
        return math.log2(total)
    # Log-domain telescoping: track log2 of the running term.
    log_term = 0.0
    log_total = 0.0
    for lam in range(radius):
        log_term += math.log2(n - lam) - math.log2(lam + 1)
        hi, lo = max(log_total, log_term), min(log_total, log_term)
        log_total = hi + math.log1p(2.0 ** (lo - hi)) / math.log(2)
    return log_total


def serfling_tail(m: int, k: int, nu: float) -> LogProb:
    """Tail bound for sampling without replacement.

    For any fixed bit string of length m and a uniform k-subset, the
    probability that the unsampled part's error rate exceeds the
    sampled part's rate by nu is at most
    exp(-2 nu^2 n k^2 / ((n+k)(k+1))) with n = m - k, regardless of the
    string's distribution.
    """
    if k <= 0 or k >= m:
        raise ValueError(f"need 0 < k < m, got k={k}, m={m}")
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    n = m - k
    exponent = -2.0 * nu * nu * n * k * k / ((n + k) * (k + 1))
    return LogProb(exponent * LOG2E)
