"""Exact transforms of run-length sequences."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .dyadic import Dyadic, to_exact
from .sequence import BlockSequence, CoverageError, RunSequence, SignedRuns

__all__ = [
    "Log2Value",
    "value_at",
    "partial_sum",
    "geometric_mean_transform",
    "cesaro_transform",
    "interleave",
    "scale",
    "dilate",
    "add_sequences",
]

_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class Log2Value:
    """``log2`` of a positive quantity.

    ``value`` is a Fraction when ``exact``; otherwise a float whose true value
    lies in ``[value - error, value + error]``.
    """

    value: Fraction | float
    exact: bool
    error: float = 0.0

    @property
    def lo(self) -> float | Fraction:
        return self.value if self.exact else self.value - self.error

    @property
    def hi(self) -> float | Fraction:
        return self.value if self.exact else self.value + self.error


def value_at(s: RunSequence, k: int):
    return s.value_at(k)


def partial_sum(s: RunSequence, k: int):
    if not 0 <= k <= s.coverage:
        raise CoverageError(f"index {k} outside 0..{s.coverage}")
    return s.partial_sum(k)


def _float_log2(v) -> float:
    if isinstance(v, Dyadic):
        return math.log2(v.mantissa) + v.exponent
    f = Fraction(v)
    return math.log2(f.numerator) - math.log2(f.denominator)


def geometric_mean_transform(s: BlockSequence, k: int) -> Log2Value:
    """``log2((s_1 ... s_k)**(1/k))``; exact when every run value is a power of 2."""
    if not 1 <= k <= s.coverage:
        raise CoverageError(f"index {k} outside 1..{s.coverage}")
    r = s.run_index(k)
    if any(v == 0 for v, _ in s.runs[: r + 1]):
        raise ValueError("zero term encountered in geometric mean")
    if s.log2_exponents is not None:
        return Log2Value(Fraction(s.log2_product(k), k), True)
    total = 0.0
    magnitude = 0.0
    for i, (v, n) in enumerate(s.runs[: r + 1]):
        count = n if i < r else k - s.starts[r] + 1
        term = float(count) * _float_log2(v)
        total += term
        magnitude += abs(term)
    # log2 and the count conversion each cost ~2 ulp, the running sum ~r+1 ulp
    err = (r + 5) * _EPS * magnitude / k
    mean = total / k
    return Log2Value(mean, False, err + 2 * _EPS * abs(mean))


def cesaro_transform(w: RunSequence | Sequence, k: int):
    """Exact ``(1/k) * sum_{j<=k} w_j``."""
    if not isinstance(w, RunSequence):
        w = SignedRuns.from_values(w)
    if not 1 <= k <= w.coverage:
        raise CoverageError(f"index {k} outside 1..{w.coverage}")
    return to_exact(Fraction(w.partial_sum(k)) / k)


def dilate(u: RunSequence, m: int) -> RunSequence:
    """``t_j = u_{ceil(j/m)}``: every run length multiplied by ``m``."""
    if m < 1:
        raise ValueError("dilation must be a positive integer")
    return type(u)((v, n * m) for v, n in u.runs)


def interleave(u: RunSequence) -> RunSequence:
    """``u (+) u = (u_1, u_1, u_2, u_2, ...)``."""
    return dilate(u, 2)


def scale(u: RunSequence, c) -> RunSequence:
    c = to_exact(c)
    if not c > 0:
        raise ValueError("scale must be positive")
    return type(u)((v * c, n) for v, n in u.runs)


def add_sequences(a: RunSequence, b: RunSequence) -> RunSequence:
    """Termwise sum over the common coverage."""
    end = min(a.coverage, b.coverage)
    cuts = sorted(
        {s for s in a.starts if s <= end} | {s for s in b.starts if s <= end} | {end + 1}
    )
    runs = []
    for lo, hi in zip(cuts, cuts[1:]):
        runs.append((a.value_at(lo) + b.value_at(lo), hi - lo))
    cls = BlockSequence if isinstance(a, BlockSequence) and isinstance(b, BlockSequence) else SignedRuns
    return cls(runs)
