"""Sequences viewed through their decreasing rearrangement.

Ideal membership only sees the decreasing rearrangement ``x*`` of ``|x|``.
Every profile answers one question exactly: is ``x*_i > y``?  That is all a
dominance check against a step function needs, and it can be answered for
sequences whose individual terms are far too many to list.
"""

from __future__ import annotations

import math
import sys
from fractions import Fraction

from .dyadic import Dyadic, exact_log2
from .sequence import BlockSequence, RunSequence
from .transforms import Log2Value, _float_log2

__all__ = [
    "UndecidedComparison",
    "StepProfile",
    "GeometricMeanProfile",
    "CesaroProfile",
    "as_profile",
]

_EPS = sys.float_info.epsilon


class UndecidedComparison(ArithmeticError):
    """Floating log intervals overlap, so no exact verdict can be issued."""


def _as_fraction(y) -> Fraction:
    return y.fraction() if isinstance(y, Dyadic) else Fraction(y)


class StepProfile:
    """A decreasing BlockSequence; terms past its coverage are zero."""

    finite_support = True

    def __init__(self, seq: BlockSequence):
        self.seq = seq
        self.coverage = seq.coverage

    def rank_exceeds(self, i: int, y) -> bool:
        if i > self.coverage:
            return False
        return self.seq.value_at(i) > y

    def log2_scale_needed(self, i: int, y) -> int | float | None:
        """Least integer ``b`` with ``x*_i <= 2**b * y``; None if not exact."""
        if i > self.coverage:
            return -math.inf
        f, e = exact_log2(self.seq.value_at(i)), exact_log2(y)
        if f is None or e is None:
            return None
        return f - e

    def describe(self, i: int) -> str:
        return str(self.seq.value_at(i)) if i <= self.coverage else "0"


class GeometricMeanProfile:
    """``g_n = (s_1 ... s_n)**(1/n)`` of a positive decreasing sequence.

    ``g`` is itself decreasing, so ``x*_i = g_i``.  The underlying sequence is a
    truncation of an infinite one, hence ``finite_support`` is False and
    callers must not ask beyond ``coverage``.
    """

    finite_support = False

    def __init__(self, seq: BlockSequence):
        if any(v == 0 for v, _ in seq.runs):
            raise ValueError("geometric mean profile needs a strictly positive sequence")
        self.seq = seq
        self.coverage = seq.coverage
        self.exact = seq.log2_exponents is not None

    def log2_at(self, i: int) -> Log2Value:
        if self.exact:
            return Log2Value(Fraction(self.seq.log2_product(i), i), True)
        r = self.seq.run_index(i)
        total = 0.0
        mag = 0.0
        for j, (v, n) in enumerate(self.seq.runs[: r + 1]):
            cnt = n if j < r else i - self.seq.starts[r] + 1
            t = float(cnt) * _float_log2(v)
            total += t
            mag += abs(t)
        mean = total / i
        return Log2Value(mean, False, (r + 5) * _EPS * mag / i + 2 * _EPS * abs(mean))

    def rank_exceeds(self, i: int, y) -> bool:
        if i > self.coverage:
            raise IndexError(f"geometric mean unknown past index {self.coverage}")
        if y <= 0:
            return True
        e = exact_log2(y)
        if self.exact and e is not None:
            # P(i) / i > e  without forming the fraction
            return self.seq.log2_product(i) > e * i
        g = self.log2_at(i)
        if self.exact:
            # exact left side, irrational right side
            gv = self.seq.log2_product(i) / i  # correctly rounded int/int
            g = Log2Value(gv, False, 2 * _EPS * abs(gv) + 1e-300)
        fy = _as_fraction(y)
        ly = math.log2(fy.numerator) - math.log2(fy.denominator)
        ey = 4 * _EPS * (abs(math.log2(fy.numerator)) + abs(math.log2(fy.denominator)))
        if g.lo > ly + ey:
            return True
        if g.hi < ly - ey:
            return False
        raise UndecidedComparison(f"log2 g_{i} ~ {float(g.value)} vs log2 y ~ {ly}")

    def log2_scale_needed(self, i: int, y) -> int | None:
        """Least integer ``b`` with ``g_i <= 2**b * y``; None if not exact."""
        if i > self.coverage:
            raise IndexError(f"geometric mean unknown past index {self.coverage}")
        e = exact_log2(y)
        if not self.exact or e is None:
            return None
        # ceil((P(i) - e*i) / i) with one division of big integers
        return -((e * i - self.seq.log2_product(i)) // i)

    def describe(self, i: int) -> str:
        g = self.log2_at(i)
        return f"2^({g.value})" if g.exact else f"2^({g.value:.17g}±{g.error:.2g})"


def _count_linear(a: int, b: int, coef: Fraction, rhs: Fraction) -> int:
    """Number of integers j in [a, b] with ``coef * j < rhs``."""
    if b < a:
        return 0
    if coef == 0:
        return b - a + 1 if rhs > 0 else 0
    q = rhs / coef
    if coef > 0:
        # j < q
        hi = math.ceil(q) - 1
        hi = min(hi, b)
        return max(0, hi - a + 1)
    lo = math.floor(q) + 1
    lo = max(lo, a)
    return max(0, b - lo + 1)


class CesaroProfile:
    """``x_j = |w_1 + ... + w_j| / j`` for a signed run-length sequence ``w``.

    On a run of constant value ``L`` starting at ``a`` the partial sum is
    ``alpha + L*j`` with ``alpha = S_{a-1} - (a-1)*L``, so ``x_j > y`` is a pair
    of linear inequalities in ``j`` and counts are exact.
    """

    finite_support = True

    def __init__(self, w: RunSequence):
        self.w = w
        self.coverage = w.coverage
        self._pieces = []
        s = Fraction(0)
        for start, end, v in w.blocks():
            L = _as_fraction(v)
            alpha = s - (start - 1) * L
            self._pieces.append((start, end, alpha, L))
            s = s + (end - start + 1) * L

    @property
    def pieces(self):
        return list(self._pieces)

    def value(self, j: int) -> Fraction:
        """Exact ``|S_j| / j``."""
        for start, end, alpha, L in self._pieces:
            if start <= j <= end:
                return abs(alpha + L * j) / j
        raise IndexError(j)

    def count_above(self, y) -> int:
        y = _as_fraction(y)
        if y < 0:
            return self.coverage
        total = 0
        for start, end, alpha, L in self._pieces:
            # alpha + L j > y j   <=>  (y - L) j < alpha
            total += _count_linear(start, end, y - L, alpha)
            # alpha + L j < -y j  <=>  (y + L) j < -alpha
            total += _count_linear(start, end, y + L, -alpha)
        return total

    def rank_exceeds(self, i: int, y) -> bool:
        return self.count_above(y) >= i

    def describe(self, i: int) -> str:
        return f"count>{i - 1}"


def as_profile(x):
    if hasattr(x, "rank_exceeds"):
        return x
    if isinstance(x, BlockSequence):
        return StepProfile(x)
    raise TypeError(f"no decreasing profile for {type(x).__name__}")
