"""Exact dyadic rationals ``mantissa * 2**exponent``.

Sums, products and comparisons never round.  Mixing with
:class:`fractions.Fraction` is supported and yields a ``Fraction`` (the
quotient of two dyadics is generally not dyadic).
"""

from __future__ import annotations

import numbers
from fractions import Fraction

__all__ = ["Dyadic", "to_exact", "exact_log2", "ExactValue"]


def _strip(mantissa: int, exponent: int) -> tuple[int, int]:
    if mantissa == 0:
        return 0, 0
    tz = (mantissa & -mantissa).bit_length() - 1
    return mantissa >> tz, exponent + tz


class Dyadic(numbers.Rational):
    """Canonical dyadic rational: mantissa odd, or the pair (0, 0)."""

    __slots__ = ("_m", "_e")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if not isinstance(mantissa, int) or not isinstance(exponent, int):
            raise TypeError("mantissa and exponent must be int")
        self._m, self._e = _strip(mantissa, exponent)

    # construction helpers -------------------------------------------------
    @classmethod
    def pow2(cls, e: int) -> "Dyadic":
        return cls(1, e)

    @classmethod
    def from_value(cls, x) -> "Dyadic":
        if isinstance(x, Dyadic):
            return x
        if isinstance(x, int):
            return cls(x, 0)
        if isinstance(x, float):
            x = Fraction(x)
        if isinstance(x, Fraction):
            d = x.denominator
            if d & (d - 1):
                raise ValueError(f"{x} is not dyadic")
            return cls(x.numerator, -(d.bit_length() - 1))
        raise TypeError(f"cannot convert {type(x).__name__} to Dyadic")

    @property
    def mantissa(self) -> int:
        return self._m

    @property
    def exponent(self) -> int:
        return self._e

    @property
    def numerator(self) -> int:
        return self._m << self._e if self._e >= 0 else self._m

    @property
    def denominator(self) -> int:
        return 1 if self._e >= 0 else 1 << -self._e

    def is_power_of_two(self) -> bool:
        return self._m == 1

    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.fraction() + other
            return NotImplemented
        if self._m == 0:
            return o
        if o._m == 0:
            return self
        e = min(self._e, o._e)
        return Dyadic((self._m << (self._e - e)) + (o._m << (o._e - e)), e)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self._m, self._e)

    def __pos__(self):
        return self

    def __abs__(self):
        return self if self._m >= 0 else -self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.fraction() - other
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, Fraction):
                return self.fraction() * other
            return NotImplemented
        return Dyadic(self._m * o._m, self._e + o._e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is not None and o._m != 0 and o._m in (1, -1):
            return Dyadic(self._m * o._m, self._e - o._e)
        if isinstance(other, (int, Dyadic, Fraction)):
            return self.fraction() / Fraction(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Fraction(other) / self.fraction()
        return NotImplemented

    def __floordiv__(self, other):
        return self.fraction() // Fraction(other)

    def __rfloordiv__(self, other):
        return Fraction(other) // self.fraction()

    def __mod__(self, other):
        return self.fraction() % Fraction(other)

    def __rmod__(self, other):
        return Fraction(other) % self.fraction()

    def __pow__(self, n):
        if isinstance(n, int) and n >= 0:
            return Dyadic(self._m**n, self._e * n)
        return self.fraction() ** n

    def __rpow__(self, base):
        return base ** self.fraction()

    def __trunc__(self):
        return int(self.fraction())

    def __floor__(self):
        return self.numerator // self.denominator

    def __ceil__(self):
        return -((-self.numerator) // self.denominator)

    def __round__(self, ndigits=None):
        return round(self.fraction(), ndigits)

    def __float__(self):
        return float(self.fraction())

    # comparison -----------------------------------------------------------
    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is not None:
            if self._m == 0 or o._m == 0 or (self._m > 0) != (o._m > 0):
                return (self._m > o._m) - (self._m < o._m)
            e = min(self._e, o._e)
            a, b = self._m << (self._e - e), o._m << (o._e - e)
            return (a > b) - (a < b)
        if isinstance(other, Fraction):
            # n/d vs p/q by cross multiplication, no gcd.
            lhs = self.numerator * other.denominator
            rhs = other.numerator * self.denominator
            return (lhs > rhs) - (lhs < rhs)
        if isinstance(other, float):
            return self._cmp(Fraction(other))
        raise TypeError(f"cannot compare Dyadic with {type(other).__name__}")

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash(self.fraction()) if self._e < 0 else hash(self.numerator)

    def __repr__(self):
        return f"Dyadic({self._m}, {self._e})"

    def __str__(self):
        if self._e == 0:
            return str(self._m)
        return f"{self._m}*2^{self._e}"


ExactValue = Dyadic | Fraction


def to_exact(x) -> Dyadic | Fraction:
    """Return ``x`` as a Dyadic when dyadic, otherwise as a Fraction."""
    if isinstance(x, Dyadic):
        return x
    f = Fraction(x)
    d = f.denominator
    if d & (d - 1) == 0:
        return Dyadic.from_value(f)
    return f


def exact_log2(x) -> int | None:
    """Integer log2 of ``x`` when it is a positive power of two, else None."""
    if isinstance(x, Dyadic):
        return x.exponent if x.mantissa == 1 else None
    f = Fraction(x)
    n, d = f.numerator, f.denominator
    if n <= 0:
        return None
    if n & (n - 1) == 0 and d & (d - 1) == 0:
        return (n.bit_length() - 1) - (d.bit_length() - 1)
    return None
