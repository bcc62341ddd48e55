"""Run-length encoded sequences indexed from 1.

A run is ``(value, length)``; lengths are Python ints and may be
astronomically large (indices near ``2**(2**25)`` occur), so nothing here
ever materialises a run term by term.
"""

from __future__ import annotations

import bisect
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .dyadic import Dyadic, exact_log2, to_exact

__all__ = [
    "RunSequence",
    "BlockSequence",
    "SignedRuns",
    "CoverageError",
    "SequenceInvariantError",
]


class CoverageError(IndexError):
    """Index outside the indices covered by a sequence."""


class SequenceInvariantError(ValueError):
    """Runs violate the type invariants (ordering, sign, positive lengths)."""


def _merge(runs: Iterable[tuple[object, int]]) -> list[tuple[Dyadic | Fraction, int]]:
    out: list[tuple[Dyadic | Fraction, int]] = []
    for value, length in runs:
        if not isinstance(length, int) or isinstance(length, bool):
            raise SequenceInvariantError(f"run length must be int, got {length!r}")
        if length <= 0:
            raise SequenceInvariantError(f"run length must be positive, got {length}")
        value = to_exact(value)
        if out and out[-1][0] == value:
            out[-1] = (value, out[-1][1] + length)
        else:
            out.append((value, length))
    return out


class RunSequence:
    """Finite run-length sequence of exact rationals, no ordering constraint."""

    __slots__ = ("_runs", "_starts", "__dict__")

    def __init__(self, runs: Iterable[tuple[object, int]]):
        merged = _merge(runs)
        if not merged:
            raise SequenceInvariantError("a sequence needs at least one run")
        self._check(merged)
        self._runs = tuple(merged)
        starts = []
        pos = 1
        for _, length in self._runs:
            starts.append(pos)
            pos += length
        self._starts = starts

    def _check(self, runs) -> None:
        pass

    # structure -------------------------------------------------------------
    @property
    def runs(self) -> tuple[tuple[Dyadic | Fraction, int], ...]:
        return self._runs

    @property
    def starts(self) -> list[int]:
        return self._starts

    @property
    def coverage(self) -> int:
        return self._starts[-1] + self._runs[-1][1] - 1

    def blocks(self) -> Iterator[tuple[int, int, Dyadic | Fraction]]:
        """Yield ``(start, end, value)`` for each run, 1-based inclusive."""
        for s, (v, n) in zip(self._starts, self._runs):
            yield s, s + n - 1, v

    def run_index(self, k: int) -> int:
        if not 1 <= k <= self.coverage:
            raise CoverageError(f"index {k} outside 1..{self.coverage}")
        return bisect.bisect_right(self._starts, k) - 1

    def value_at(self, k: int):
        return self._runs[self.run_index(k)][0]

    def __getitem__(self, k: int):
        return self.value_at(k)

    def values(self) -> list:
        """Expand to an explicit list; only for small coverage."""
        out = []
        for v, n in self._runs:
            out.extend([v] * n)
        return out

    # cumulative data ------------------------------------------------------
    @cached_property
    def _prefix(self) -> list:
        acc = Dyadic(0)
        out = [acc]
        for v, n in self._runs:
            acc = acc + v * n
            out.append(acc)
        return out

    def partial_sum(self, k: int):
        """Exact ``sum_{j<=k}`` of the terms; cost is O(log #runs)."""
        if k == 0:
            return Dyadic(0)
        r = self.run_index(k)
        v, _ = self._runs[r]
        return self._prefix[r] + v * (k - self._starts[r] + 1)

    def __eq__(self, other):
        if not isinstance(other, RunSequence):
            return NotImplemented
        return type(self) is type(other) and self._runs == other._runs

    def __hash__(self):
        return hash((type(self).__name__, self._runs))

    def __repr__(self):
        head = ", ".join(f"({v}, {_short(n)})" for v, n in self._runs[:4])
        more = ", ..." if len(self._runs) > 4 else ""
        return f"{type(self).__name__}([{head}{more}])"

    # constructors ----------------------------------------------------------
    @classmethod
    def from_values(cls, values: Iterable[object]):
        return cls((v, 1) for v in values)

    @classmethod
    def constant(cls, value, length: int):
        return cls([(value, length)])

    def truncate(self, k: int):
        """The first ``k`` terms."""
        if not 1 <= k <= self.coverage:
            raise CoverageError(f"cannot truncate to {k}")
        r = self.run_index(k)
        runs = list(self._runs[:r])
        runs.append((self._runs[r][0], k - self._starts[r] + 1))
        return type(self)(runs)


class BlockSequence(RunSequence):
    """Decreasing nonnegative run-length sequence (a singular-value profile)."""

    def _check(self, runs) -> None:
        prev = None
        for v, _ in runs:
            if v < 0:
                raise SequenceInvariantError(f"negative value {v}")
            if prev is not None and not v < prev:
                raise SequenceInvariantError("run values must strictly decrease")
            prev = v

    @cached_property
    def log2_exponents(self) -> list[int] | None:
        """Integer log2 of every run value, or None if some value is not 2**e."""
        out = []
        for v, _ in self._runs:
            e = exact_log2(v)
            if e is None:
                return None
            out.append(e)
        return out

    @cached_property
    def _log_prefix(self) -> list[int]:
        exps = self.log2_exponents
        if exps is None:
            raise ValueError("log2 prefix needs power-of-two run values")
        acc = 0
        out = [0]
        for e, (_, n) in zip(exps, self._runs):
            acc += e * n
            out.append(acc)
        return out

    def log2_product(self, k: int) -> int:
        """Exact ``log2(s_1 ... s_k)`` for power-of-two valued sequences."""
        if k == 0:
            return 0
        r = self.run_index(k)
        return self._log_prefix[r] + self.log2_exponents[r] * (k - self._starts[r] + 1)


class SignedRuns(RunSequence):
    """Run-length sequence of signed exact values (eigenvalue lists, w)."""


def _short(n: int) -> str:
    if n.bit_length() <= 64:
        return str(n)
    return f"~2^{n.bit_length() - 1}"
