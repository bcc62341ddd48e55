"""JSON form of exact scalars and run-length sequences.

A run is ``{"mantissa": "...", "exponent": "...", "length": "..."}`` for a
dyadic value and ``{"numerator": "...", "denominator": "...", "length": ...}``
otherwise.  Integers are strings, see :mod:`comideal.exactseq.bigint`.
"""

from __future__ import annotations

from fractions import Fraction

from .bigint import format_int, parse_int
from .dyadic import Dyadic, to_exact
from .sequence import BlockSequence, RunSequence, SignedRuns

__all__ = ["scalar_to_json", "scalar_from_json", "sequence_to_json", "sequence_from_json"]


def scalar_to_json(x) -> dict:
    x = to_exact(x)
    if isinstance(x, Dyadic):
        return {"mantissa": format_int(x.mantissa), "exponent": format_int(x.exponent)}
    return {"numerator": format_int(x.numerator), "denominator": format_int(x.denominator)}


def scalar_from_json(d) -> Dyadic | Fraction:
    if isinstance(d, (int, str)):
        return to_exact(Fraction(d))
    if "mantissa" in d:
        return Dyadic(parse_int(d["mantissa"]), parse_int(d["exponent"]))
    if "numerator" in d:
        return to_exact(Fraction(parse_int(d["numerator"]), parse_int(d["denominator"])))
    raise ValueError(f"not an exact scalar: {d!r}")


def sequence_to_json(s: RunSequence) -> dict:
    return {
        "runs": [dict(scalar_to_json(v), length=format_int(n)) for v, n in s.runs],
    }


def sequence_from_json(d: dict, cls: type[RunSequence] | None = None) -> RunSequence:
    """Parse ``{"runs": [...]}``; decreasing data becomes a BlockSequence."""
    runs = [(scalar_from_json(r), parse_int(r["length"])) for r in d["runs"]]
    if cls is not None:
        return cls(runs)
    try:
        return BlockSequence(runs)
    except ValueError:
        return SignedRuns(runs)
