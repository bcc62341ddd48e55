"""Text form of big integers.

Integers up to ``DECIMAL_LIMIT_BITS`` bits are written as decimal strings.
Larger ones (indices like ``2**(2**25)``) use a signed sum of powers of two,
e.g. ``"2^67108864-2^33554432"``, which is exact, linear-time to produce and
short for the structured indices this package creates.
"""

from __future__ import annotations

import re

__all__ = ["format_int", "parse_int", "DECIMAL_LIMIT_BITS"]

DECIMAL_LIMIT_BITS = 4096

_TERM = re.compile(r"([+-]?)(?:2\^(\d+)|(\d+))")


def _pow2_terms(n: int) -> list[tuple[int, int]]:
    # runs of one-bits b..a-1 become +2^a - 2^b
    terms = []
    while n:
        low = (n & -n).bit_length() - 1
        high_run = n + (1 << low)
        top = (high_run & -high_run).bit_length() - 1
        if top - low == 1:
            terms.append((1, low))
        else:
            terms.append((1, top))
            terms.append((-1, low))
        n = n - ((1 << top) - (1 << low))
    return terms


def format_int(n: int) -> str:
    if n.bit_length() <= DECIMAL_LIMIT_BITS:
        return str(n)
    sign = "-" if n < 0 else ""
    terms = sorted(_pow2_terms(abs(n)), key=lambda t: -t[1])
    parts = []
    for i, (s, e) in enumerate(terms):
        if s < 0:
            parts.append(f"-2^{e}")
        else:
            parts.append(("+" if i else "") + f"2^{e}")
    body = "".join(parts)
    return f"{sign}({body})" if sign else body


def parse_int(text: str | int) -> int:
    if isinstance(text, int):
        return text
    t = text.strip().replace(" ", "")
    neg = False
    if t.startswith("-(") and t.endswith(")"):
        neg, t = True, t[2:-1]
    if re.fullmatch(r"[+-]?\d+", t):
        v = int(t)
    else:
        pos, v = 0, 0
        while pos < len(t):
            m = _TERM.match(t, pos)
            if not m or m.end() == pos:
                raise ValueError(f"bad integer literal {text!r}")
            s = -1 if m.group(1) == "-" else 1
            v += s * ((1 << int(m.group(2))) if m.group(2) else int(m.group(3)))
            pos = m.end()
    return -v if neg else v
