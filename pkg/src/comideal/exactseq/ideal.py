"""Ideal membership as bounded dominance search.

An ideal ``J`` generated by decreasing sequences ``T_1, T_2, ...`` contains
``diag(t)`` iff ``t*_{m j} <= c * w_j`` for all ``j`` and some closure
generator ``w = T_1 + ... + T_i``, dilation ``m`` and scale ``c``.  Nothing
here decides membership: a found witness is verified on ``[1, K]`` and a
miss is only a refutation of the searched witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

from .dyadic import Dyadic
from .profiles import GeometricMeanProfile, UndecidedComparison, as_profile
from .sequence import BlockSequence, CoverageError
from .transforms import add_sequences

__all__ = [
    "IdealSpec",
    "DominanceWitness",
    "DominanceResult",
    "SearchBounds",
    "MembershipResult",
    "StabilityVerdict",
    "dominance_check",
    "membership_search",
    "stability_probe",
]


@dataclass(frozen=True)
class DominanceWitness:
    generator_index: int
    dilation: int
    scale: Dyadic

    def __post_init__(self):
        if self.generator_index < 1 or self.dilation < 1:
            raise ValueError("generator index and dilation must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def as_dict(self) -> dict:
        return {
            "generator_index": self.generator_index,
            "dilation": str(self.dilation),
            "scale": {"mantissa": str(self.scale.mantissa), "exponent": str(self.scale.exponent)},
        }


@dataclass(frozen=True)
class SearchBounds:
    """Dilations ``2**0 .. M``, scales ``2**0 .. 2**C``, indices ``j <= K``."""

    M: int
    C: int
    K: int

    def __post_init__(self):
        if self.M < 1 or self.C < 0 or self.K < 1:
            raise ValueError("bounds must be positive")

    def dilations(self) -> list[int]:
        out, m = [], 1
        while m <= self.M:
            out.append(m)
            m *= 2
        return out

    def scales(self) -> list[Dyadic]:
        return [Dyadic.pow2(b) for b in range(self.C + 1)]


@dataclass
class IdealSpec:
    """The ideal generated by ``diag(g)`` for each generator ``g``."""

    generators: list[BlockSequence]
    presentation: Literal["principal", "countably-generated"] = "principal"

    def __post_init__(self):
        if not self.generators:
            raise ValueError("an ideal needs at least one generator")
        if self.presentation == "principal" and len(self.generators) != 1:
            raise ValueError("a principal ideal has exactly one generator")

    @classmethod
    def principal(cls, u: BlockSequence) -> "IdealSpec":
        return cls([u], "principal")

    @cached_property
    def _closure(self) -> list[BlockSequence]:
        out = [self.generators[0]]
        for g in self.generators[1:]:
            out.append(add_sequences(out[-1], g))
        return out

    def closure(self, i: int) -> BlockSequence:
        """``T_1 + ... + T_i`` (capped at the number of generators)."""
        return self._closure[min(i, len(self._closure)) - 1]

    @property
    def n_closure(self) -> int:
        return len(self._closure)

    def family_value(self, n: int, k: int):
        """``u^(n)_k = 2**n * w^(n)_{ceil(k / 2**n)}``.

        This single-index family is cofinal in ``{j * w^(i)_{k/j}}``, so a
        sequence lies in the ideal iff it is dominated by some member.
        """
        w = self.closure(n)
        idx = -(-k // (1 << n))
        return Dyadic.pow2(n) * w.value_at(idx)


@dataclass(frozen=True)
class DominanceResult:
    ok: bool
    first_failure: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def _check_range(profile, m: int, u: BlockSequence, K: int) -> int:
    if K > u.coverage:
        raise CoverageError(f"K={K} beyond generator coverage {u.coverage}")
    if not profile.finite_support:
        K = min(K, profile.coverage // m)
    return K


def dominance_check(t, u: BlockSequence, w: DominanceWitness, K: int) -> DominanceResult:
    """Is ``t*_{m j} <= c * u_j`` for every ``j <= K``?

    Both sides are nonincreasing in ``j`` and the right side is constant on
    each run of ``u``, so only the first index of every run is compared.
    Ties pass.
    """
    profile = as_profile(t)
    m, c = w.dilation, w.scale
    K = _check_range(profile, m, u, K)
    for start, _, value in u.blocks():
        if start > K:
            break
        if profile.rank_exceeds(m * start, c * value):
            return DominanceResult(False, start)
    return DominanceResult(True)


@dataclass
class MembershipResult:
    witness: DominanceWitness | None
    bounds: SearchBounds
    failures: list[tuple[DominanceWitness, int]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.witness is not None

    def as_dict(self) -> dict:
        return {
            "found": self.found,
            "witness": self.witness.as_dict() if self.witness else None,
            "bounds": {"M": str(self.bounds.M), "C": self.bounds.C, "K": _fmt(self.bounds.K)},
            "failures": [
                {"witness": w.as_dict(), "first_failure": _fmt(j)} for w, j in self.failures
            ],
        }


def _fmt(n: int) -> str:
    from .bigint import format_int

    return format_int(n)


def _scale_needs(profile, u: BlockSequence, m: int, K: int) -> list[tuple[int, int]] | None:
    """``(run start A, least b with x*_{mA} <= 2**b u_A)`` for runs with ``A <= K``."""
    need = getattr(profile, "log2_scale_needed", None)
    if need is None:
        return None
    K = _check_range(profile, m, u, K)
    out = []
    for start, _, value in u.blocks():
        if start > K:
            break
        b = need(m * start, value)
        if b is None:
            return None
        out.append((start, b))
    return out


def membership_search(t, J: IdealSpec, bounds: SearchBounds, record_failures: bool = True) -> MembershipResult:
    """First witness (closure generator, dilation, scale) passing on ``[1, K]``.

    Witnesses are tried generator-major, then by increasing dilation, then by
    increasing scale.  A miss is a bounded refutation only.
    """
    profile = as_profile(t)
    failures: list[tuple[DominanceWitness, int]] = []
    for i in range(1, J.n_closure + 1):
        u = J.closure(i)
        K = min(bounds.K, u.coverage)
        for m in bounds.dilations():
            needs = _scale_needs(profile, u, m, K)
            for b, c in enumerate(bounds.scales()):
                w = DominanceWitness(i, m, c)
                if needs is None:
                    res = dominance_check(profile, u, w, K)
                else:
                    # same verdict as dominance_check, one big-int division per run
                    bad = next((a for a, nb in needs if nb > b), None)
                    res = DominanceResult(bad is None, bad)
                if res.ok:
                    return MembershipResult(w, bounds, failures)
                if record_failures:
                    failures.append((w, res.first_failure))
    return MembershipResult(None, bounds, failures)


@dataclass
class StabilityVerdict:
    stable: bool
    search: MembershipResult
    exact: bool

    @property
    def verdict(self) -> str:
        return "stable-up-to-bounds" if self.stable else "unstable-with-certificate"

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "exact": self.exact, "search": self.search.as_dict()}


def stability_probe(u: BlockSequence, bounds: SearchBounds) -> StabilityVerdict:
    """Search for ``diag(GM(u))`` in the principal ideal of ``u``.

    A witness means the geometric-mean transform does not escape ``J(u)``
    within the bounds; no witness yields, for every searched witness, the
    run start where domination first fails.
    """
    gm = GeometricMeanProfile(u)
    try:
        res = membership_search(gm, IdealSpec.principal(u), bounds)
    except UndecidedComparison as exc:
        raise UndecidedComparison(f"stability verdict withheld: {exc}") from exc
    return StabilityVerdict(res.found, res, gm.exact)
