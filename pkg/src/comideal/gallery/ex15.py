"""A principal ideal with a quasi-nilpotent element outside its commutator space.

For a schedule ``0 = p_0 < p_1 < ...`` put ``q_n = p_n + 2n`` and

    u_k = 2**(-p_n)              on  2**p_{n-1} <= k < 2**p_n,
    v_k = 2**n * 2**(-p_{n+1})   on  2**q_{n-1} <= k < 2**q_n,
    sigma_k = u_1 + ... + u_k,
    theta_k = inf_j ( j v_j + |sigma_k - sigma_j| ),
    w_1 = theta_1,  w_k = theta_k - theta_{k-1}.

Everything is exact: values are powers of two, indices are Python ints and
nothing is enumerated term by term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

from ..exactseq import BlockSequence, CoverageError, Dyadic, format_int

__all__ = [
    "ScheduleError",
    "Schedule",
    "Ex15Bundle",
    "ThetaValue",
    "build_ex15",
    "check_product_inequality",
    "superblock_log_estimate",
    "theta_exact",
    "theta_brute_force",
    "theta_table",
    "sample_indices",
    "check_w_bounds",
    "build_w_and_refute",
    "check_rearrangement_bound",
    "DEFAULT_SCHEDULE",
    "MILD_SCHEDULE",
]

P2 = Dyadic.pow2

DEFAULT_SCHEDULE = (0, 1, 10, 75, 460)
# small enough to enumerate (u covers 8191 indices, theta certifiable to ~2000);
# violates the growth condition
MILD_SCHEDULE = (0, 1, 4, 12, 13)


class ScheduleError(ValueError):
    def __init__(self, n: int, p):
        super().__init__(f"p_{n + 1} = {p[n + 1]} must exceed p_{n} + 2*{n}*2^{2 * n} = {p[n] + 2 * n * 4**n}")
        self.n = n


@dataclass(frozen=True)
class Schedule:
    p: tuple[int, ...]

    def __post_init__(self):
        p = self.p
        if len(p) < 2 or p[0] != 0 or any(b <= a for a, b in zip(p, p[1:])):
            raise ValueError("schedule must be increasing integers starting at 0")

    @property
    def q(self) -> tuple[int, ...]:
        return tuple(pn + 2 * n for n, pn in enumerate(self.p))

    def growth_failure(self) -> int | None:
        """First ``n`` with ``p_{n+1} <= p_n + 2n 4**n``, or None."""
        p = self.p
        for n in range(len(p) - 1):
            if not p[n + 1] > p[n] + 2 * n * 4**n:
                return n
        return None

    @property
    def conforming(self) -> bool:
        return self.growth_failure() is None


@dataclass(frozen=True)
class ThetaValue:
    value: Dyadic
    argmin: int
    cutoff: int


class Ex15Bundle:
    """Exact sequences of the construction for one schedule."""

    def __init__(self, schedule: Schedule):
        self.schedule = schedule
        p, q = schedule.p, schedule.q
        L = len(p) - 1
        self.u = BlockSequence([(P2(-p[n]), (1 << p[n]) - (1 << p[n - 1])) for n in range(1, L + 1)])
        if L < 2:
            raise ValueError("need at least p_0, p_1, p_2 to define v")
        self.v = BlockSequence([(P2(n - p[n + 1]), (1 << q[n]) - (1 << q[n - 1])) for n in range(1, L)])
        self.theta = lru_cache(maxsize=4096)(self._theta)

    @property
    def p(self):
        return self.schedule.p

    @property
    def q(self):
        return self.schedule.q

    @property
    def conforming(self) -> bool:
        return self.schedule.conforming

    def sigma(self, k: int) -> Dyadic:
        return self.u.partial_sum(k)

    @cached_property
    def limit(self) -> int:
        """Largest index where both ``u`` and ``v`` are defined."""
        return min(self.u.coverage, self.v.coverage)

    def _theta(self, k: int) -> ThetaValue:
        return theta_exact(self, k)

    def w(self, k: int) -> Dyadic:
        if k == 1:
            return self.theta(1).value
        return self.theta(k).value - self.theta(k - 1).value

    def w_values(self, N: int) -> list[Dyadic]:
        """``w_1 .. w_N`` by enumeration; only for small ``N``."""
        th = [self.theta(k).value for k in range(1, N + 1)]
        return [th[0]] + [b - a for a, b in zip(th, th[1:])]

    def as_dict(self) -> dict:
        from ..exactseq import sequence_to_json

        return {
            "p": list(self.p),
            "q": list(self.q),
            "conforming": self.conforming,
            "u": sequence_to_json(self.u),
            "v": sequence_to_json(self.v),
        }


def build_ex15(p=DEFAULT_SCHEDULE, strict: bool = True) -> Ex15Bundle:
    """Build ``u, v, sigma, theta`` for the schedule ``p``.

    With ``strict`` a schedule violating ``p_{n+1} > p_n + 2n 4**n`` raises
    :class:`ScheduleError`; otherwise the bundle is flagged non-conforming.
    """
    sched = Schedule(tuple(int(x) for x in p))
    bad = sched.growth_failure()
    if strict and bad is not None:
        raise ScheduleError(bad, sched.p)
    b = Ex15Bundle(sched)
    assert b.theta(1).value <= b.v.value_at(1) <= b.u.value_at(1)
    return b


# --- product inequality ------------------------------------------------------


def superblock_log_estimate(p, n: int) -> tuple[Fraction, int]:
    """Closed form of ``log2 prod_{2**q_{n-1} <= j < 2**q_n} v_j / u_j`` and its bound.

    Returns ``(exact, bound_factor)`` where ``exact`` is
    ``2**p_n ((1 - 2**(-p_n+p_{n-1}+2n-2)) (p_n - p_{n+1}) + (1 - 2**(-p_n+p_{n-1}-2)) n 4**n)``
    and ``bound_factor = p_n - p_{n+1} + 2n 4**n``; the upper estimate
    ``2**p_n (1 - 2**(-p_n+p_{n-1}+2n-2)) * bound_factor`` is negative iff the
    factor is.
    """
    a = 1 - Fraction(2) ** (-p[n] + p[n - 1] + 2 * n - 2)
    b = 1 - Fraction(2) ** (-p[n] + p[n - 1] - 2)
    exact = 2 ** p[n] * (a * (p[n] - p[n + 1]) + b * n * 4**n)
    return exact, p[n] - p[n + 1] + 2 * n * 4**n


@dataclass
class ProductCheck:
    ok: bool
    first_failure: int | None
    margins: list[tuple[int, int]]  # (v block end, log2 prod v/u)
    superblocks: list[dict] = field(default_factory=list)
    interior_ok: bool = True

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "first_failure": None if self.first_failure is None else format_int(self.first_failure),
            "interior_ok": self.interior_ok,
            "margins": [{"k": format_int(k), "log2_margin": format_int(m)} for k, m in self.margins],
            "superblocks": self.superblocks,
        }


def _cuts(seqs, hi: int, extra=()) -> list[int]:
    s = {1, hi + 1}
    for q in seqs:
        s.update(a for a in q.starts if a <= hi)
    s.update(x for x in extra if 1 <= x <= hi + 1)
    return sorted(s)


def check_product_inequality(b: Ex15Bundle, K: int | None = None) -> ProductCheck:
    """Certify ``prod_{j<=k} v_j <= prod_{j<=k} u_j`` for every ``k <= K``.

    ``log2`` of the ratio is an integer-valued function of ``k`` that is
    linear on each piece of the common run partition, so checking both
    ends of every piece covers all ``k``.
    """
    K = b.limit if K is None else min(K, b.limit)
    cuts = _cuts([b.u, b.v], K)
    margin = lambda k: b.v.log2_product(k) - b.u.log2_product(k)  # noqa: E731
    first = None
    for a, nxt in zip(cuts, cuts[1:]):
        for k in (a, nxt - 1):
            if margin(k) > 0 and first is None:
                first = k
    v_ends = [s + n - 1 for s, (_, n) in zip(b.v.starts, b.v.runs) if s + n - 1 <= K]
    margins = [(k, margin(k)) for k in v_ends]
    p, q = b.p, b.q
    sbs = []
    prev = 0
    for n, (k, m) in enumerate(margins, start=1):
        exact, factor = superblock_log_estimate(p, n)
        sbs.append(
            {
                "n": n,
                "log2_ratio": format_int(m - prev),
                "closed_form_agrees": exact == m - prev,
                "estimate_negative": factor < 0,
                "sign_agrees": (m - prev < 0) == (factor < 0),
            }
        )
        prev = m
    # the interior argument: v < u just after each super-block end, v > u later
    interior = True
    for n in range(1, len(q) - 1):
        lo, mid, hi = 1 << q[n], 1 << p[n + 1], (1 << q[n + 1]) - 1
        if hi > K:
            break
        if not (b.v.value_at(lo) < b.u.value_at(lo) and b.v.value_at(mid - 1) < b.u.value_at(mid - 1)):
            interior = False
        if not (b.v.value_at(mid) > b.u.value_at(mid) and b.v.value_at(hi) > b.u.value_at(hi)):
            interior = False
    return ProductCheck(first is None, first, margins, sbs, interior)


# --- theta -----------------------------------------------------------------


def theta_exact(b: Ex15Bundle, k: int) -> ThetaValue:
    """Exact ``inf_j (j v_j + |sigma_k - sigma_j|)``.

    The objective is linear on every piece of the common run partition of
    ``u`` and ``v`` refined at ``k``, so only piece ends are evaluated.  For
    ``j > J >= k`` the objective is at least ``sigma_{J+1} - sigma_k``; the
    scan stops once that exceeds the best value found.
    """
    if not 1 <= k <= b.limit:
        raise CoverageError(f"theta needs 1 <= k <= {b.limit}")
    sk = b.sigma(k)
    J = b.limit
    cuts = _cuts([b.u, b.v], J, extra=(k, k + 1))
    best: Dyadic | None = None
    arg = None
    for a, nxt in zip(cuts, cuts[1:]):
        e = nxt - 1
        for j in (a, e):
            f = b.v.value_at(j) * j + abs(sk - b.sigma(j))
            if best is None or f < best:
                best, arg = f, j
        if e >= k and e + 1 <= b.u.coverage and b.sigma(e + 1) - sk >= best:
            return ThetaValue(best, arg, e)
    raise CoverageError(f"tail of theta_{k} not certified within the schedule")


def theta_brute_force(b: Ex15Bundle, k: int) -> Fraction:
    """Minimum over every ``j`` up to the certified tail; for small schedules."""
    if b.u.coverage > 10**5:
        raise ValueError("brute force is only for small schedules")
    sk = b.sigma(k).fraction()
    best = None
    for j in range(1, b.limit + 1):
        f = b.v.value_at(j).fraction() * j + abs(sk - b.sigma(j).fraction())
        best = f if best is None else min(best, f)
        if j >= k and j + 1 <= b.u.coverage and b.sigma(j + 1).fraction() - sk >= best:
            return best
    raise CoverageError("tail not certified")


# --- w and the refutation -------------------------------------------------


def sample_indices(b: Ex15Bundle, hi: int | None = None) -> list[int]:
    hi = b.limit if hi is None else min(hi, b.limit)
    s = set()
    for seq in (b.u, b.v):
        for a in seq.starts:
            s.update((a - 1, a, a + 1))
    for n in range(1, len(b.p)):
        s.update((1 << b.p[n], 1 << (b.p[n] + n)))
    return sorted(x for x in s if 1 <= x <= hi)


def check_w_bounds(b: Ex15Bundle, ks=None) -> dict:
    """``|w_k| <= u_k`` and ``0 <= theta_k <= k v_k`` at sampled ``k``."""
    ks = sample_indices(b) if ks is None else ks
    bad_w, bad_theta = [], []
    for k in ks:
        th = b.theta(k).value
        if not (0 <= th <= b.v.value_at(k) * k):
            bad_theta.append(k)
        if abs(b.w(k)) > b.u.value_at(k):
            bad_w.append(k)
    return {
        "ok": not bad_w and not bad_theta,
        "sampled": len(ks),
        "w_violations": [format_int(k) for k in bad_w],
        "theta_violations": [format_int(k) for k in bad_theta],
    }


def _ceil_mul(alpha: Fraction, k: int) -> int:
    return -((-alpha.numerator * k) // alpha.denominator)


def _ratio(b: Ex15Bundle, alpha: Fraction, k: int) -> Fraction:
    th = b.theta(k).value.fraction()
    return th / k / b.u.value_at(_ceil_mul(alpha, k)).fraction()


def _floor_log2(x: Fraction) -> int:
    """Exact ``floor(log2(x))`` for ``x > 0``."""
    a, b = x.numerator, x.denominator
    e = a.bit_length() - b.bit_length()
    # 2**e <= x  <=>  a >= b * 2**e
    return e if (a << max(0, -e)) >= (b << max(0, e)) else e - 1


def _pow2_at_least(x: Fraction) -> int:
    """Least power of two ``>= x`` (and ``>= 1``)."""
    n = max(0, x.numerator.bit_length() - x.denominator.bit_length() - 1)
    while (x.denominator << n) < x.numerator:
        n += 1
    return 1 << n


def theta_table(b: Ex15Bundle) -> list[dict]:
    """``theta_k`` at ``k = 2**(p_n + n)`` against ``2**(-p_{n+1} + p_n + 2n - 1)``."""
    rows = []
    p = b.p
    for n in range(1, len(p) - 1):
        k = 1 << (p[n] + n)
        if k > b.limit:
            break
        th = b.theta(k)
        bound = P2(-p[n + 1] + p[n] + 2 * n - 1)
        ratio = th.value.fraction() / bound.fraction()
        growth = _ratio(b, Fraction(1), k)
        rows.append(
            {
                "n": n,
                "k": format_int(k),
                "theta": str(th.value),
                "argmin": format_int(th.argmin),
                "bound": str(bound),
                "theta_over_bound": f"{float(ratio):.6g}",
                "holds": th.value >= bound,
                "ratio_alpha1": f"{float(growth):.6g}",
                "growth_claim": 2 ** (n - 1),
                "growth_holds": growth >= 2 ** (n - 1),
            }
        )
    return rows


def build_w_and_refute(b: Ex15Bundle, alphas=(Fraction(1),), cs=(Fraction(1),)) -> dict:
    """Try to refute ``theta_k / k <= c u_{ceil(alpha k)}`` for each grid point.

    For each ``n`` two indices are tried: ``k = 2**(p_n + n)`` (used when
    ``2**n > 1/alpha``) and the least power of two ``k >= 2**p_n / alpha``, for
    which ``u_{ceil(alpha k)} = 2**(-p_{n+1})`` as well.  A grid point is refuted
    by the first ``(n, k)`` with ratio ``> c``.
    """
    p = b.p
    results = []
    for alpha in alphas:
        alpha = Fraction(alpha)
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        for c in cs:
            c = Fraction(c)
            found = None
            tried = []
            for n in range(1, len(p) - 1):
                ks = []
                if Fraction(1 << n) > 1 / alpha:
                    ks.append(("growth-index", 1 << (p[n] + n)))
                ks.append(("block-start", _pow2_at_least(Fraction(1 << p[n]) / alpha)))
                for label, k in ks:
                    if k > b.limit:
                        continue
                    r = _ratio(b, alpha, k)
                    tried.append({"n": n, "k": format_int(k), "kind": label, "ratio": f"{float(r):.6g}"})
                    if r > c and found is None:
                        found = {
                            "n": n,
                            "k": format_int(k),
                            "kind": label,
                            "ratio": f"{float(r):.6g}",
                            "excess_log2": _floor_log2(r - c),
                        }
                if found:
                    break
            results.append(
                {
                    "alpha": str(alpha),
                    "c": str(c),
                    "refuted": found is not None,
                    "witness": found,
                    "largest_n": len(p) - 2,
                    "tried": tried,
                }
            )
    return {
        "w_bounds": check_w_bounds(b),
        "grid": results,
        "all_refuted": all(r["refuted"] for r in results),
    }


def check_rearrangement_bound(b: Ex15Bundle, N: int) -> dict:
    """``|sum_{j<=k} lambda_j - sum_{j<=k} w_j| <= 2 k u_k`` for a finite section.

    ``lambda`` is ``w_1..w_N`` by decreasing modulus.  Terms beyond ``N`` are
    at most ``u_{N+1}`` in modulus, so the section is faithful for ``k``
    with ``u_k > u_{N+1}``, and only those are checked.
    """
    if N > 10**5:
        raise ValueError("rearrangement check enumerates w; use a small schedule")
    w = [x.fraction() for x in b.w_values(N)]
    order = sorted(range(N), key=lambda i: (-abs(w[i]), i))
    lam = [w[i] for i in order]
    tail = b.u.value_at(N + 1).fraction()
    checked, bad = 0, []
    sl = sw = Fraction(0)
    for k in range(1, N + 1):
        sl += lam[k - 1]
        sw += w[k - 1]
        uk = b.u.value_at(k).fraction()
        if uk <= tail:
            break
        checked += 1
        if abs(sl - sw) > 2 * k * uk:
            bad.append(k)
    return {"ok": not bad, "checked": checked, "violations": bad}
