"""An element of ``Com J`` whose Cesaro eigenvalue means escape ``J``.

Input: an ideal ``J`` (through its generators) and a decreasing ``t`` with
``diag(t)`` in ``J`` whose geometric means escape ``J``.  Output: block data

    m_n, p_n = m_n - m_{n-1}, wbar_n, sigma_bar_n, eps_n,
    mu, nu, lambda', eta', lambda, eta

such that ``lambda'`` (eigenvalues of ``diag(mu) (+) -diag(nu)``) passes the
Cesaro criterion while ``lambda`` (eigenvalues of ``(A + D1) (+) (-A - D2)``
with ``diag(A) = w``) fails it.

Choices made here
-----------------
* ``wbar_n`` is the geometric mean of ``t`` over block ``n`` rounded down to a
  power of two, so every quantity stays dyadic or rational and exact.
* ``m_n`` is the least index with ``m_n >= n m_{n-1}`` (that is,
  ``p_n / m_n >= 1 - 1/n``), ``wbar_n < wbar_{n-1}`` and
  ``wbar_n > 2**n w_{ceil(m_n / 2**n)}`` for the ``n``-th closure generator.
* ``sigma_bar_n = min((wbar_n - wbar_{n+1}) / 2, t_{m_n} / 2, sigma_bar_{n-1} / 2)``,
  which gives ``sigma <= t / 2`` termwise and strict decrease.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..commlab import CriterionVerdict, com_membership_criterion
from ..exactseq import (
    BlockSequence,
    CesaroProfile,
    Dyadic,
    IdealSpec,
    SearchBounds,
    SignedRuns,
    StabilityVerdict,
    format_int,
    stability_probe,
)

__all__ = [
    "Thm13SearchError",
    "Thm13Bundle",
    "toy_unstable_sequence",
    "build_thm13",
    "check_thm13_estimates",
    "refutation_bounds",
]

P2 = Dyadic.pow2


class Thm13SearchError(RuntimeError):
    """No admissible ``m_n`` inside the covered indices."""


def toy_unstable_sequence(kmax: int = 26) -> BlockSequence:
    """``t_1 = 1/2`` and ``t_k = 2**(-2**j)`` on ``[2**(2**(j-1)), 2**(2**j))``, ``j <= kmax``."""
    runs = [(P2(-1), 1)]
    for j in range(1, kmax + 1):
        runs.append((P2(-(1 << j)), (1 << (1 << j)) - (1 << (1 << (j - 1)))))
    return BlockSequence(runs)


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _solve_ge(alpha: int, beta: int, lo: int, hi: int) -> tuple[int, int]:
    """``[lo, hi]`` intersected with ``{m : alpha + beta m >= 0}``."""
    if beta > 0:
        lo = max(lo, _ceil_div(-alpha, beta))
    elif beta < 0:
        hi = min(hi, alpha // (-beta))
    elif alpha < 0:
        return 1, 0
    return lo, hi


def _next_block(t: BlockSequence, gen: BlockSequence, n: int, m_prev: int, e_prev: int | None, budget: int):
    """Least admissible ``m_n`` and the exponent of ``wbar_n``."""
    P = t.log2_product
    exps_t = t.log2_exponents
    exps_g = gen.log2_exponents
    if exps_t is None or exps_g is None:
        raise ValueError("t and the generators must take power-of-two values")
    P0 = P(m_prev)
    lo = max(n * m_prev, m_prev + 1)
    scale = 1 << n
    top = min(t.coverage, scale * gen.coverage)
    cuts = set(t.starts) | {scale * (s - 1) + 1 for s in gen.starts}
    cuts = sorted(c for c in cuts if lo < c <= top) + [top + 1]
    blocked = {"growth": 0, "decrease": 0}
    a = lo
    for nxt in cuts[:budget]:
        b = nxt - 1
        if a > b:
            a = nxt
            continue
        f = exps_t[t.run_index(a)]
        g = exps_g[gen.run_index(_ceil_div(a, scale))]
        Da = P(a) - P0
        # wbar > 2**n gen_{ceil(m/2**n)}  <=>  D(m) >= (n + g + 1)(m - m_prev)
        c3 = n + g + 1
        lo3, hi3 = _solve_ge(Da - f * a + c3 * m_prev, f - c3, a, b)
        if lo3 > hi3:
            blocked["growth"] += 1
            a = nxt
            continue
        lo2, hi2 = lo3, hi3
        if e_prev is not None:
            # floor(D / len) < e_prev  <=>  e_prev (m - m_prev) - D(m) >= 1
            lo2, hi2 = _solve_ge(-(Da - f * a) - e_prev * m_prev - 1, e_prev - f, lo3, hi3)
            if lo2 > hi2:
                blocked["decrease"] += 1
                a = nxt
                continue
        m = lo2
        D = Da + f * (m - a)
        return m, D // (m - m_prev)
    raise Thm13SearchError(
        f"no admissible m_{n} up to index {format_int(top)} "
        f"(pieces blocked by growth: {blocked['growth']}, by strict decrease: {blocked['decrease']})"
    )


@dataclass
class Thm13Bundle:
    J: IdealSpec
    t: BlockSequence
    m: list[int]
    wbar: list[Dyadic]
    sigma_bar: list[Dyadic]
    eps: list[Dyadic]
    n_max: int
    probe: StabilityVerdict | None = None
    checks: dict = field(default_factory=dict)

    @property
    def p(self) -> list[int]:
        return [b - a for a, b in zip([0] + self.m, self.m)]

    def _blocks(self, values):
        return [(values[n], self.p[n]) for n in range(self.n_max)]

    @property
    def w(self) -> BlockSequence:
        return BlockSequence(self._blocks(self.wbar))

    @property
    def sigma(self) -> BlockSequence:
        return BlockSequence(self._blocks(self.sigma_bar))

    def _shift(self, n: int) -> Fraction:
        return Fraction(self.eps[n].fraction()) / self.p[n]

    @property
    def mu(self) -> BlockSequence:
        vals = [self.sigma_bar[n] if n % 2 == 0 else self.sigma_bar[n] - self._shift(n) for n in range(self.n_max)]
        return BlockSequence(self._blocks(vals))

    @property
    def nu(self) -> BlockSequence:
        vals = [self.sigma_bar[n] - self._shift(n) if n % 2 == 0 else self.sigma_bar[n] for n in range(self.n_max)]
        return BlockSequence(self._blocks(vals))

    def _lambda_runs(self, with_w: bool) -> list:
        runs = []
        for n in range(self.n_max):
            s, d, pn = self.sigma_bar[n], self._shift(n), self.p[n]
            wb = self.wbar[n] if with_w else 0
            if n % 2 == 0:  # odd block in 1-based numbering
                runs += [(s + wb, pn), (-s + d - wb, pn)]
            else:
                runs += [(-s - wb, pn), (s - d + wb, pn)]
        return runs

    @property
    def lambda_prime(self) -> SignedRuns:
        return SignedRuns(self._lambda_runs(False))

    @property
    def lam(self) -> SignedRuns:
        return SignedRuns(self._lambda_runs(True))

    def eta_prime(self, k: int):
        return self.lambda_prime.partial_sum(k)

    def eta(self, k: int):
        return self.lam.partial_sum(k)

    @property
    def ratios(self) -> list[float]:
        """Achieved ``p_n / m_n``."""
        return [pn / mn for pn, mn in zip(self.p, self.m)]

    def as_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "m": [format_int(x) for x in self.m],
            "p_over_m": [f"{r:.6f}" for r in self.ratios],
            "wbar_log2": [x.exponent for x in self.wbar],
            "sigma_bar": [str(x) for x in self.sigma_bar],
            "eps": [str(x) for x in self.eps],
            "probe": self.probe.verdict if self.probe else "supplied",
            "checks": self.checks,
        }


def build_thm13(
    J: IdealSpec,
    t: BlockSequence,
    n_max: int = 6,
    probe: StabilityVerdict | None = None,
    probe_bounds: SearchBounds | None = None,
    budget: int = 10**5,
) -> Thm13Bundle:
    """Greedy block construction for ``n_max`` blocks (``n_max`` even).

    ``probe`` is a stability verdict for ``t`` already computed; otherwise
    one is computed with ``probe_bounds`` (default: dilations and scales up to
    4) and must report instability.
    """
    if n_max < 2 or n_max % 2:
        raise ValueError("n_max must be a positive even integer")
    if probe is None:
        probe = stability_probe(t, probe_bounds or SearchBounds(4, 2, t.coverage))
    if probe.stable:
        raise ValueError("t is stable within the probe bounds; no construction")
    m, wbar = [], []
    m_prev, e_prev = 0, None
    for n in range(1, n_max + 3):
        mn, e = _next_block(t, J.closure(n), n, m_prev, e_prev, budget)
        m.append(mn)
        wbar.append(P2(e))
        m_prev, e_prev = mn, e
    sig = []
    for n in range(n_max + 1):
        cands = [(wbar[n] - wbar[n + 1]) / 2, t.value_at(m[n]) / 2]
        if sig:
            cands.append(sig[-1] / 2)
        sig.append(min(cands))
    eps = []
    for n in range(0, n_max, 2):
        e = min(sig[n] - sig[n + 1], sig[n + 1] - sig[n + 2]) / 2
        eps += [e, e]
    b = Thm13Bundle(J, t, m, wbar, sig, eps, n_max, probe)
    b.checks["invariants"] = _invariants(b)
    return b


def _invariants(b: Thm13Bundle) -> dict:
    n_max, wb, sb, ep = b.n_max, b.wbar, b.sigma_bar, b.eps
    out = {
        "wbar_decreasing": all(wb[n] > wb[n + 1] for n in range(n_max + 1)),
        "wbar_gap": all(wb[n] - sb[n] > wb[n + 1] for n in range(n_max + 1)),
        "sigma_bar_decreasing": all(sb[n] > sb[n + 1] > 0 for n in range(n_max)),
        "eps_positive": all(e > 0 for e in ep),
        "eps_gap": all(sb[n] - ep[n] > sb[n + 1] for n in range(n_max)),
        "sigma_below_t": all(sb[n] <= b.t.value_at(b.m[n]) / 2 for n in range(n_max + 1)),
        "ratio_target": all(pn * n >= mn * (n - 1) for n, (pn, mn) in enumerate(zip(b.p, b.m), start=1)),
        "escapes_family": all(
            wb[n] > b.J.family_value(n + 1, b.m[n]) for n in range(n_max)
        ),
    }
    alt = Dyadic(0)
    signed = True
    for n in range(n_max):
        alt = alt + (ep[n] if n % 2 == 0 else -ep[n])
        signed &= abs(alt) <= sb[n] if n % 2 == 0 else alt == 0
    out["alternating_eps"] = signed
    mu, nu = b.mu, b.nu  # BlockSequence enforces strict decrease
    out["mu_nu_decreasing"] = mu.coverage == nu.coverage == b.m[n_max - 1]
    out["all"] = all(out.values())
    return out


def _ranges(b: Thm13Bundle, n: int):
    """The four index ranges of the pair ``(2n-1, 2n)`` as ``(offset, length)``."""
    m = [0] + b.m
    p1, p2 = b.p[2 * n - 2], b.p[2 * n - 1]
    return [
        (2 * m[2 * n - 2], p1),
        (2 * m[2 * n - 2] + p1, p1),
        (2 * m[2 * n - 1], p2),
        (2 * m[2 * n - 1] + p2, p2),
    ]


def _closed_eta_prime(b: Thm13Bundle, n: int, r: int, k: int):
    s1, s2 = b.sigma_bar[2 * n - 2], b.sigma_bar[2 * n - 1]
    e1, e2 = b.eps[2 * n - 2].fraction(), b.eps[2 * n - 1].fraction()
    p1, p2 = b.p[2 * n - 2], b.p[2 * n - 1]
    if r == 0:
        return k * s1.fraction()
    if r == 1:
        return (p1 - k) * s1.fraction() + Fraction(k) * e1 / p1
    if r == 2:
        return e1 - k * s2.fraction()
    return e1 - (p2 - k) * s2.fraction() - Fraction(k) * e2 / p2


def refutation_bounds(b: Thm13Bundle) -> SearchBounds:
    """Dilation and scale budget the built blocks can defeat, with ``K`` the full length."""
    a = b.n_max
    return SearchBounds(1 << a, a, b.lam.coverage)


def check_thm13_estimates(b: Thm13Bundle, accept_bounds: SearchBounds | None = None, refute_bounds: SearchBounds | None = None) -> dict:
    """Closed forms, crude bounds and both Cesaro criteria, all exact.

    ``|eta'_j / j|`` is monotone on each range (``eta'`` is linear there), so
    the crude bounds are checked at range ends.
    """
    closed_ok, crude = True, []
    lp = b.lambda_prime
    for n in range(1, b.n_max // 2 + 1):
        s1, s2 = b.sigma_bar[2 * n - 2].fraction(), b.sigma_bar[2 * n - 1].fraction()
        bounds = [s1, 2 * s1, s1 + s2, s1 + s2]
        for r, (off, ln) in enumerate(_ranges(b, n)):
            worst = Fraction(0)
            for k in (1, ln):
                ep = Fraction(lp.partial_sum(off + k))
                closed_ok &= ep == _closed_eta_prime(b, n, r, k)
                # the shift from eta' to eta on this range
                wb = b.wbar[2 * n - 2 if r < 2 else 2 * n - 1].fraction()
                shift = [k * wb, (ln - k) * wb, -k * wb, -(ln - k) * wb][r]
                closed_ok &= Fraction(b.lam.partial_sum(off + k)) == ep + shift
                worst = max(worst, abs(ep) / (off + k))
            crude.append({"pair": n, "range": r + 1, "holds": worst <= bounds[r], "max_ratio": f"{float(worst / bounds[r]):.6g}"})
    accept_bounds = accept_bounds or SearchBounds(2, 1, lp.coverage)
    acc = com_membership_criterion(lp, b.J, accept_bounds)
    refute_bounds = refute_bounds or refutation_bounds(b)
    rej = com_membership_criterion(b.lam, b.J, refute_bounds)
    sub = []
    m = [0] + b.m
    for n in range(1, b.n_max // 2 + 1):
        pn = b.p[2 * n - 2]
        j = 2 * m[2 * n - 2] + pn
        diff = Fraction(b.lam.partial_sum(j)) - Fraction(lp.partial_sum(j))
        frac = Fraction(pn, j)
        sub.append(
            {
                "block": 2 * n - 1,
                "index": format_int(j),
                "mean_gap_equals_wbar_times_ratio": diff / j == b.wbar[2 * n - 2].fraction() * frac,
                "ratio": f"{float(frac):.6f}",
                "cesaro_mean_log2": _log2_str(abs(Fraction(b.lam.partial_sum(j))) / j),
                "dominates_family": abs(diff) / j / 2 > b.J.family_value(2 * n - 1, j).fraction() if frac > Fraction(1, 2) else None,
            }
        )
    report = {
        "closed_forms": closed_ok,
        "crude_bounds": crude,
        "crude_all": all(c["holds"] for c in crude),
        "lambda_prime": acc.as_dict() | {"member": acc.member},
        "lambda": rej.as_dict() | {"member": rej.member},
        "subsequence": sub,
    }
    report["all"] = bool(closed_ok and report["crude_all"] and acc.member and not rej.member)
    return report


def _log2_str(x: Fraction) -> str:
    if x == 0:
        return "-inf"
    return f"~{x.numerator.bit_length() - x.denominator.bit_length()}"
