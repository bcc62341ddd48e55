"""Two-commutator realisation of upper-triangular operators.

With the isometries ``U1 e_n = e_{2n+1}`` and ``U2 e_n = e_{2n}`` and an
upper-triangular ``B``, the operator

    A = 1/2 ([U1*, U1 B] + [U2*, U2 B]) = B - 1/2 (U1 B U1* + U2 B U2*)

is again upper triangular, with ``a_11 = b_11`` and
``a_nn = b_nn - b_{m m} / 2`` for ``n >= 2`` and ``m = floor(n / 2)``.  Feeding
``B`` with diagonal ``xi`` (dyadic partial-sum averages of ``w``) makes the
diagonal of ``A`` equal to the dyadic block means ``eta`` of ``w``.

Indices are 1-based in the text and 0-based in arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .exactseq import (
    BlockSequence,
    CesaroProfile,
    Dyadic,
    IdealSpec,
    MembershipResult,
    SearchBounds,
    SignedRuns,
    membership_search,
    to_exact,
)
from .hornmat import EigenData, horn_construct

__all__ = [
    "DyadicAverages",
    "dyadic_averages",
    "shift_isometries",
    "commutator_expression",
    "commutator_realize",
    "realize_block_means",
    "cesaro_moduli",
    "CriterionVerdict",
    "com_membership_criterion",
]


def _is_exact(w) -> bool:
    return all(isinstance(x, (int, Fraction, Dyadic)) and not isinstance(x, bool) for x in w)


@dataclass(frozen=True)
class DyadicAverages:
    """Block means ``eta`` and averaged partial sums ``xi`` of ``w``.

    Block ``k`` is ``{2**(k-1), ..., 2**k - 1}``; ``n_blocks`` complete
    blocks fit into ``w``, so ``eta`` and ``xi`` have length
    ``2**n_blocks - 1``.
    """

    eta: list | np.ndarray
    xi: list | np.ndarray
    w: list | np.ndarray
    n_blocks: int
    exact: bool
    bound_ok: bool | None = None
    bound_failure: int | None = None

    @staticmethod
    def block_of(n: int) -> int:
        return n.bit_length()


def _u_at(u, k: int):
    if isinstance(u, BlockSequence):
        return u.value_at(k)
    if callable(u):
        return u(k)
    return u[k - 1]


def dyadic_averages(w: Sequence, u: BlockSequence | Sequence | Callable[[int], object] | None = None) -> DyadicAverages:
    """``eta_n = 2**(1-k) sum_{block k} w_j`` and ``xi_n = 2**(1-k) sum_{j < 2**k} w_j``.

    Exact (Fraction) when every ``w_j`` is an int, Fraction or Dyadic, float
    otherwise.  With ``u`` given, also checks ``|eta_n - w_n| <= u_{ceil(n/2)}``.
    """
    if len(w) < 1:
        raise ValueError("w must be nonempty")
    exact = _is_exact(w)
    K = (len(w) + 1).bit_length() - 1
    L = (1 << K) - 1
    if exact:
        wv = [Fraction(to_exact(x)) for x in w[:L]]
        zero = Fraction(0)
    else:
        wv = np.asarray(w[:L])
        zero = wv.dtype.type(0)
    eta, xi = [], []
    total = zero
    for k in range(1, K + 1):
        a, b = (1 << (k - 1)) - 1, (1 << k) - 1
        block = sum(wv[a:b], zero)
        total = total + block
        scale = Fraction(1, 1 << (k - 1)) if exact else 2.0 ** (1 - k)
        eta.extend([block * scale] * (b - a))
        xi.extend([total * scale] * (b - a))
    if not exact:
        eta, xi = np.asarray(eta), np.asarray(xi)
    ok, fail = None, None
    if u is not None:
        ok = True
        for n in range(1, L + 1):
            if abs(eta[n - 1] - wv[n - 1]) > _u_at(u, -(-n // 2)):
                ok, fail = False, n
                break
    return DyadicAverages(eta, xi, wv, K, exact, ok, fail)


def shift_isometries(N: int, sparse: bool = False):
    """``N x N`` truncations of ``U1 e_n = e_{2n+1}`` and ``U2 e_n = e_{2n}``.

    Columns whose image index exceeds ``N`` are zero.  ``sparse=True``
    returns CSR matrices, which keeps the literal commutator expression
    quadratic in ``N``.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    n1 = np.arange(1, (N - 1) // 2 + 1)
    n2 = np.arange(1, N // 2 + 1)
    rows1, cols1 = 2 * n1, n1 - 1
    rows2, cols2 = 2 * n2 - 1, n2 - 1
    if sparse:
        U1 = sp.csr_matrix((np.ones(len(n1)), (rows1, cols1)), shape=(N, N))
        U2 = sp.csr_matrix((np.ones(len(n2)), (rows2, cols2)), shape=(N, N))
        return U1, U2
    U1 = np.zeros((N, N))
    U2 = np.zeros((N, N))
    U1[rows1, cols1] = 1.0
    U2[rows2, cols2] = 1.0
    return U1, U2


def commutator_expression(B, U1, U2) -> np.ndarray:
    """``1/2 ([U1*, U1 B] + [U2*, U2 B])`` evaluated literally."""

    def comm(U):
        Us = U.conj().T
        UB = U @ B
        # sparse @ dense is dense; dense @ sparse goes through the transpose
        return np.asarray(Us @ UB) - np.asarray((Us.T @ UB.T).T)

    return 0.5 * (comm(U1) + comm(U2))


def _check_upper(B: np.ndarray) -> None:
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    if np.any(np.tril(B, -1) != 0):
        raise ValueError("B must be upper triangular")


def commutator_realize(B, N: int | None = None) -> np.ndarray:
    """Top-left ``N x N`` corner of ``B - 1/2 (U1 B U1* + U2 B U2*)``.

    The corner only involves ``b_{ij}`` with ``i, j <= N``, so it is computed
    by index arithmetic and is exact for the infinite-dimensional operator
    whose corner is ``B``; no truncation of ``U1, U2`` enters.  Compare
    :func:`commutator_expression` with :func:`shift_isometries`, which agrees
    only on indices ``n <= N // 2``.
    """
    B = np.asarray(B)
    _check_upper(B)
    N = B.shape[0] if N is None else N
    if N > B.shape[0]:
        raise ValueError("N exceeds the dimension of B")
    B = B[:N, :N]
    A = B.astype(complex if np.iscomplexobj(B) else float, copy=True)
    # 1-based odd index 2m+1 (m >= 1) is 0-based 2m; even 2m is 0-based 2m-1
    odd = np.arange(2, N, 2)
    even = np.arange(1, N, 2)
    src_odd = odd // 2 - 1
    src_even = (even + 1) // 2 - 1
    A[np.ix_(odd, odd)] -= 0.5 * B[np.ix_(src_odd, src_odd)]
    A[np.ix_(even, even)] -= 0.5 * B[np.ix_(src_even, src_even)]
    return A


def realize_block_means(w: Sequence[float], v: Sequence[float], u: Sequence[float]) -> dict:
    """Upper-triangular ``A`` with ``a_nn = eta_n`` built from ``(w, v, u)``.

    ``C`` comes from :func:`horn_construct` with diagonal ``v`` and singular
    values bounded by ``u``; ``B = C diag(xi / v)`` has diagonal ``xi``; then
    ``A = commutator_realize(B)``.  ``v`` must be positive.
    """
    avg = dyadic_averages(list(map(float, w)))
    L = len(avg.eta)
    v = np.asarray(v, dtype=float)[:L]
    u = np.asarray(u, dtype=float)[:L]
    if np.any(v <= 0):
        raise ValueError("v must be positive")
    C = horn_construct(EigenData.from_values(v), u)
    C[np.diag_indices(L)] = v
    B = C * (np.asarray(avg.xi, dtype=float) / v)[None, :]
    B[np.diag_indices(L)] = avg.xi
    A = commutator_realize(B)
    return {"A": A, "B": B, "C": C, "averages": avg}


def cesaro_moduli(lam) -> list:
    """``|(lambda_1 + ... + lambda_n) / n|`` for ``n = 1..N``."""
    vals = lam.values if isinstance(lam, EigenData) else np.asarray(lam, dtype=complex)
    return list(np.abs(np.cumsum(vals) / np.arange(1, len(vals) + 1)))


@dataclass
class CriterionVerdict:
    member: bool
    search: MembershipResult

    @property
    def verdict(self) -> str:
        return "member-with-witness" if self.member else "not-found-within-bounds"

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "search": self.search.as_dict()}


def com_membership_criterion(lam, J: IdealSpec, bounds: SearchBounds) -> CriterionVerdict:
    """Run the Cesaro-mean spectral criterion through :func:`membership_search`.

    ``lam`` is an :class:`EigenData` (float moduli are dyadic, hence exact
    once rounded) or a :class:`SignedRuns` of exact real eigenvalues already
    listed by decreasing modulus, whose Cesaro means are counted exactly.
    """
    if isinstance(lam, SignedRuns):
        profile = CesaroProfile(lam)
    else:
        x = sorted((Fraction(float(m)) for m in cesaro_moduli(lam)), reverse=True)
        profile = BlockSequence.from_values(x)
    res = membership_search(profile, J, bounds)
    return CriterionVerdict(res.found, res)
