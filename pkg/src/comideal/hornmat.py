"""Upper-triangular matrices with prescribed diagonal and singular-value bounds.

Given eigenvalues ``lambda`` (decreasing modulus) and a decreasing ``s`` with
``|lambda_1 ... lambda_n| <= s_1 ... s_n`` for every ``n``, :func:`horn_construct`
returns an upper-triangular ``A`` with ``diag(A) = lambda`` and
``s_j(A) <= s_j``.

Construction order
------------------
The last singular value is first lowered so that the products agree at
``n = N``.  Then ``lambda_1`` is peeled off: with ``j`` the first index such
that ``s_j >= |lambda_1| >= s_{j+1}``, the pair ``(s_j, s_{j+1})`` is realised
by the 2x2 block ``[[lambda_1, x], [0, mu]]`` where ``mu = s_j s_{j+1} /
|lambda_1|``, and the remaining problem ``(lambda_2, ...)`` with ``s_j, s_{j+1}``
replaced by ``mu`` is solved recursively.  If ``B = P S Q*`` solves it, then
``A = [[lambda_1, x * Q*[j, :]], [0, B]]``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenData",
    "MajorizationResult",
    "SvdCheck",
    "MajorizationError",
    "HornNumericalError",
    "log_majorization_check",
    "horn_construct",
    "svd_verify",
    "weyl_check",
    "random_instance",
]

LOG_TOL = math.log1p(1e-12)
SVD_TOL = 1e-9


class MajorizationError(ValueError):
    """Prescribed singular values do not log-majorize the eigenvalues."""


class HornNumericalError(ArithmeticError):
    """The synthesised matrix missed its singular-value bound."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class EigenData:
    """Eigenvalues with multiplicity, by decreasing modulus.

    Equal moduli are ordered by argument in ``(-pi, pi]``, then by original
    position.  ``order[i]`` is the input position of ``values[i]``.
    """

    values: np.ndarray
    order: tuple[int, ...]

    @classmethod
    def from_values(cls, values) -> "EigenData":
        v = np.asarray(values, dtype=complex).ravel()
        idx = sorted(range(len(v)), key=lambda i: (-abs(v[i]), float(np.angle(v[i])), i))
        out = v[idx].copy()
        out.setflags(write=False)
        return cls(out, tuple(idx))

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.values)

    def __len__(self) -> int:
        return len(self.values)


def _as_eigendata(lam) -> EigenData:
    return lam if isinstance(lam, EigenData) else EigenData.from_values(lam)


def _as_decreasing(s) -> np.ndarray:
    s = np.asarray(s, dtype=float).ravel()
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise ValueError("s must be nonnegative and decreasing")
    return s


@dataclass(frozen=True)
class MajorizationResult:
    ok: bool
    first_failure: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def _log_slack(*terms: float) -> float:
    # relative tolerance plus a few ulps of the accumulated logs
    return LOG_TOL + 4 * sys.float_info.epsilon * sum(abs(t) for t in terms)


def _prefix_logs(b: np.ndarray):
    """Running ``(#zeros, sum of logs of nonzero terms)`` of ``b``."""
    z, acc = 0, 0.0
    for y in b:
        if y == 0:
            z += 1
        else:
            acc += math.log(y)
        yield z, acc


def log_majorization_check(lam, s) -> MajorizationResult:
    """Is ``|lambda_1 ... lambda_n| <= s_1 ... s_n`` for every ``n``?"""
    lam = _as_eigendata(lam)
    s = _as_decreasing(s)
    if len(lam) != len(s):
        raise ValueError("length mismatch")
    za, la = 0, 0.0
    for n, (x, (zb, lb)) in enumerate(zip(lam.moduli, _prefix_logs(s)), start=1):
        if x == 0:
            za += 1
        else:
            la += math.log(x)
        if za:
            continue
        if zb or la - lb > _log_slack(la, lb):
            return MajorizationResult(False, n)
    return MajorizationResult(True)


def weyl_check(lam, s) -> MajorizationResult:
    """Is ``|lambda_n| <= (s_1 ... s_n)**(1/n)`` for every ``n``?"""
    lam = _as_eigendata(lam)
    s = _as_decreasing(s)
    if len(lam) != len(s):
        raise ValueError("length mismatch")
    for n, (x, (zb, lb)) in enumerate(zip(lam.moduli, _prefix_logs(s)), start=1):
        if x == 0:
            continue
        lx = math.log(x)
        if zb or lx - lb / n > _log_slack(lx, lb / n):
            return MajorizationResult(False, n)
    return MajorizationResult(True)


@dataclass(frozen=True)
class SvdCheck:
    ok: bool
    max_violation: float
    singular_values: np.ndarray

    def __bool__(self) -> bool:
        return self.ok


def svd_verify(A, s, tol: float = SVD_TOL) -> SvdCheck:
    """Check ``s_j(A) <= s_j (1 + tol)`` for every ``j``.

    An absolute slack of ``N * eps * s_1`` absorbs the rounding of the SVD
    itself when some prescribed ``s_j`` is zero.
    """
    A = np.asarray(A, dtype=complex)
    s = _as_decreasing(s)
    if A.shape != (len(s), len(s)):
        raise ValueError("dimension mismatch")
    sv = np.linalg.svd(A, compute_uv=False)
    floor = len(s) * sys.float_info.epsilon * (s[0] if len(s) else 0.0)
    bound = s * (1 + tol) + floor
    excess = sv - s
    return SvdCheck(bool(np.all(sv <= bound)), float(max(0.0, excess.max(initial=0.0))), sv)


def _boundary_s(lam_abs: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Lower ``s_N`` until the full products agree."""
    s = s.copy()
    N = len(s)
    if np.any(lam_abs == 0):
        s[-1] = 0.0
        return s
    head = s[:-1]
    if np.any(head == 0):
        raise MajorizationError("nonzero eigenvalues need nonzero singular values")
    log_last = np.sum(np.log(lam_abs)) - np.sum(np.log(head))
    s[-1] = min(s[-1], math.exp(log_last)) if N > 1 else lam_abs[0]
    return s


def _horn(lam: np.ndarray, s: np.ndarray) -> np.ndarray:
    N = len(lam)
    A = np.zeros((N, N), dtype=complex)
    if N == 1:
        A[0, 0] = lam[0]
        return A
    r = abs(lam[0])
    if r == 0:
        # all eigenvalues vanish: a weighted shift
        A[np.arange(N - 1), np.arange(1, N)] = s[: N - 1]
        return A
    j = next((i for i in range(N - 1) if s[i] >= r >= s[i + 1]), None)
    if j is None:
        # only reachable through rounding at the boundary
        j = 0 if r > s[0] else N - 2
    mu = s[j] * s[j + 1] / r
    x = math.sqrt(max(0.0, s[j] ** 2 + s[j + 1] ** 2 - r * r - mu * mu))
    s_hat = np.concatenate([s[:j], [mu], s[j + 2 :]])
    s_hat = np.minimum.accumulate(s_hat)  # guard monotonicity against rounding
    B = _horn(lam[1:], s_hat)
    _, _, Qh = np.linalg.svd(B)
    A[0, 0] = lam[0]
    A[0, 1:] = x * Qh[j, :]
    A[1:, 1:] = B
    return A


def horn_construct(lam, s, tol: float = SVD_TOL, verify: bool = True) -> np.ndarray:
    """Upper-triangular ``A`` with ``diag(A) = lambda`` and ``s_j(A) <= s_j``.

    Parameters
    ----------
    lam : EigenData or array_like
        Eigenvalues; reordered by decreasing modulus if given as an array.
    s : array_like
        Decreasing nonnegative bounds with ``len(s) == len(lam)``.
    tol : float
        Relative slack for the final singular-value check.
    verify : bool
        Run :func:`svd_verify` and raise on failure.

    Returns
    -------
    numpy.ndarray
        Complex ``N x N`` matrix, exactly zero below the diagonal, whose
        diagonal holds the stored eigenvalues bit for bit.
    """
    lam = _as_eigendata(lam)
    s = _as_decreasing(s)
    if len(lam) != len(s):
        raise ValueError("length mismatch")
    chk = log_majorization_check(lam, s)
    if not chk:
        raise MajorizationError(f"log-majorization fails at n={chk.first_failure}")
    target = _boundary_s(lam.moduli, s)
    A = _horn(np.asarray(lam.values), target)
    A[np.tril_indices(len(s), -1)] = 0
    A[np.diag_indices(len(s))] = lam.values
    if verify:
        res = svd_verify(A, s, tol)
        if not res:
            raise HornNumericalError("singular values exceed the prescribed bound", res.max_violation)
    return A


def random_instance(rng: np.random.Generator, N: int, shrink: bool = True) -> tuple[EigenData, np.ndarray]:
    """Eigenvalues and singular values of a random complex matrix.

    Weyl's inequalities make every such pair admissible; with ``shrink`` the
    eigenvalues are additionally scaled into the interior at random.
    """
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    lam = np.linalg.eigvals(X)
    s = np.linalg.svd(X, compute_uv=False)
    if shrink and rng.random() < 0.5:
        lam = lam * rng.uniform(0.1, 1.0)
        if rng.random() < 0.3:
            lam[rng.integers(N)] = 0
    return EigenData.from_values(lam), s
