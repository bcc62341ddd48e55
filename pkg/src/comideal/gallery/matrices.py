"""Finite sections of the constructed operators as dense matrices.

Entries are doubles, so every exponent met in the section must stay well
inside the float range and the section is at most a few thousand wide.  The
default schedule qualifies for its first 255 indices.
"""

from __future__ import annotations

import numpy as np

from .._triangular import reorder_diagonal
from ..commlab import realize_block_means
from ..hornmat import EigenData, horn_construct, svd_verify
from .ex15 import Ex15Bundle

__all__ = ["MatrixScaleError", "assemble_ex15_matrices", "assemble_thm13_matrices"]

MAX_DIM = 4096
MAX_EXPONENT = 900
DEFAULT_SECTION = 255


class MatrixScaleError(OverflowError):
    """Values or dimensions beyond dense floating-point matrices."""


def _check_scale(N: int, exponents) -> None:
    if N > MAX_DIM:
        raise MatrixScaleError(f"section of size {N} is too large; use a mild schedule")
    worst = max((abs(e) for e in exponents), default=0)
    if worst > MAX_EXPONENT:
        raise MatrixScaleError(f"exponent {worst} overflows doubles; use a mild schedule")


def assemble_ex15_matrices(b: Ex15Bundle, N: int | None = None, route: str = "commutator") -> dict:
    """``A`` upper triangular with ``diag(A) = w``, ``W = diag(w)``, ``T = A - W``.

    ``route="commutator"`` builds ``A`` through the two-commutator realisation
    plus the diagonal correction ``diag(w - eta)``; ``route="horn"`` uses the
    upper-triangular construction with singular values bounded by ``u`` and
    rotates the diagonal into index order.  Either way ``T`` is strictly upper
    triangular, hence ``T**N = 0``.
    """
    N = DEFAULT_SECTION if N is None else N
    if N > b.limit:
        raise ValueError(f"N exceeds the {b.limit} indices where u and v are defined")
    wd = b.w_values(N)
    _check_scale(N, [_exp(x) for x in wd])
    w = [x.fraction() for x in wd]
    wf = np.array([float(x) for x in w])
    u = np.array([float(b.u.value_at(k)) for k in range(1, N + 1)])
    if route == "commutator":
        if N & (N + 1):
            raise ValueError("the commutator route needs N = 2**K - 1")
        v = np.array([float(b.v.value_at(k)) for k in range(1, N + 1)])
        parts = realize_block_means(wf, v, u)
        A = parts["A"].astype(complex)
        A[np.diag_indices(N)] += wf - np.asarray(parts["averages"].eta, dtype=float)
    elif route == "horn":
        lam = EigenData.from_values(wf)
        A0 = horn_construct(lam, u)
        A, _, _ = reorder_diagonal(A0, list(lam.order))
    else:
        raise ValueError(f"unknown route {route!r}")
    A[np.tril_indices(N, -1)] = 0
    A[np.diag_indices(N)] = wf
    W = np.diag(wf).astype(complex)
    T = A - W
    return {
        "A": A,
        "W": W,
        "T": T,
        "route": route,
        "N": N,
        "conforming": b.conforming,
        "strictly_upper": bool(np.all(np.tril(T) == 0)),
        "T_pow_N_zero": bool(np.all(np.linalg.matrix_power(T, N) == 0)),
        "svd_vs_u": svd_verify(A, u, 1e-9).ok if route == "horn" else None,
    }


def assemble_thm13_matrices(bundle, N: int) -> dict:
    """``T = (A + D1) (+) (-A - D2)`` on an ``N``-dimensional section of each summand.

    ``A`` is upper triangular with ``diag(A) = w`` (the block values
    ``wbar``) and ``s_j(A) <= t_j``; ``D1 = diag(mu)``, ``D2 = diag(nu)``.
    The eigenvalues of ``T`` are ``{w_k + mu_k}`` and ``{-w_k - nu_k}``, and
    those of ``D1 (+) -D2`` are the entries of ``lambda'``.
    """
    from .thm13 import Thm13Bundle

    if not isinstance(bundle, Thm13Bundle):
        raise TypeError("expects a Thm13Bundle")
    if N > bundle.mu.coverage:
        raise ValueError(f"N exceeds the {bundle.mu.coverage} built indices")
    ks = range(1, N + 1)
    mu = [bundle.mu.value_at(k) for k in ks]
    nu = [bundle.nu.value_at(k) for k in ks]
    w = [bundle.w.value_at(k) for k in ks]
    t = [bundle.t.value_at(k) for k in ks]
    _check_scale(N, [_exp(x) for x in mu + nu + w + t])
    muf, nuf, wf, tf = (np.array([float(x) for x in xs]) for xs in (mu, nu, w, t))
    A = horn_construct(EigenData.from_values(wf), tf)
    A[np.tril_indices(N, -1)] = 0
    A[np.diag_indices(N)] = wf
    D1, D2 = np.diag(muf), np.diag(nuf)
    Z = np.zeros((N, N))
    T = np.block([[A + D1, Z], [Z, -A - D2]])
    expected = np.sort(np.concatenate([wf + muf, -wf - nuf]))
    eig = np.sort(np.linalg.eigvals(T).real)
    lam_prime = np.sort(np.concatenate([muf, -nuf]))
    eig_d = np.sort(np.linalg.eigvals(np.block([[D1, Z], [Z, -D2]])).real)
    out = {
        "A": A,
        "D1": D1,
        "D2": D2,
        "T": T,
        "N": N,
        "svd_vs_t": svd_verify(A, tf, 1e-9).ok,
        "eig_T_error": float(np.max(np.abs(eig - expected))),
        "eig_D_error": float(np.max(np.abs(eig_d - lam_prime))),
    }
    # At a block end the first 2N entries of lambda are exactly these eigenvalues.
    if N in bundle.m:
        ref = np.sort([float(bundle.lam.value_at(k)) for k in range(1, 2 * N + 1)])
        out["eig_T_vs_lambda"] = float(np.max(np.abs(eig - ref)))
    return out


def _exp(x) -> int:
    from fractions import Fraction

    f = Fraction(x)
    if f == 0:
        return 0
    return abs(f.numerator.bit_length() - f.denominator.bit_length())
