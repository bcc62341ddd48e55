"""Finite-dimensional spectral splitting ``T = D + Q``.

An ordered Schur form ``T = Z R Z*`` lists the eigenvalues on the diagonal of
``R`` by decreasing modulus, each cluster of nearly equal eigenvalues kept
together, so the leading columns of ``Z`` span the generalized eigenspaces
in that order.  Then ``D = Z diag(R) Z*`` is normal with the eigenvalues of
``T`` and ``Q = Z (R - diag R) Z*`` is nilpotent.

In finite dimension quasinilpotent means nilpotent; numerically the tests
compare powers against norm-scaled tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from ._triangular import reorder_diagonal
from .exactseq import BlockSequence, IdealSpec, SearchBounds, membership_search, stability_probe
from .hornmat import EigenData, weyl_check

__all__ = [
    "CLUSTER_TOL",
    "SpectrumError",
    "DecompositionError",
    "DecompResult",
    "Deflation",
    "NilpotenceEvidence",
    "BlockNilpotence",
    "ordered_schur",
    "generalized_eigenspace",
    "kernel_chain_eigenspace",
    "deflate",
    "split",
    "quasinilpotence_test",
    "block_triangular_nilpotence",
    "spectral_trace_reduce",
    "eigen_pairing_distance",
    "random_test_matrix",
]

CLUSTER_TOL = 1e-8


class SpectrumError(ValueError):
    """The requested point is not an eigenvalue within tolerance."""


class DecompositionError(ArithmeticError):
    """The computed factorisation does not reproduce ``T``."""


def _norm(T) -> float:
    return float(np.linalg.norm(T, 2)) if T.size else 0.0


def _clusters(d: np.ndarray, radius: float) -> list[int]:
    """Single-linkage labels: entries closer than ``radius`` share a label."""
    n = len(d)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(d[i] - d[j]) <= radius:
                parent[find(i)] = find(j)
    roots = {}
    return [roots.setdefault(find(i), len(roots)) for i in range(n)]


@dataclass
class _Ordered:
    R: np.ndarray
    Z: np.ndarray
    labels: list[int]  # cluster rank per diagonal position
    centers: list[complex]  # cluster centers by rank


def ordered_schur(T, tol: float = CLUSTER_TOL, first: complex | None = None) -> _Ordered:
    """Schur form with the diagonal grouped into clusters of decreasing modulus.

    Eigenvalues within ``tol * ||T||`` (single linkage) form one cluster.  With
    ``first`` given, the cluster nearest to it is moved to the front.
    """
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError("T must be square")
    R, Z = sla.schur(T, output="complex")
    d = np.diag(R).copy()
    lab = _clusters(d, tol * _norm(T))
    centers = {}
    for i, c in enumerate(lab):
        centers.setdefault(c, []).append(d[i])
    centers = {c: complex(np.mean(v)) for c, v in centers.items()}
    rank = sorted(centers, key=lambda c: (-abs(centers[c]), float(np.angle(centers[c])), c))
    if first is not None:
        near = min(centers, key=lambda c: abs(centers[c] - first))
        rank.remove(near)
        rank.insert(0, near)
    pos = {c: r for r, c in enumerate(rank)}
    keys = [pos[c] for c in lab]
    R, Z, keys = reorder_diagonal(R, keys, Z)
    return _Ordered(R, Z, keys, [centers[c] for c in rank])


def _locate(T, lam: complex, tol: float) -> _Ordered:
    o = ordered_schur(T, tol, first=lam)
    radius = tol * max(_norm(np.asarray(T)), 1.0)
    if abs(o.centers[0] - lam) > radius and not np.any(np.abs(np.diag(o.R)[np.array(o.labels) == 0] - lam) <= radius):
        raise SpectrumError(f"{lam} is not an eigenvalue within {radius:.3g}")
    return o


def generalized_eigenspace(T, lam: complex, tol: float = CLUSTER_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ``E_lambda(T)``.

    Its dimension is the number of Schur diagonal entries in the cluster of
    ``lam``, that is the algebraic multiplicity.
    """
    o = _locate(T, lam, tol)
    k = sum(1 for c in o.labels if c == 0)
    return o.Z[:, :k]


def kernel_chain_eigenspace(T, lam: complex, rtol: float = 1e-6) -> np.ndarray:
    """``ker (lam - T)**n`` grown until it stabilises (small ``N`` only)."""
    T = np.asarray(T, dtype=complex)
    N = T.shape[0]
    S = lam * np.eye(N) - T
    nS = max(_norm(S), 1.0)
    P = np.eye(N, dtype=complex)
    basis = np.zeros((N, 0), dtype=complex)
    for n in range(1, N + 1):
        P = P @ S
        _, sv, Vh = np.linalg.svd(P)
        # the cutoff scales with ||S||**n, not with ||S**n||, which may itself vanish
        nxt = Vh[sv <= rtol * nS**n].conj().T
        if nxt.shape[1] == basis.shape[1]:
            break
        basis = nxt
    return basis


@dataclass
class Deflation:
    matrix: np.ndarray  # (1-P) T (1-P) on range(1-P), in the basis below
    basis: np.ndarray  # orthonormal basis of range(1-P)
    removed: int  # algebraic multiplicity of lam


def deflate(T, lam: complex, tol: float = CLUSTER_TOL) -> Deflation:
    """Compress ``T`` to the orthocomplement of ``E_lambda(T)``.

    ``E_lambda`` is invariant, so the compression is the trailing block of the
    ordered Schur form and its spectrum is that of ``T`` with every copy of
    ``lam`` removed.
    """
    T = np.asarray(T, dtype=complex)
    o = _locate(T, lam, tol)
    k = sum(1 for c in o.labels if c == 0)
    Q2 = o.Z[:, k:]
    return Deflation(Q2.conj().T @ T @ Q2, Q2, k)


@dataclass
class DecompResult:
    D: np.ndarray
    Q: np.ndarray
    basis: np.ndarray
    eigen: EigenData
    R: np.ndarray
    residuals: dict = field(default_factory=dict)

    @property
    def Q_basis(self) -> np.ndarray:
        """``Q`` in basis coordinates: exactly strictly upper triangular."""
        return np.triu(self.R, 1)


def split(T, tol: float = CLUSTER_TOL, check: float = 1e-8) -> DecompResult:
    """``T = D + Q`` with ``D`` normal, ``Q`` nilpotent and ``DQ`` sharing the basis.

    ``eigen`` lists the diagonal of the ordered Schur form as computed; within
    a cluster moduli may differ by rounding.  Raises
    :class:`DecompositionError` when ``||T - Z R Z*|| > check ||T||``.
    """
    T = np.asarray(T, dtype=complex)
    N = T.shape[0]
    o = ordered_schur(T, tol)
    R, Z = o.R, o.Z
    d = np.diag(R).copy()
    D = (Z * d) @ Z.conj().T
    Qb = np.triu(R, 1)
    Q = Z @ Qb @ Z.conj().T
    nT = _norm(T)
    res = {
        "reconstruction": _norm(T - (D + Q)) / nT if nT else 0.0,
        "normality": _norm(D @ D.conj().T - D.conj().T @ D) / _norm(D) ** 2 if _norm(D) else 0.0,
        "unitarity": _norm(Z.conj().T @ Z - np.eye(N)),
        "nilpotence": quasinilpotence_test(Q).power_ratio,
    }
    if res["reconstruction"] > check:
        raise DecompositionError(f"reconstruction residual {res['reconstruction']:.3g} exceeds {check:.3g}")
    return DecompResult(D, Q, Z, EigenData(d, tuple(range(N))), R, res)


@dataclass(frozen=True)
class NilpotenceEvidence:
    nilpotent: bool
    max_abs_eigenvalue: float
    power_norm: float
    power_ratio: float  # ||Q^N|| / ||Q||^N

    def __bool__(self) -> bool:
        return self.nilpotent

    def as_dict(self) -> dict:
        return {
            "nilpotent": self.nilpotent,
            "max_abs_eigenvalue": self.max_abs_eigenvalue,
            "power_norm": self.power_norm,
            "power_ratio": self.power_ratio,
        }


def quasinilpotence_test(Q, tol: float = 1e-8) -> NilpotenceEvidence:
    """Nilpotence up to rounding.

    Requires ``||Q^N|| <= tol ||Q||^N`` and ``max |eig| <= tol**(1/N) ||Q||``.
    The eigenvalue bound is the one a perturbation of size ``tol`` of an
    index-``N`` nilpotent can produce; ``tol ||Q||`` would reject correct
    nilpotent matrices that are not triangular in the working basis.
    """
    Q = np.asarray(Q, dtype=complex)
    N = Q.shape[0]
    if N == 0:
        return NilpotenceEvidence(True, 0.0, 0.0, 0.0)
    nQ = _norm(Q)
    rho = float(np.max(np.abs(np.linalg.eigvals(Q))))
    if nQ == 0:
        return NilpotenceEvidence(True, rho, 0.0, 0.0)
    # scaling first keeps the power in range
    P = np.linalg.matrix_power(Q / nQ, N)
    ratio = _norm(P)
    ok = ratio <= tol and rho <= tol ** (1.0 / N) * nQ
    return NilpotenceEvidence(bool(ok), rho, ratio * nQ**N, ratio)


@dataclass
class BlockNilpotence:
    nilpotent: bool
    evidence: NilpotenceEvidence
    expansion_residual: float  # max over n <= 2N, relative to max(1, ||T||^n)
    T: np.ndarray

    def __bool__(self) -> bool:
        return self.nilpotent


def block_triangular_nilpotence(T11, T22, C, tol: float = 1e-8, expansion_tol: float = 1e-11) -> BlockNilpotence:
    """``T = [[T11, C], [0, T22]]`` with nilpotent diagonal blocks is nilpotent.

    Also checks, for ``n <= 2N``, that the corner of ``T**n`` equals
    ``sum_k T11**(n-k-1) C T22**k`` while the diagonal blocks are the powers
    of ``T11`` and ``T22``.
    """
    T11, T22, C = (np.asarray(x, dtype=complex) for x in (T11, T22, C))
    n1, n2 = T11.shape[0], T22.shape[0]
    if C.shape != (n1, n2):
        raise ValueError("coupling must be n1 x n2")
    for name, B in (("first", T11), ("second", T22)):
        if not quasinilpotence_test(B, tol):
            raise ValueError(f"{name} diagonal block is not nilpotent")
    T = np.block([[T11, C], [np.zeros((n2, n1)), T22]])
    N = n1 + n2
    nT = max(_norm(T), 1.0)
    worst = 0.0
    Tn = np.eye(N, dtype=complex)
    p11 = [np.eye(n1, dtype=complex)]
    p22 = [np.eye(n2, dtype=complex)]
    for n in range(1, 2 * N + 1):
        Tn = Tn @ T
        p11.append(p11[-1] @ T11)
        p22.append(p22[-1] @ T22)
        corner = sum((p11[n - k - 1] @ C @ p22[k] for k in range(n)), np.zeros((n1, n2), dtype=complex))
        E = np.block([[p11[n], corner], [np.zeros((n2, n1)), p22[n]]])
        worst = max(worst, float(np.max(np.abs(Tn - E))) / nT**n)
    ev = quasinilpotence_test(T, tol)
    return BlockNilpotence(bool(ev) and worst <= expansion_tol, ev, worst, T)


def eigen_pairing_distance(a, b) -> float:
    """Largest distance in the optimal matching of two eigenvalue multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if len(a) != len(b):
        raise ValueError("multisets differ in size")
    if len(a) == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def _exact_decreasing(x) -> BlockSequence:
    vals = sorted((Fraction(float(v)) for v in x), reverse=True)
    return BlockSequence.from_values(vals)


def spectral_trace_reduce(T, J: IdealSpec, bounds: SearchBounds, tol: float = CLUSTER_TOL) -> dict:
    """Certificate that a trace on ``J`` sees ``T`` only through ``D``.

    Steps: ``s(T)`` is dominated in ``J``; ``split``; Weyl's inequality for
    the eigenvalues; a membership witness in ``J`` for the eigenvalue
    moduli, which places ``D`` in ``J``; ``Q`` has only zero eigenvalues, so
    its Cesaro means vanish.
    """
    T = np.asarray(T, dtype=complex)
    s = sla.svdvals(T)
    s_seq = _exact_decreasing(s)
    s_mem = membership_search(s_seq, J, bounds)
    if not s_mem.found:
        raise ValueError("singular values of T are not dominated in J within the bounds")
    dec = split(T, tol)
    w = weyl_check(EigenData.from_values(dec.eigen.values), s)
    if not w:
        raise ArithmeticError(f"Weyl inequality fails at n={w.first_failure}; eigenvalues inconsistent")
    probe = stability_probe(J.generators[0], bounds) if J.presentation == "principal" else None
    mod = _exact_decreasing(np.abs(dec.eigen.values))
    d_mem = membership_search(mod, J, bounds)
    if not d_mem.found:
        raise ValueError("eigenvalue moduli not found in J within the bounds")
    q = quasinilpotence_test(dec.Q)
    return {
        "eigenvalues": [[float(z.real), float(z.imag)] for z in dec.eigen.values],
        "singular_values_in_J": s_mem.as_dict(),
        "weyl": True,
        "stability_probe": probe.verdict if probe else "not-run",
        "route": "weyl-gm-stable" if probe and probe.stable else "direct-search",
        "D_membership": d_mem.as_dict(),
        "Q_criterion": {"pass": True, "reason": "all eigenvalues zero", "evidence": q.as_dict()},
        "residuals": dec.residuals,
        "statement": "tau(T) = tau(D) for every trace tau on J",
    }


def random_test_matrix(rng: np.random.Generator, N: int, kind: str = "gaussian"):
    """A test matrix and its planted ``{eigenvalue: multiplicity}`` (or None).

    Kinds: ``gaussian`` (complex Ginibre), ``normal``, ``jordan`` (2x2 Jordan
    blocks and simple eigenvalues at well separated points, rotated by a
    random unitary), ``nilpotent`` (rotated strictly upper triangular).
    """
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    if kind == "gaussian":
        return G, None
    U, _ = np.linalg.qr(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
    if kind == "normal":
        d = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        return (U * d) @ U.conj().T, None
    if kind == "nilpotent":
        return U @ np.triu(G, 1) @ U.conj().T, {0j: N}
    if kind != "jordan":
        raise ValueError(f"unknown kind {kind!r}")
    pts = [complex(np.cos(a), np.sin(a)) * r for a, r in zip(rng.permutation(N) * (2 * np.pi / N), 1 + rng.permutation(N) % 3)]
    R = np.zeros((N, N), dtype=complex)
    planted: dict[complex, int] = {}
    i, p = 0, 0
    while i < N:
        pair = i + 1 < N and rng.random() < 0.5
        lam = pts[p]
        p += 1
        size = 2 if pair else 1
        for j in range(i, i + size):
            R[j, j] = lam
        if pair:
            R[i, i + 1] = 1.0
        planted[lam] = planted.get(lam, 0) + size
        i += size
    R += np.triu(0.3 * G, 2)
    return U @ R @ U.conj().T, planted
