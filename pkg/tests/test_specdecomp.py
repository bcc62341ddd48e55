import numpy as np
import pytest

from comideal.exactseq import BlockSequence, Dyadic, IdealSpec, SearchBounds
from comideal.specdecomp import (
    DecompositionError,
    SpectrumError,
    block_triangular_nilpotence,
    deflate,
    eigen_pairing_distance,
    generalized_eigenspace,
    kernel_chain_eigenspace,
    quasinilpotence_test,
    random_test_matrix,
    spectral_trace_reduce,
    split,
)


def proj(V):
    return V @ V.conj().T


def test_eigenspace_diagonal():
    V = generalized_eigenspace(np.diag([2.0, 3.0]), 2.0)
    assert V.shape == (2, 1)
    assert np.allclose(np.abs(V[:, 0]), [1, 0])


def test_eigenspace_jordan_block():
    assert generalized_eigenspace(np.array([[5.0, 1.0], [0.0, 5.0]]), 5.0).shape[1] == 2


def test_eigenspace_rejects_non_eigenvalue():
    with pytest.raises(SpectrumError):
        generalized_eigenspace(np.diag([1.0, 2.0]), 1.5)


def test_planted_jordan_recovered_and_matches_kernel_chain():
    rng = np.random.default_rng(2)
    for _ in range(40):
        N = int(rng.integers(2, 9))
        T, planted = random_test_matrix(rng, N, "jordan")
        for lam, mult in planted.items():
            V = generalized_eigenspace(T, lam, tol=1e-6)
            assert V.shape[1] == mult
            W = kernel_chain_eigenspace(T, lam)
            assert W.shape[1] == mult
            assert np.max(np.abs(proj(V) - proj(W))) < 1e-5


def test_deflate_examples():
    d = deflate(np.diag([1.0, 2.0, 3.0]), 2.0)
    assert np.allclose(sorted(np.linalg.eigvals(d.matrix).real), [1, 3])
    T = np.array([[5.0, 1, 0], [0, 5, 0], [0, 0, 7]])
    d = deflate(T, 5.0)
    assert d.removed == 2 and np.allclose(np.linalg.eigvals(d.matrix), [7])


def test_deflate_random_multiset():
    rng = np.random.default_rng(3)
    for _ in range(50):
        N = int(rng.integers(1, 11))
        T, _ = random_test_matrix(rng, N, "gaussian")
        ev = np.linalg.eigvals(T)
        lam = ev[rng.integers(N)]
        d = deflate(T, lam)
        rest = np.delete(ev, np.argmin(np.abs(ev - lam)))
        got = np.linalg.eigvals(d.matrix) if d.matrix.size else np.zeros(0)
        assert eigen_pairing_distance(got, rest) <= 1e-7 * np.linalg.norm(T, 2)


def test_deflating_everything_leaves_nothing():
    rng = np.random.default_rng(4)
    T, _ = random_test_matrix(rng, 8, "jordan")
    M = T
    while M.shape[0]:
        M = deflate(M, np.linalg.eigvals(M)[0], 1e-6).matrix
    assert M.shape == (0, 0)


def test_split_normal_and_jordan():
    rng = np.random.default_rng(5)
    T, _ = random_test_matrix(rng, 6, "normal")
    r = split(T)
    assert np.max(np.abs(r.Q)) < 1e-12 and np.allclose(r.D, T)
    r = split(np.array([[3.0, 1.0], [0.0, 3.0]]))
    assert np.allclose(r.D, 3 * np.eye(2)) and np.allclose(r.Q, [[0, 1], [0, 0]])


def test_split_invariants_random():
    rng = np.random.default_rng(6)
    for i in range(60):
        kind = ("gaussian", "normal", "jordan")[i % 3]
        T, planted = random_test_matrix(rng, int(rng.integers(1, 13)), kind)
        r = split(T)
        assert r.residuals["reconstruction"] <= 1e-10
        assert r.residuals["normality"] <= 1e-10
        assert np.all(np.tril(r.Q_basis) == 0)
        assert quasinilpotence_test(r.Q)
        moduli = np.abs(np.diag(r.R))
        assert np.all(np.diff(moduli) <= 1e-6 * max(1.0, moduli.max()))


def test_split_reports_bad_reconstruction(monkeypatch):
    import comideal.specdecomp as sd

    real = sd.ordered_schur

    def broken(T, tol=sd.CLUSTER_TOL, first=None):
        o = real(T, tol, first)
        o.R = o.R + 1.0
        return o

    monkeypatch.setattr(sd, "ordered_schur", broken)
    with pytest.raises(DecompositionError):
        split(np.diag([1.0, 2.0]))


def test_quasinilpotence():
    assert quasinilpotence_test(np.triu(np.ones((5, 5)), 1))
    ev = quasinilpotence_test(np.eye(3))
    assert not ev and ev.max_abs_eigenvalue == pytest.approx(1.0)
    assert quasinilpotence_test(np.zeros((3, 3)))


def test_block_nilpotence():
    rng = np.random.default_rng(7)
    z = block_triangular_nilpotence(np.zeros((2, 2)), np.zeros((3, 3)), rng.standard_normal((2, 3)))
    assert z.nilpotent
    J3 = np.diag(np.ones(2), 1)
    J2 = np.diag(np.ones(1), 1)
    C = rng.standard_normal((3, 2))
    a = block_triangular_nilpotence(J3, J2, C)
    b = block_triangular_nilpotence(J2.T, J3.T, C.T)
    assert a.nilpotent and b.nilpotent
    assert a.expansion_residual <= 1e-11
    with pytest.raises(ValueError):
        block_triangular_nilpotence(np.eye(2), J2, rng.standard_normal((2, 2)))


def test_trace_certificate():
    u = BlockSequence([(Dyadic.pow2(-k), 1) for k in range(1, 33)])
    J = IdealSpec.principal(u)
    N = 8
    d = 2.0 ** -np.arange(1, N + 1)
    T = np.diag(d) + np.diag(d[1:] / 8, 1)
    c = spectral_trace_reduce(T, J, SearchBounds(4, 4, 32))
    assert c["weyl"] and c["D_membership"]["found"] and c["Q_criterion"]["pass"]
    # a normal T gives D = T and Q = 0
    c = spectral_trace_reduce(np.diag(d), J, SearchBounds(4, 4, 32))
    assert c["Q_criterion"]["evidence"]["power_norm"] == 0.0


def test_trace_certificate_needs_singular_values_in_J():
    u = BlockSequence([(Dyadic.pow2(-k), 1) for k in range(1, 9)])
    with pytest.raises(ValueError):
        spectral_trace_reduce(np.eye(8), IdealSpec.principal(u), SearchBounds(2, 1, 8))
