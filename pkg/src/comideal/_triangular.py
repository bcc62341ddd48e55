"""Reordering the diagonal of an upper-triangular matrix by unitary similarity."""

from __future__ import annotations

import numpy as np

__all__ = ["swap_adjacent", "reorder_diagonal"]


def swap_adjacent(T: np.ndarray, Z: np.ndarray | None, i: int) -> None:
    """Exchange ``T[i, i]`` and ``T[i+1, i+1]`` in place by a plane rotation.

    ``T`` stays upper triangular (the new subdiagonal entry is set to zero)
    and the two diagonal entries are written back exactly.  ``Z`` (if given)
    accumulates the rotation so that ``Z T Z*`` is invariant.
    """
    a, b = T[i, i], T[i + 1, i + 1]
    x = np.array([T[i, i + 1], b - a])
    nx = np.linalg.norm(x)
    if nx == 0:
        return
    c1, c2 = x / nx
    # columns: eigenvector of the 2x2 block for b, then its complement
    G = np.array([[c1, -np.conj(c2)], [c2, np.conj(c1)]])
    idx = [i, i + 1]
    T[:, idx] = T[:, idx] @ G
    T[idx, :] = G.conj().T @ T[idx, :]
    T[i + 1, i] = 0
    T[i, i], T[i + 1, i + 1] = b, a
    if Z is not None:
        Z[:, idx] = Z[:, idx] @ G


def reorder_diagonal(T: np.ndarray, keys, Z: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray, list]:
    """Sort the diagonal of upper-triangular ``T`` by ``keys`` (stable bubble sort).

    Returns ``(T', Z', keys')`` with ``T = Z' T' Z'^*`` when ``Z`` is None,
    otherwise ``Z' = Z . rotations``.
    """
    T = np.array(T, dtype=complex)
    n = T.shape[0]
    Z = np.eye(n, dtype=complex) if Z is None else np.array(Z, dtype=complex)
    keys = list(keys)
    changed = True
    while changed:
        changed = False
        for i in range(n - 1):
            if keys[i + 1] < keys[i]:
                if T[i, i] != T[i + 1, i + 1]:
                    swap_adjacent(T, Z, i)
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                changed = True
    return T, Z, keys
