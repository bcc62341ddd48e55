"""JSON form of dense complex matrices: rows of ``[re, im]`` pairs."""

from __future__ import annotations

import numpy as np

__all__ = ["matrix_to_json", "matrix_from_json", "vector_to_json", "vector_from_json"]


def vector_to_json(v) -> list[list[float]]:
    v = np.asarray(v, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in v]


def vector_from_json(data) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data], dtype=complex)


def matrix_to_json(A) -> list[list[list[float]]]:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return [vector_to_json(row) for row in A]


def matrix_from_json(data) -> np.ndarray:
    A = np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix JSON must be a square array of [re, im] pairs")
    return A
