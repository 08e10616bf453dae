"""Dense vector and matrix primitives shared by the Terracini builders.

All tensors are stored as flat vectors. Entry ``(i_1, ..., i_D)`` of a tensor
over ``R^{n_1} x ... x R^{n_D}`` lives at the zero-based offset
``((i_1 * n_2 + i_2) * n_3 + ...) * n_D + i_D``, i.e. the first index varies
slowest. This is the order produced by :func:`numpy.kron` applied left to right.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

UNIT_TOL = 1e-13
ORTHO_TOL = 1e-12


def as_unit_vector(a, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``a`` as a 1-d float array after checking that it has unit norm."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    norm = np.linalg.norm(a)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"vector is not unit norm (|a| = {norm!r})")
    return a


def kron_all(vectors) -> np.ndarray:
    """Kronecker product of a sequence of vectors or matrices, left to right."""
    vectors = list(vectors)
    if not vectors:
        return np.ones(1)
    return reduce(np.kron, vectors)


def outer_power(a, D: int) -> np.ndarray:
    """Vectorization of ``a ⊗ ... ⊗ a`` (``D`` copies), length ``n**D``."""
    if D < 1:
        raise ValueError(f"order must be at least 1, got D={D}")
    a = np.asarray(a, dtype=float)
    return kron_all([a] * D)


def mode_insert(X, a, d: int, D: int) -> np.ndarray:
    """Place the columns of ``X`` in mode ``d`` (1-based) of an order-``D`` tensor.

    Column ``j`` of the result is ``vec(a^{⊗(d-1)} ⊗ x_j ⊗ a^{⊗(D-d)})``.
    """
    if not 1 <= d <= D:
        raise ValueError(f"mode d={d} out of range for order D={D}")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    a = np.asarray(a, dtype=float)
    left = kron_all([a] * (d - 1))[:, None]
    right = kron_all([a] * (D - d))[:, None]
    return np.kron(np.kron(left, X), right)


@dataclass(frozen=True)
class TangentBasis:
    base_point: np.ndarray
    basis: np.ndarray


def householder_complement(a) -> np.ndarray:
    """Columns 2..n of the Householder reflector sending ``a`` to ``±e_1``.

    The sign is ``+`` when ``a[0] >= 0``. The first component of the
    Householder vector is evaluated in cancellation-free form.
    """
    a = np.asarray(a, dtype=float)
    n = a.size
    s = 1.0 if a[0] >= 0 else -1.0
    scale = np.max(np.abs(a[1:]))
    if scale == 0.0:
        return np.eye(n)[:, 1:]
    # Householder vector divided by `scale` so that tiny tails do not underflow;
    # a[0] - s == -|tail|^2 / (a[0] + s) exactly for unit a
    tail = a[1:] / scale
    v = np.empty(n)
    v[0] = -scale * float(tail @ tail) / (a[0] + s)
    v[1:] = tail
    v /= np.linalg.norm(v)
    H = np.eye(n) - 2.0 * np.outer(v, v)
    return H[:, 1:]


def sphere_tangent_basis(a) -> TangentBasis:
    """Orthonormal basis of the tangent space of the unit sphere at ``a``."""
    a = as_unit_vector(a)
    if a.size < 2:
        raise ValueError("the tangent space of the 0-sphere is trivial; need n >= 2")
    return TangentBasis(base_point=a, basis=householder_complement(a))


def helmert_matrix(D: int) -> np.ndarray:
    """Helmert's orthogonal ``D x D`` matrix.

    The first column is ``1/sqrt(D)`` times the all-ones vector; column ``j``
    (for ``j = 1..D-1``) has ``1/sqrt(j(j+1))`` in its first ``j`` entries,
    ``-j/sqrt(j(j+1))`` in entry ``j`` and zeros below.
    """
    if D < 1:
        raise ValueError(f"D must be positive, got {D}")
    H = np.zeros((D, D))
    H[:, 0] = 1.0 / np.sqrt(D)
    for j in range(1, D):
        c = 1.0 / np.sqrt(j * (j + 1))
        H[:j, j] = c
        H[j, j] = -j * c
    return H
