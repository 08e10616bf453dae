"""Closed-form condition numbers of rank-2 Waring decompositions and the
Gramian identities behind them.

For two summands with directions ``u, v`` and ``alpha = <u, v>``, the CPD and
Waring condition numbers coincide when ``D >= 3`` and depend only on
``alpha`` and ``D``. These functions are used as oracles for the SVD path.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .tensor_core import as_unit_vector, helmert_matrix, mode_insert, outer_power
from .terracini import default_tangent_basis, symmetric_tangent


@dataclass(frozen=True)
class Rank2ClosedForm:
    alpha: float
    D: int
    gperp_eigs: tuple[float, float, float, float]
    tau: float
    delta: float
    zprime_eigs: tuple[float, float]
    gs_extreme_eigs: tuple[float, float]
    kappa: float


@lru_cache(maxsize=None)
def _det_quotient(D: int) -> tuple[int, ...]:
    """Ascending integer coefficients of ``det(I - Z'(x)) / (1 - x)^3``.

    The determinant vanishes to third order at ``x = 1``; dividing the factor
    out exactly leaves a polynomial with nonnegative coefficients, which
    evaluates without cancellation near ``|alpha| = 1``.
    """
    p = [0] * (2 * D + 1)
    # (1 - x^D)(1 + D x^D - (D-1) x^(D-2)) - D x^(2D-2) (1 - x^2)
    for k, c in ((0, 1), (D, D), (D - 2, -(D - 1))):
        p[k] += c
        p[k + D] -= c
    p[2 * D - 2] -= D
    p[2 * D] += D
    for _ in range(3):
        # P = (1 - x) Q  <=>  q_k = p_0 + ... + p_k
        q, acc = [], 0
        for c in p:
            acc += c
            q.append(acc)
        if q[-1] != 0:
            raise ArithmeticError(f"determinant polynomial for D={D} is not divisible by (1-x)^3")
        p = q[:-1]
    return tuple(p)


def rank2_condition(alpha: float, D: int) -> Rank2ClosedForm:
    """Closed-form condition number of a rank-2 Waring decomposition.

    The Gramian of the Waring Terracini matrix has eigenvalues ``1 ± s`` with
    ``s`` ranging over ``|alpha|^(D-1)`` and the absolute eigenvalues of the
    symmetric 2x2 matrix ``Z'``. The complementary blocks of the CPD
    Terracini matrix have Gramian eigenvalues ``1 ± alpha^(D-1)`` and
    ``1 ± alpha^(D-2)``, never below the Waring minimum, so both condition
    numbers equal ``(1 - max s)^(-1/2)``.

    ``1 - max s`` is evaluated in factored form: ``1 - |alpha|^(D-1)`` as
    ``(1 - x)(1 + x + ... + x^(D-2))`` and ``1 - |z|`` as a determinant
    divided by the other eigenvalue, with ``x = |alpha|``. The plain
    difference would lose about ``log10(kappa^2)`` digits.
    """
    if D < 3:
        raise ValueError(f"the closed form needs D >= 3, got D={D}")
    alpha = float(alpha)
    if not abs(alpha) <= 1.0:
        raise ValueError(f"alpha must lie in [-1, 1], got {alpha!r}")
    a1 = alpha ** (D - 1)
    a2 = alpha ** (D - 2)
    x = abs(alpha)
    om = 1.0 - x
    tau = (D - 1) * om * (1.0 + x)
    delta = -alpha * alpha
    root = np.sqrt(tau * tau - 4.0 * delta)
    z1 = 0.5 * a2 * (tau + root)
    z2 = 0.5 * a2 * (tau - root)
    s_max = max(abs(a1), abs(z1), abs(z2))

    lo_a = om * sum(x**k for k in range(D - 1))
    other = 1.0 + x ** (D - 2) * 2.0 * x * x / (root + tau) if x > 0 else 1.0
    lo_z = om**3 * sum(c * x**k for k, c in enumerate(_det_quotient(D))) / other
    lo = min(lo_a, lo_z)
    kappa = float("inf") if lo <= 0.0 else float(1.0 / np.sqrt(lo))
    return Rank2ClosedForm(
        alpha=alpha,
        D=D,
        gperp_eigs=(1.0 - a1, 1.0 + a1, 1.0 - a2, 1.0 + a2),
        tau=tau,
        delta=delta,
        zprime_eigs=(z1, z2),
        gs_extreme_eigs=(lo, 1.0 + s_max),
        kappa=kappa,
    )


def gramian_orthocomplement(dirs, D: int, n: int) -> np.ndarray:
    """Predicted Gramian of the orthogonal-complement part of a Q-WD Terracini matrix.

    Block ``(r1, r2)`` is ``<g_r1, g_r2>^(D-1) I_{n-m}``.
    """
    G = np.column_stack([as_unit_vector(g) for g in dirs])
    m = G.shape[0]
    if D < 2:
        raise ValueError(f"need D >= 2, got D={D}")
    if n <= m:
        raise ValueError(f"need n > m, got n={n}, m={m}")
    return np.kron((G.T @ G) ** (D - 1), np.eye(n - m))


def orthocomplement_terracini(dirs, Q, D: int, Q_perp=None) -> np.ndarray:
    """Explicit columns ``(1/sqrt(D)) sum_d Q_perp ⊗_d a_r^{⊗(D-1)}`` with ``a_r = Q g_r``.

    ``Q_perp`` defaults to an orthonormal basis of the complement of ``range(Q)``.
    """
    Q = np.asarray(Q, dtype=float)
    if Q_perp is None:
        Q_perp = scipy.linalg.null_space(Q.T)
    blocks = []
    for g in dirs:
        a = Q @ np.asarray(g, dtype=float)
        blocks.append(symmetric_tangent(Q_perp, a, D))
    return np.hstack(blocks)


def rank2_block_split(u, v, D: int, tangent_basis=None) -> tuple[np.ndarray, list[np.ndarray]]:
    """Split the CPD Terracini matrix of a rank-2 Waring decomposition into orthogonal blocks.

    The mode columns ``U ⊗_d u^{⊗(D-1)}`` of each summand are recombined with
    Helmert's matrix. Its first column yields the Waring Terracini matrix
    ``T_V = [u^{⊗D}, S_u, v^{⊗D}, S_v]``; column ``j`` yields the complement
    block ``T_perp^j = [S_u^j, S_v^j]`` for ``j = 1..D-1``.
    """
    u = as_unit_vector(u)
    v = as_unit_vector(v)
    if D < 3:
        raise ValueError(f"need D >= 3, got D={D}")
    if u.size < 2 or u.size != v.size:
        raise ValueError("u and v must have equal length n >= 2")
    basis = tangent_basis or default_tangent_basis
    H = helmert_matrix(D)
    split = []
    for a in (u, v):
        U = basis(a)
        modes = np.stack([mode_insert(U, a, d, D) for d in range(1, D + 1)], axis=1)
        # modes: (n^D, D, n-1); mix the mode axis with the Helmert columns
        split.append(np.einsum("idk,dj->ijk", modes, H))
    T_V = np.hstack([
        outer_power(u, D)[:, None], split[0][:, 0, :],
        outer_power(v, D)[:, None], split[1][:, 0, :],
    ])
    T_perp = [np.hstack([split[0][:, j, :], split[1][:, j, :]]) for j in range(1, D)]
    return T_V, T_perp


def predicted_gperp(u, v, D: int, tangent_basis=None) -> np.ndarray:
    """Gramian of any complement block, ``[[I, B], [B^T, I]]`` with
    ``B = alpha^(D-1) U^T V - alpha^(D-2) U^T v u^T V``."""
    basis = tangent_basis or default_tangent_basis
    U, V = basis(u), basis(v)
    alpha = float(u @ v)
    B = alpha ** (D - 1) * (U.T @ V) - alpha ** (D - 2) * np.outer(U.T @ v, u @ V)
    k = U.shape[1]
    return np.block([[np.eye(k), B], [B.T, np.eye(k)]])
