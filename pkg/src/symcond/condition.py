"""Condition numbers from Terracini matrices, plus the compressed fast paths.

The condition number of a decomposition is the reciprocal of the smallest
singular value of its Terracini matrix. For a Waring decomposition with
``n > R`` the same number is obtained from a decomposition in ``R + 1``
dimensions: compress the factor matrix with a thin SVD and pad the core
directions with one zero coordinate.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .tensor_core import ORTHO_TOL
from .terracini import (
    PsrdDecomposition,
    PsrdTerm,
    SymmetricTerm,
    TangentBasisFn,
    TerraciniMatrix,
    WaringDecomposition,
    terracini_segre,
    terracini_segre_veronese,
    terracini_veronese,
)

RANK_TOL = 1e-12


class SvdFailure(ArithmeticError):
    """The dense SVD did not converge."""


class FastPathUnavailable(ValueError):
    """The compressed algorithm needs ``n > R``; use the direct path instead."""


class Method(enum.Enum):
    DIRECT_SEGRE = "direct-segre"
    DIRECT_VERONESE = "direct-veronese"
    DIRECT_SEGRE_VERONESE = "direct-segre-veronese"
    COMPRESSED_VERONESE = "compressed-veronese"
    COMPRESSED_SEGRE_VERONESE = "compressed-segre-veronese"
    CLOSED_FORM_RANK2 = "closed-form-rank2"


@dataclass(frozen=True)
class ConditionReport:
    kappa: float
    sigma_min: float
    method: Method
    ambient_dim: int
    total_cols: int
    elapsed: float

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "sigma_min": self.sigma_min,
            "method": self.method.value,
            "ambient_dim": self.ambient_dim,
            "total_cols": self.total_cols,
            "elapsed": self.elapsed,
        }


def singular_values(M) -> np.ndarray:
    """All singular values of ``M`` in descending order (dense LAPACK gesdd)."""
    M = _checked(M)
    try:
        return scipy.linalg.svdvals(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(f"SVD of a {M.shape[0]}x{M.shape[1]} matrix did not converge") from exc


def _checked(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError(f"expected a nonempty matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


_EXTENDED = np.finfo(np.longdouble).eps < np.finfo(np.float64).eps


def _residual_norm(M: np.ndarray, v: np.ndarray, chunk: int = 8192) -> float:
    """``|M v| / |v|`` accumulated in extended precision, row block by row block."""
    v = v.astype(np.longdouble)
    acc = np.longdouble(0.0)
    for i in range(0, M.shape[0], chunk):
        r = M[i:i + chunk].astype(np.longdouble) @ v
        acc += r @ r
    return float(np.sqrt(acc / (v @ v)))


def singular_values_refined(M) -> tuple[np.ndarray, float]:
    """Singular values of ``M`` and a refined smallest singular value.

    The SVD is taken of the triangular QR factor when ``M`` is tall. The
    smallest value is then recomputed as ``|M v|`` for the matching right
    singular vector ``v``, in extended precision. This residual is accurate
    to second order in the error of ``v``, so it is free of most of the SVD's
    own rounding, which otherwise dominates at large condition numbers.
    """
    M = _checked(M)
    rows, cols = M.shape
    try:
        R = scipy.linalg.qr(M, mode="r", check_finite=False)[0][:cols] if rows > cols else M
        _, s, Vt = scipy.linalg.svd(R, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(f"SVD of a {rows}x{cols} matrix did not converge") from exc
    if rows < cols or not _EXTENDED:
        return s, float(s[-1])
    return s, _residual_norm(M, Vt[-1])


def sigma_min(M) -> float:
    """Smallest singular value of ``M`` (refined, see :func:`singular_values_refined`).

    For a wide matrix this is the smallest of the ``rows`` singular values.
    """
    return singular_values_refined(M)[1]


def _kappa(svals: np.ndarray, smin: float, shape: tuple[int, int]) -> tuple[float, float]:
    rows, cols = shape
    if cols > rows:
        # more tangent directions than ambient dimensions: never injective
        return float("inf"), 0.0
    if min(smin, float(svals[-1])) <= RANK_TOL * float(svals[0]) * max(rows, cols):
        return float("inf"), smin
    return 1.0 / smin, smin


def _report(M: np.ndarray, method: Method, start: float) -> ConditionReport:
    shape = M.shape
    svals, smin = singular_values_refined(M)
    kappa, smin = _kappa(svals, smin, shape)
    return ConditionReport(
        kappa=kappa,
        sigma_min=smin,
        method=method,
        ambient_dim=shape[0],
        total_cols=shape[1],
        elapsed=time.perf_counter() - start,
    )


_DIRECT = {
    "segre": Method.DIRECT_SEGRE,
    "veronese": Method.DIRECT_VERONESE,
    "segre-veronese": Method.DIRECT_SEGRE_VERONESE,
}


def condition_from_terracini(T: TerraciniMatrix) -> ConditionReport:
    """Condition number ``1 / sigma_min(T)``, or ``inf`` if ``T`` is numerically rank deficient.

    ``T`` counts as rank deficient when ``sigma_min <= 1e-12 * sigma_max * max(rows, cols)``.
    The reported time covers the SVD only; the ``condition_*`` functions also
    time the construction of the matrix.
    """
    start = time.perf_counter()
    return _report(T.matrix, _DIRECT[T.manifold.value], start)


def condition_veronese(dec: WaringDecomposition, tangent_basis: TangentBasisFn | None = None) -> ConditionReport:
    """Direct Waring condition number: build the full Terracini matrix and take its SVD."""
    start = time.perf_counter()
    T = terracini_veronese(dec, tangent_basis)
    return _report(T.matrix, Method.DIRECT_VERONESE, start)


def condition_segre(dec: WaringDecomposition, tangent_basis: TangentBasisFn | None = None) -> ConditionReport:
    """Direct CPD condition number of a Waring decomposition."""
    start = time.perf_counter()
    T = terracini_segre(dec, tangent_basis)
    return _report(T.matrix, Method.DIRECT_SEGRE, start)


def condition_segre_veronese(dec: PsrdDecomposition, tangent_basis: TangentBasisFn | None = None) -> ConditionReport:
    start = time.perf_counter()
    T = terracini_segre_veronese(dec, tangent_basis)
    return _report(T.matrix, Method.DIRECT_SEGRE_VERONESE, start)


@dataclass(frozen=True)
class CompressedWd:
    """Thin-SVD compression ``a_r = Q g_r`` of a Waring decomposition.

    ``padded_terms`` hold ``b_r = [g_r; 0]`` in ``ell = m + 1`` dimensions.
    """

    Q: np.ndarray
    core_terms: tuple[SymmetricTerm, ...]
    padded_terms: tuple[SymmetricTerm, ...]

    @property
    def m(self) -> int:
        return self.Q.shape[1]

    @property
    def ell(self) -> int:
        return self.m + 1


def _compress_factor(F: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``Q``, core columns ``G = Sigma V^T`` and their zero-padded version."""
    try:
        Q, s, Vt = np.linalg.svd(F, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(f"thin SVD of a {F.shape[0]}x{F.shape[1]} factor matrix did not converge") from exc
    G = s[:, None] * Vt
    # unit columns up to rounding; renormalize so the core passes unit checks
    G /= np.linalg.norm(G, axis=0)
    padded = np.vstack([G, np.zeros((1, G.shape[1]))])
    return Q, G, padded


def compress_waring(dec: WaringDecomposition) -> CompressedWd:
    """Compress a Waring decomposition with ``n > R`` to ``m = R`` dimensions."""
    if dec.n <= dec.rank:
        raise FastPathUnavailable(
            f"compression needs n > R, got n={dec.n}, R={dec.rank}; use the direct path"
        )
    Q, G, padded = _compress_factor(dec.directions)
    w = dec.weights
    core = tuple(SymmetricTerm(w[r], G[:, r]) for r in range(dec.rank))
    pad = tuple(SymmetricTerm(w[r], padded[:, r]) for r in range(dec.rank))
    return CompressedWd(Q=Q, core_terms=core, padded_terms=pad)


def condition_waring_fast(dec: WaringDecomposition) -> ConditionReport:
    """Waring condition number computed in ``R + 1`` dimensions.

    Requires ``n > R``. Costs ``O(n R^2)`` for the compression and
    ``O(R^(D+4))`` for the small SVD.
    """
    start = time.perf_counter()
    cwd = compress_waring(dec)
    small = WaringDecomposition(n=cwd.ell, D=dec.D, terms=cwd.padded_terms)
    T = terracini_veronese(small)
    return _report(T.matrix, Method.COMPRESSED_VERONESE, start)


def compress_psrd(dec: PsrdDecomposition) -> PsrdDecomposition:
    """Compress each factor group to ``R`` dimensions and pad to ``R + 1``."""
    R = dec.rank
    short = [n_k for n_k in dec.sizes if n_k <= R]
    if short:
        raise FastPathUnavailable(
            f"compression needs n_k > R in every group, got sizes={dec.sizes}, R={R}; use the direct path"
        )
    padded = [_compress_factor(dec.factor(k))[2] for k in range(dec.K)]
    return PsrdDecomposition.from_arrays(dec.weights, padded, dec.degrees)


def condition_psrd_fast(dec: PsrdDecomposition) -> ConditionReport:
    """Partially symmetric condition number computed on the padded compression."""
    start = time.perf_counter()
    small = compress_psrd(dec)
    T = terracini_segre_veronese(small)
    return _report(T.matrix, Method.COMPRESSED_SEGRE_VERONESE, start)


def check_orthonormal_columns(Q, tol: float = ORTHO_TOL) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] < Q.shape[1]:
        raise ValueError(f"expected a tall n x m matrix, got shape {Q.shape}")
    err = np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1])))
    if err > tol:
        raise ValueError(f"Q does not have orthonormal columns (max |Q^T Q - I| = {err:.3g})")
    return Q


def embed_waring(core: WaringDecomposition, Q) -> WaringDecomposition:
    """The decomposition with summands ``Q^{⊗D} G_r``, i.e. directions ``Q g_r``."""
    Q = check_orthonormal_columns(Q)
    if Q.shape[1] != core.n:
        raise ValueError(f"Q has {Q.shape[1]} columns but the core lives in R^{core.n}")
    A = Q @ core.directions
    A /= np.linalg.norm(A, axis=0)
    return WaringDecomposition.from_arrays(core.weights, A, core.D)


def q_wd_condition(core: WaringDecomposition, Q) -> ConditionReport:
    """Condition number of the Tucker-compressed Waring decomposition ``Q^{⊗D} G_r``.

    ``Q^{⊗D}`` is an isometry, so this equals the Waring condition number of
    the core in ``R^m``; ``Q`` is only validated.
    """
    Q = check_orthonormal_columns(Q)
    if Q.shape[1] != core.n:
        raise ValueError(f"Q has {Q.shape[1]} columns but the core lives in R^{core.n}")
    return condition_veronese(core)
