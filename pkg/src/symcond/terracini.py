"""Decomposition containers and Terracini matrices of the Segre, Veronese and
Segre-Veronese manifolds.

Every builder returns a dense matrix whose column blocks are orthonormal bases
of the tangent spaces at the individual summands. Blocks are ordered summand
by summand; inside a block the point column comes first, followed by the
tangent columns. For the Segre manifold the tangent columns are ordered by
mode first and basis index second.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

import numpy as np

from .tensor_core import as_unit_vector, kron_all, mode_insert, outer_power, sphere_tangent_basis

TangentBasisFn = Callable[[np.ndarray], np.ndarray]


def default_tangent_basis(a: np.ndarray) -> np.ndarray:
    return sphere_tangent_basis(a).basis


@dataclass(frozen=True)
class SymmetricTerm:
    """One summand ``weight * direction^{⊗D}`` of a Waring decomposition."""

    weight: float
    direction: np.ndarray

    def __post_init__(self):
        w = float(self.weight)
        if w == 0.0 or not np.isfinite(w):
            raise ValueError(f"weight must be finite and nonzero, got {self.weight!r}")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "direction", as_unit_vector(self.direction))


@dataclass(frozen=True)
class WaringDecomposition:
    n: int
    D: int
    terms: tuple[SymmetricTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.D < 1:
            raise ValueError(f"order must be positive, got D={self.D}")
        if len(self.terms) < 1:
            raise ValueError("a decomposition needs at least one term")
        for t in self.terms:
            if t.direction.size != self.n:
                raise ValueError(f"direction of length {t.direction.size} in a decomposition with n={self.n}")

    @classmethod
    def from_arrays(cls, weights, directions, D: int) -> WaringDecomposition:
        """Build from a weight vector and an ``n x R`` matrix of unit columns."""
        directions = np.asarray(directions, dtype=float)
        if directions.ndim == 1:
            directions = directions[:, None]
        weights = np.broadcast_to(np.asarray(weights, dtype=float), (directions.shape[1],))
        terms = [SymmetricTerm(w, directions[:, r]) for r, w in enumerate(weights)]
        return cls(n=directions.shape[0], D=D, terms=tuple(terms))

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def weights(self) -> np.ndarray:
        return np.array([t.weight for t in self.terms])

    @property
    def directions(self) -> np.ndarray:
        """Factor matrix with the directions as columns, shape ``(n, R)``."""
        return np.column_stack([t.direction for t in self.terms])

    def with_weights(self, weights) -> WaringDecomposition:
        return WaringDecomposition.from_arrays(weights, self.directions, self.D)

    def full(self) -> np.ndarray:
        """Flat vector of the represented tensor (only for small ``n**D``)."""
        return sum(t.weight * outer_power(t.direction, self.D) for t in self.terms)

    def as_psrd(self) -> PsrdDecomposition:
        """The same decomposition as a single-group partially symmetric one."""
        terms = [PsrdTerm(t.weight, (t.direction,)) for t in self.terms]
        return PsrdDecomposition(sizes=(self.n,), degrees=(self.D,), terms=tuple(terms))

    def as_cpd(self) -> PsrdDecomposition:
        """The same decomposition with every mode in its own group (a CPD)."""
        terms = [PsrdTerm(t.weight, (t.direction,) * self.D) for t in self.terms]
        return PsrdDecomposition(sizes=(self.n,) * self.D, degrees=(1,) * self.D, terms=tuple(terms))


@dataclass(frozen=True)
class PsrdTerm:
    """One summand ``weight * a_1^{⊗d_1} ⊗ ... ⊗ a_K^{⊗d_K}``."""

    weight: float
    directions: tuple[np.ndarray, ...]

    def __post_init__(self):
        w = float(self.weight)
        if w == 0.0 or not np.isfinite(w):
            raise ValueError(f"weight must be finite and nonzero, got {self.weight!r}")
        dirs = tuple(as_unit_vector(a) for a in self.directions)
        if not dirs:
            raise ValueError("a partially symmetric term needs at least one factor")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "directions", dirs)


@dataclass(frozen=True)
class PsrdDecomposition:
    sizes: tuple[int, ...]
    degrees: tuple[int, ...]
    terms: tuple[PsrdTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(x) for x in self.sizes))
        object.__setattr__(self, "degrees", tuple(int(x) for x in self.degrees))
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.sizes) != len(self.degrees) or not self.sizes:
            raise ValueError("sizes and degrees must be nonempty and of equal length")
        if any(d < 1 for d in self.degrees):
            raise ValueError(f"degrees must be positive, got {self.degrees}")
        if sum(self.degrees) < 2:
            raise ValueError("total order must be at least 2")
        if not self.terms:
            raise ValueError("a decomposition needs at least one term")
        for t in self.terms:
            if tuple(a.size for a in t.directions) != self.sizes:
                raise ValueError(f"term shape {[a.size for a in t.directions]} does not match sizes {self.sizes}")

    @classmethod
    def from_arrays(cls, weights, factors: Sequence, degrees: Sequence[int]) -> PsrdDecomposition:
        """Build from weights and one ``n_k x R`` factor matrix per group."""
        factors = [np.asarray(F, dtype=float) for F in factors]
        R = factors[0].shape[1]
        weights = np.broadcast_to(np.asarray(weights, dtype=float), (R,))
        terms = [PsrdTerm(weights[r], tuple(F[:, r] for F in factors)) for r in range(R)]
        return cls(sizes=tuple(F.shape[0] for F in factors), degrees=tuple(degrees), terms=tuple(terms))

    @property
    def rank(self) -> int:
        return len(self.terms)

    @property
    def K(self) -> int:
        return len(self.sizes)

    @property
    def weights(self) -> np.ndarray:
        return np.array([t.weight for t in self.terms])

    def factor(self, k: int) -> np.ndarray:
        """Directions of group ``k`` as the columns of an ``n_k x R`` matrix."""
        return np.column_stack([t.directions[k] for t in self.terms])

    def with_weights(self, weights) -> PsrdDecomposition:
        return PsrdDecomposition.from_arrays(weights, [self.factor(k) for k in range(self.K)], self.degrees)

    def as_cpd(self) -> PsrdDecomposition:
        """Expand every group of degree ``d_k`` into ``d_k`` groups of degree 1."""
        sizes, degrees = [], []
        for n_k, d_k in zip(self.sizes, self.degrees):
            sizes += [n_k] * d_k
            degrees += [1] * d_k
        terms = [
            PsrdTerm(t.weight, tuple(a for a, d_k in zip(t.directions, self.degrees) for _ in range(d_k)))
            for t in self.terms
        ]
        return PsrdDecomposition(sizes=tuple(sizes), degrees=tuple(degrees), terms=tuple(terms))


class Manifold(enum.Enum):
    SEGRE = "segre"
    VERONESE = "veronese"
    SEGRE_VERONESE = "segre-veronese"


@dataclass(frozen=True)
class TerraciniMatrix:
    matrix: np.ndarray
    manifold: Manifold
    block_ranges: tuple[tuple[int, int], ...] = field(default=())

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def block(self, r: int) -> np.ndarray:
        start, stop = self.block_ranges[r]
        return self.matrix[:, start:stop]


def symmetric_tangent(U: np.ndarray, a: np.ndarray, D: int) -> np.ndarray:
    """``(1/sqrt(D)) * sum_d U ⊗_d a^{⊗(D-1)}``: tangent columns of the Veronese manifold."""
    acc = mode_insert(U, a, 1, D)
    for d in range(2, D + 1):
        acc += mode_insert(U, a, d, D)
    acc /= np.sqrt(D)
    return acc


def _check_size(n: int, D: int) -> None:
    if n < 2:
        raise ValueError(f"need n >= 2 for a nontrivial tangent space, got n={n}")
    if D < 2:
        raise ValueError(f"need order D >= 2, got D={D}")


def _assemble(blocks: list[list[np.ndarray]], rows: int, manifold: Manifold) -> TerraciniMatrix:
    cols = sum(b.shape[1] for parts in blocks for b in parts)
    # column-major: LAPACK's native layout, avoids a transpose copy
    M = np.empty((rows, cols), order="F")
    ranges = []
    c = 0
    for parts in blocks:
        start = c
        for b in parts:
            M[:, c:c + b.shape[1]] = b
            c += b.shape[1]
        ranges.append((start, c))
    return TerraciniMatrix(matrix=M, manifold=manifold, block_ranges=tuple(ranges))


def terracini_veronese(dec: WaringDecomposition, tangent_basis: TangentBasisFn | None = None) -> TerraciniMatrix:
    """Terracini matrix of a Waring decomposition on the Veronese manifold.

    Block ``r`` is ``[a_r^{⊗D}, (1/sqrt(D)) sum_d U(a_r) ⊗_d a_r^{⊗(D-1)}]``
    with ``R * n`` columns in total. The weights play no role.
    """
    _check_size(dec.n, dec.D)
    basis = tangent_basis or default_tangent_basis
    blocks = []
    for t in dec.terms:
        a = t.direction
        blocks.append([outer_power(a, dec.D)[:, None], symmetric_tangent(basis(a), a, dec.D)])
    return _assemble(blocks, dec.n ** dec.D, Manifold.VERONESE)


def terracini_segre(dec: WaringDecomposition, tangent_basis: TangentBasisFn | None = None) -> TerraciniMatrix:
    """Terracini matrix of a Waring decomposition viewed as a CPD.

    One tangent basis per summand is reused in all ``D`` modes, giving
    ``R * (1 + D(n-1))`` columns.
    """
    _check_size(dec.n, dec.D)
    basis = tangent_basis or default_tangent_basis
    blocks = []
    for t in dec.terms:
        a = t.direction
        U = basis(a)
        parts = [outer_power(a, dec.D)[:, None]]
        parts += [mode_insert(U, a, d, dec.D) for d in range(1, dec.D + 1)]
        blocks.append(parts)
    return _assemble(blocks, dec.n ** dec.D, Manifold.SEGRE)


def terracini_segre_veronese(dec: PsrdDecomposition, tangent_basis: TangentBasisFn | None = None) -> TerraciniMatrix:
    """Terracini matrix of a partially symmetric decomposition.

    Groups with ``n_k = 1`` contribute no tangent columns.
    """
    basis = tangent_basis or default_tangent_basis
    rows = int(np.prod([n_k ** d_k for n_k, d_k in zip(dec.sizes, dec.degrees)]))
    blocks = []
    for t in dec.terms:
        powers = [outer_power(a, d_k) for a, d_k in zip(t.directions, dec.degrees)]
        parts = [kron_all(powers)[:, None]]
        for k, (a, d_k) in enumerate(zip(t.directions, dec.degrees)):
            if a.size < 2:
                continue
            inner = symmetric_tangent(basis(a), a, d_k)
            left = kron_all(powers[:k])[:, None]
            right = kron_all(powers[k + 1:])[:, None]
            parts.append(np.kron(np.kron(left, inner), right))
        blocks.append(parts)
    return _assemble(blocks, rows, Manifold.SEGRE_VERONESE)


def expected_columns(manifold: Manifold, R: int, n, D: int | None = None) -> int:
    """Closed-form column count of a Terracini matrix."""
    if manifold is Manifold.SEGRE:
        return R * (1 + D * (n - 1))
    if manifold is Manifold.VERONESE:
        return R * n
    return R * (1 + sum(n_k - 1 for n_k in n))


def symmetric_dimension(n: int, D: int) -> int:
    """Dimension of the space of symmetric order-``D`` tensors on ``R^n``."""
    return comb(n + D - 1, D)
