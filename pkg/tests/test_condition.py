import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import unit
from symcond.condition import (
    FastPathUnavailable,
    Method,
    SvdFailure,
    compress_waring,
    condition_from_terracini,
    condition_psrd_fast,
    condition_segre,
    condition_segre_veronese,
    condition_veronese,
    condition_waring_fast,
    embed_waring,
    q_wd_condition,
    sigma_min,
    singular_values,
)
from symcond.experiments import random_waring
from symcond.rank2 import orthocomplement_terracini
from symcond.terracini import PsrdDecomposition, WaringDecomposition, terracini_segre, terracini_veronese
from symcond.verify import rotated_basis


def rel(a, b):
    return abs(a - b) / abs(b)


def test_sigma_min_trivial():
    assert sigma_min(np.eye(3)) == pytest.approx(1.0, abs=1e-15)
    assert sigma_min(np.diag([3.0, 2.0, 0.5])) == pytest.approx(0.5, abs=1e-15)


def test_sigma_min_matches_eigensolver(rng):
    M = rng.standard_normal((20, 7))
    oracle = np.sqrt(np.linalg.eigvalsh(M.T @ M)[0])
    smax = singular_values(M)[0]
    assert abs(sigma_min(M) - oracle) <= 1e-10 * smax


def test_sigma_min_refinement_improves_on_plain_svd():
    # columns nearly dependent: smallest singular value ~1e-7
    rng = np.random.default_rng(3)
    Q = np.linalg.qr(rng.standard_normal((40, 6)))[0]
    s = np.array([1.0, 0.8, 0.5, 0.3, 0.1, 1e-7])
    V = np.linalg.qr(rng.standard_normal((6, 6)))[0]
    M = (Q * s) @ V.T
    assert sigma_min(M) == pytest.approx(1e-7, rel=1e-7)


def test_sigma_min_rejects_bad_input():
    with pytest.raises(ValueError):
        sigma_min(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        sigma_min(np.zeros((0, 3)))


def test_svd_failure_is_distinct(monkeypatch):
    def boom(*args, **kwargs):
        raise np.linalg.LinAlgError("SVD did not converge")

    monkeypatch.setattr(scipy.linalg, "svd", boom)
    monkeypatch.setattr(scipy.linalg, "svdvals", boom)
    with pytest.raises(SvdFailure):
        sigma_min(np.eye(3))
    with pytest.raises(SvdFailure):
        singular_values(np.eye(3))


@pytest.mark.parametrize("n,D", [(2, 3), (4, 3), (3, 5)])
def test_rank_one_veronese_kappa_is_one(rng, n, D):
    rep = condition_from_terracini(terracini_veronese(WaringDecomposition.from_arrays([3.0], unit(rng, n, 1), D)))
    assert abs(rep.kappa - 1) < 1e-12
    assert rep.method is Method.DIRECT_VERONESE


def test_orthogonal_pair_segre_kappa_is_one(rng):
    Q = np.linalg.qr(rng.standard_normal((4, 2)))[0]
    rep = condition_from_terracini(terracini_segre(WaringDecomposition.from_arrays([1.0, -2.0], Q, 3)))
    assert abs(rep.kappa - 1) < 1e-10


def test_duplicated_summand_is_infinite(rng):
    a = unit(rng, 3)
    dec = WaringDecomposition.from_arrays([1.0, 2.0], np.column_stack([a, a]), 3)
    for rep in (condition_veronese(dec), condition_segre(dec)):
        assert rep.kappa == np.inf


def test_too_many_columns_is_infinite(rng):
    # 3 * 2 columns in a 2^2 = 4 dimensional space
    dec = WaringDecomposition.from_arrays(np.ones(3), unit(rng, 2, 3), 2)
    assert condition_veronese(dec).kappa == np.inf


def test_report_fields(rng):
    dec = random_waring(5, 3, 2, 4)
    rep = condition_veronese(dec)
    assert rep.ambient_dim == 125 and rep.total_cols == 10
    assert rep.elapsed > 0
    assert rep.kappa * rep.sigma_min == pytest.approx(1.0, abs=1e-14)
    assert set(rep.as_dict()) == {"kappa", "sigma_min", "method", "ambient_dim", "total_cols", "elapsed"}


def test_compress_rank_one():
    c = compress_waring(WaringDecomposition.from_arrays([2.0], np.eye(5)[:, :1], 3))
    assert c.m == 1 and c.ell == 2
    g = c.core_terms[0].direction
    assert abs(abs(g[0]) - 1) < 1e-15
    np.testing.assert_array_equal(c.padded_terms[0].direction, [g[0], 0.0])


def test_compress_reconstructs(rng):
    dec = WaringDecomposition.from_arrays([1.0, 2.0], unit(rng, 10, 2), 3)
    c = compress_waring(dec)
    assert c.ell == 3
    assert np.max(np.abs(c.Q.T @ c.Q - np.eye(2))) < 1e-12
    for t, g in zip(dec.terms, c.core_terms):
        assert np.max(np.abs(c.Q @ g.direction - t.direction)) < 1e-12
        assert abs(np.linalg.norm(g.direction) - 1) < 1e-12
    assert [t.weight for t in c.padded_terms] == [1.0, 2.0]


def test_compress_dependent_directions_keeps_m(rng):
    A = unit(rng, 6, 2)
    a3 = A @ np.array([0.6, -1.3])
    dec = WaringDecomposition.from_arrays(np.ones(3), np.column_stack([A, a3 / np.linalg.norm(a3)]), 3)
    c = compress_waring(dec)
    assert c.m == 3
    assert abs(c.core_terms[2].direction[2]) < 1e-10


def test_compress_rejects_n_le_R(rng):
    dec = WaringDecomposition.from_arrays(np.ones(3), unit(rng, 3, 3), 3)
    with pytest.raises(FastPathUnavailable):
        compress_waring(dec)
    with pytest.raises(FastPathUnavailable):
        condition_waring_fast(dec)


@pytest.mark.parametrize("n", [2, 7, 50])
def test_fast_rank_one(rng, n):
    assert abs(condition_waring_fast(WaringDecomposition.from_arrays([1.0], unit(rng, n, 1), 3)).kappa - 1) < 1e-12


def test_fast_matches_direct_seed0():
    dec = random_waring(20, 3, 4, 0)
    fast = condition_waring_fast(dec)
    assert fast.method is Method.COMPRESSED_VERONESE
    assert fast.ambient_dim == 5 ** 3 and fast.total_cols == 20
    assert rel(fast.kappa, condition_veronese(dec).kappa) <= 1e-9
    rescaled = dec.with_weights(dec.weights * np.array([10.0, -3.0, 0.5, 7.0]))
    assert condition_waring_fast(rescaled).kappa == fast.kappa


@settings(max_examples=30, deadline=None)
@given(R=st.integers(1, 4), extra=st.integers(1, 4), D=st.integers(2, 4), seed=st.integers(0, 2**32))
def test_fast_matches_direct_property(R, extra, D, seed):
    dec = random_waring(R + extra, D, R, seed)
    kd, kf = condition_veronese(dec).kappa, condition_waring_fast(dec).kappa
    if np.isfinite(kd):
        assert rel(kf, kd) <= 1e-9
    else:
        assert not np.isfinite(kf) or kf > 1e8


def test_psrd_fast_single_group_equals_waring_fast(rng):
    dec = WaringDecomposition.from_arrays([1.0, 3.0], unit(rng, 6, 2), 3)
    assert rel(condition_psrd_fast(dec.as_psrd()).kappa, condition_waring_fast(dec).kappa) <= 1e-12


def test_psrd_fast_matrix_case_is_infinite(rng):
    # rank-2 matrix decompositions are never locally unique: both routes must agree on inf
    dec = PsrdDecomposition.from_arrays([1.0, -1.0], [unit(rng, 8, 2), unit(rng, 8, 2)], (1, 1))
    fast = condition_psrd_fast(dec)
    assert fast.method is Method.COMPRESSED_SEGRE_VERONESE
    assert fast.kappa == condition_segre_veronese(dec).kappa == np.inf


def test_psrd_fast_cpd_equals_direct_segre(rng):
    dec = PsrdDecomposition.from_arrays([1.0, -1.0], [unit(rng, 8, 2), unit(rng, 8, 2), unit(rng, 5, 2)], (1, 1, 1))
    fast = condition_psrd_fast(dec)
    assert np.isfinite(fast.kappa)
    assert rel(fast.kappa, condition_segre_veronese(dec).kappa) <= 1e-9


def test_psrd_fast_mixed_degrees():
    rng = np.random.default_rng(1)
    dec = PsrdDecomposition.from_arrays([1.0, 2.0], [unit(rng, 9, 2), unit(rng, 7, 2)], (2, 1))
    assert rel(condition_psrd_fast(dec).kappa, condition_segre_veronese(dec).kappa) <= 1e-9


def test_psrd_fast_rejects_small_group(rng):
    dec = PsrdDecomposition.from_arrays(np.ones(2), [unit(rng, 2, 2), unit(rng, 5, 2)], (1, 2))
    with pytest.raises(FastPathUnavailable):
        condition_psrd_fast(dec)


def test_q_wd_identity(rng):
    core = WaringDecomposition.from_arrays([1.0, 1.0], unit(rng, 4, 2), 3)
    assert q_wd_condition(core, np.eye(4)).kappa == condition_veronese(core).kappa


def test_q_wd_rejects_non_orthonormal(rng):
    core = WaringDecomposition.from_arrays([1.0], unit(rng, 3, 1), 3)
    with pytest.raises(ValueError):
        q_wd_condition(core, 2 * np.eye(3))


def test_compression_sandwich_random():
    rng = np.random.default_rng(7)
    core = WaringDecomposition.from_arrays([1.0, -1.0], unit(rng, 3, 2), 3)
    Q = np.linalg.qr(rng.standard_normal((7, 3)))[0]
    kw = q_wd_condition(core, Q).kappa
    kv = condition_veronese(embed_waring(core, Q)).kappa
    assert kw <= kv + 1e-10
    assert kv <= np.sqrt(3) * kw + 1e-10


def test_compression_rank_one(rng):
    core = WaringDecomposition.from_arrays([5.0], unit(rng, 3, 1), 4)
    Q = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    dec = embed_waring(core, Q)
    for k in (q_wd_condition(core, Q).kappa, condition_veronese(dec).kappa, condition_segre(dec).kappa):
        assert abs(k - 1) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_manifold_nesting(seed):
    rng = np.random.default_rng(seed)
    core = WaringDecomposition.from_arrays(np.ones(3), unit(rng, 3, 3), 3)
    Q = np.linalg.qr(rng.standard_normal((5, 3)))[0]
    dec = embed_waring(core, Q)
    kw, kv, ks = q_wd_condition(core, Q).kappa, condition_veronese(dec).kappa, condition_segre(dec).kappa
    assert kw <= kv + 1e-10 <= ks + 2e-10


@pytest.mark.parametrize("D", [3, 4])
def test_basis_choice_invariance(D):
    rng = np.random.default_rng(D)
    dec = WaringDecomposition.from_arrays(np.ones(3), unit(rng, 4, 3), D)
    other = rotated_basis(rng)
    assert rel(condition_veronese(dec, other).kappa, condition_veronese(dec).kappa) <= 1e-10
    assert rel(condition_segre(dec, other).kappa, condition_segre(dec).kappa) <= 1e-10


def test_symmetric_matrix_case_is_infinite(rng):
    dec = WaringDecomposition.from_arrays(np.ones(3), unit(rng, 4, 3), 2)
    assert condition_veronese(dec).kappa == np.inf


def test_singular_value_union():
    rng = np.random.default_rng(11)
    core = WaringDecomposition.from_arrays(np.ones(3), unit(rng, 3, 3), 3)
    Q = np.linalg.qr(rng.standard_normal((6, 3)))[0]
    full = np.sort(singular_values(terracini_veronese(embed_waring(core, Q)).matrix))
    parts = np.sort(np.concatenate([
        singular_values(terracini_veronese(core).matrix),
        singular_values(orthocomplement_terracini(core.directions.T, Q, 3)),
    ]))
    assert full.shape == parts.shape == (18,)
    np.testing.assert_allclose(full, parts, rtol=0, atol=1e-9)
