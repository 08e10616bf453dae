"""Randomized property checks tying the Terracini, compression and rank-2 results together.

Each check draws its own instance from a seed derived from
``SeedSequence(seed, spawn_key=(case, check_index))``. A failing check is
reported with that seed, so ``run_check(name, seed)`` reproduces it.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import ortho_group

from .condition import (
    condition_from_terracini,
    condition_psrd_fast,
    condition_segre,
    condition_segre_veronese,
    condition_veronese,
    condition_waring_fast,
    embed_waring,
    q_wd_condition,
    singular_values,
)
from .experiments import random_waring
from .rank2 import (
    gramian_orthocomplement,
    orthocomplement_terracini,
    rank2_block_split,
    rank2_condition,
)
from .tensor_core import helmert_matrix, mode_insert, outer_power
from .terracini import (
    Manifold,
    PsrdDecomposition,
    WaringDecomposition,
    default_tangent_basis,
    expected_columns,
    terracini_segre,
    terracini_segre_veronese,
    terracini_veronese,
)


class CheckFailed(AssertionError):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise CheckFailed(msg)


def _note(ctx: dict, **params) -> None:
    ctx["params"] = params


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _unit_columns(rng, n: int, R: int) -> np.ndarray:
    X = rng.standard_normal((n, R))
    return X / np.linalg.norm(X, axis=0)


def _random_weights(rng, R: int) -> np.ndarray:
    return rng.choice([-1.0, 1.0], R) * rng.uniform(0.1, 5.0, R)


def random_q_wd(rng, m_range=(2, 4), n_max=10, D_choices=(3, 4), R_range=(1, 3)):
    """Random core decomposition in ``R^m`` and an ``n x m`` orthonormal ``Q`` with ``n > m``."""
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    n = int(rng.integers(m + 1, n_max + 1))
    D = int(rng.choice(D_choices))
    R = int(rng.integers(R_range[0], R_range[1] + 1))
    core = WaringDecomposition.from_arrays(_random_weights(rng, R), _unit_columns(rng, m, R), D)
    Q = np.linalg.qr(rng.standard_normal((n, m)))[0]
    return core, Q


def rotated_basis(rng) -> Callable[[np.ndarray], np.ndarray]:
    """A valid tangent basis differing from the default by a random rotation."""

    def basis(a):
        U = default_tangent_basis(a)
        k = U.shape[1]
        if k == 1:
            return -U
        return U @ ortho_group.rvs(k, random_state=rng)

    return basis


def corrupted_basis(a: np.ndarray) -> np.ndarray:
    """Negative control: the first tangent column is replaced by the base point."""
    U = default_tangent_basis(a).copy()
    U[:, 0] = a
    return U


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / abs(b)


# --- checks -----------------------------------------------------------------
# Each check takes a seed and a context dict, records the drawn parameters in
# ctx["params"] before asserting anything and raises CheckFailed on violation.


def check_kappa_sigma_consistency(seed, ctx):
    rng = _rng(seed)
    n, D, R = int(rng.integers(2, 6)), int(rng.choice([2, 3])), int(rng.integers(1, 4))
    _note(ctx, n=n, D=D, R=R)
    dec = WaringDecomposition.from_arrays(_random_weights(rng, R), _unit_columns(rng, n, R), D)
    for T in (terracini_segre(dec), terracini_veronese(dec), terracini_segre_veronese(dec.as_psrd())):
        rep = condition_from_terracini(T)
        if np.isfinite(rep.kappa):
            _require(abs(rep.kappa * rep.sigma_min - 1.0) <= 1e-12, f"{T.manifold}: kappa*sigma = {rep.kappa * rep.sigma_min}")
    return ctx["params"]


def check_weight_invariance(seed, ctx):
    rng = _rng(seed)
    n, D, R = int(rng.integers(2, 6)), int(rng.integers(2, 5)), int(rng.integers(1, 4))
    _note(ctx, n=n, D=D, R=R)
    dec = WaringDecomposition.from_arrays(_random_weights(rng, R), _unit_columns(rng, n, R), D)
    other = dec.with_weights(dec.weights * _random_weights(rng, R))
    for build, a, b in (
        (terracini_segre, dec, other),
        (terracini_veronese, dec, other),
        (terracini_segre_veronese, dec.as_psrd(), other.as_psrd()),
    ):
        _require(np.array_equal(build(a).matrix, build(b).matrix), f"{build.__name__} depends on weights")
    return ctx["params"]


def _check_blocks(T, tol=1e-12):
    for r in range(len(T.block_ranges)):
        B = T.block(r)
        err = np.max(np.abs(B.T @ B - np.eye(B.shape[1])))
        _require(err <= tol, f"{T.manifold.value} block {r} not orthonormal (err {err:.2e})")


def check_block_orthonormality(seed, ctx):
    rng = _rng(seed)
    n, D, R = int(rng.integers(2, 6)), int(rng.integers(2, 5)), int(rng.integers(1, 4))
    dec = WaringDecomposition.from_arrays(np.ones(R), _unit_columns(rng, n, R), D)
    Ts, Tv = terracini_segre(dec), terracini_veronese(dec)
    _check_blocks(Ts)
    _check_blocks(Tv)
    _require(Ts.shape[1] == expected_columns(Manifold.SEGRE, R, n, D), "Segre column count")
    _require(Tv.shape[1] == expected_columns(Manifold.VERONESE, R, n, D), "Veronese column count")
    sizes = tuple(int(x) for x in rng.integers(2, 5, 2))
    degrees = tuple(int(x) for x in rng.integers(1, 3, 2))
    _note(ctx, n=n, D=D, R=R, sizes=sizes, degrees=degrees)
    psrd = PsrdDecomposition.from_arrays(np.ones(R), [_unit_columns(rng, s, R) for s in sizes], degrees)
    Tsv = terracini_segre_veronese(psrd)
    _check_blocks(Tsv)
    _require(Tsv.shape[1] == expected_columns(Manifold.SEGRE_VERONESE, R, sizes), "Segre-Veronese column count")
    return ctx["params"]


def check_basis_invariance(seed, ctx):
    rng = _rng(seed)
    n, D, R = int(rng.integers(3, 7)), int(rng.choice([3, 4])), int(rng.integers(1, 4))
    _note(ctx, n=n, D=D, R=R)
    dec = WaringDecomposition.from_arrays(np.ones(R), _unit_columns(rng, n, R), D)
    other = rotated_basis(rng)
    for cond in (condition_veronese, condition_segre):
        k0, k1 = cond(dec).kappa, cond(dec, other).kappa
        _require(_rel(k1, k0) <= 1e-10, f"{cond.__name__}: {k0} vs rotated {k1}")
    psrd = dec.as_cpd()
    k0, k1 = condition_segre_veronese(psrd).kappa, condition_segre_veronese(psrd, other).kappa
    _require(_rel(k1, k0) <= 1e-10, f"segre-veronese: {k0} vs rotated {k1}")
    return ctx["params"]


def check_manifold_nesting(seed, ctx):
    rng = _rng(seed)
    core, Q = random_q_wd(rng)
    dec = embed_waring(core, Q)
    _note(ctx, m=core.n, n=dec.n, D=core.D, R=core.rank)
    kw = q_wd_condition(core, Q).kappa
    kv = condition_veronese(dec).kappa
    ks = condition_segre(dec).kappa
    _require(kw <= kv + 1e-10 and kv <= ks + 1e-10, f"nesting violated: W={kw}, V={kv}, S={ks}")
    return ctx["params"]


def check_compression_sandwich(seed, ctx):
    rng = _rng(seed)
    core, Q = random_q_wd(rng)
    dec = embed_waring(core, Q)
    _note(ctx, m=core.n, n=dec.n, D=core.D, R=core.rank)
    kw = q_wd_condition(core, Q).kappa
    kv = condition_veronese(dec, ctx.get("tangent_basis")).kappa
    bound = np.sqrt(core.D) * kw
    _require(kw <= kv + 1e-9 and kv <= bound + 1e-9, f"chain violated: W={kw}, V={kv}, sqrt(D)W={bound}")
    return ctx["params"]


def check_fast_path(seed, ctx):
    rng = _rng(seed)
    R = int(rng.integers(1, 5))
    n = int(rng.integers(R + 1, R + 8))
    D = int(rng.choice([2, 3, 4])) if n <= 8 else 3
    _note(ctx, n=n, D=D, R=R)
    dec = random_waring(n, D, R, seed)
    kd, kf = condition_veronese(dec).kappa, condition_waring_fast(dec).kappa
    _require(_rel(kf, kd) <= 1e-9, f"fast {kf} vs direct {kd}")
    return ctx["params"]


def check_singular_value_union(seed, ctx):
    rng = _rng(seed)
    core, Q = random_q_wd(rng, n_max=8)
    dec = embed_waring(core, Q)
    _note(ctx, m=core.n, n=dec.n, D=core.D, R=core.rank)
    full = np.sort(singular_values(terracini_veronese(dec).matrix))
    parts = np.concatenate([
        singular_values(terracini_veronese(core).matrix),
        singular_values(orthocomplement_terracini(core.directions.T, Q, core.D)),
    ])
    parts = np.sort(parts)
    _require(full.shape == parts.shape, f"{full.size} vs {parts.size} singular values")
    err = np.max(np.abs(full - parts))
    _require(err <= 1e-9, f"singular value union off by {err:.2e}")
    return ctx["params"]


def check_gramian_orthocomplement(seed, ctx):
    rng = _rng(seed)
    core, Q = random_q_wd(rng, m_range=(2, 5), n_max=9, R_range=(1, 4))
    n = Q.shape[0]
    _note(ctx, m=core.n, n=n, D=core.D, R=core.rank)
    dirs = core.directions.T
    Tp = orthocomplement_terracini(dirs, Q, core.D)
    err = np.max(np.abs(Tp.T @ Tp - gramian_orthocomplement(dirs, core.D, n)))
    _require(err <= 1e-12, f"Gramian identity off by {err:.2e}")
    return ctx["params"]


def _random_pair(rng, n):
    uv = _unit_columns(rng, n, 2)
    return uv[:, 0], uv[:, 1]


def check_rank2_blocks(seed, ctx):
    rng = _rng(seed)
    n, D = int(rng.integers(2, 6)), int(rng.choice([3, 4, 5]))
    u, v = _random_pair(rng, n)
    _note(ctx, n=n, D=D, alpha=float(u @ v))
    T_V, T_perp = rank2_block_split(u, v, D)
    blocks = [T_V] + T_perp
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            err = np.max(np.abs(blocks[i].T @ blocks[j]))
            _require(err <= 1e-11, f"blocks {i},{j} not orthogonal ({err:.2e})")
    dec = WaringDecomposition.from_arrays([1.0, 1.0], np.column_stack([u, v]), D)
    seg = np.sort(singular_values(terracini_segre(dec).matrix))
    union = np.sort(np.concatenate([singular_values(B) for B in blocks]))
    err = np.max(np.abs(seg - union))
    _require(err <= 1e-10, f"block singular values off by {err:.2e}")
    return ctx["params"]


def check_rank2_closed_form(seed, ctx):
    rng = _rng(seed)
    n, D = int(rng.integers(2, 9)), int(rng.choice([3, 4, 5]))
    u, v = _random_pair(rng, n)
    _note(ctx, n=n, D=D, alpha=float(u @ v))
    dec = WaringDecomposition.from_arrays(_random_weights(rng, 2), np.column_stack([u, v]), D)
    ks, kv = condition_segre(dec).kappa, condition_veronese(dec).kappa
    kc = rank2_condition(float(u @ v), D).kappa
    _require(_rel(ks, kv) <= 1e-10, f"segre {ks} vs veronese {kv}")
    _require(_rel(kv, kc) <= 1e-9, f"veronese {kv} vs closed form {kc}")
    return ctx["params"]


def check_proof_inequality(seed, ctx):
    rng = _rng(seed)
    alpha, D = float(rng.uniform(-1, 1)), int(rng.integers(3, 9))
    _note(ctx, alpha=alpha, D=D)
    cf = rank2_condition(alpha, D)
    _require(cf.gs_extreme_eigs[0] <= 1 - abs(alpha) ** (D - 2) + 1e-15, "G_S minimum above G_perp minimum")
    _require(abs(min(cf.gperp_eigs) - (1 - abs(alpha) ** (D - 2))) <= 1e-15, "G_perp minimum")
    return ctx["params"]


def check_rank2_dimension_free(seed, ctx):
    rng = _rng(seed)
    D = int(rng.choice([3, 4]))
    alpha = float(rng.uniform(-0.95, 0.95))
    _note(ctx, D=D, alpha=alpha)
    kappas = []
    for n in (2, int(rng.integers(3, 7))):
        Q = np.linalg.qr(rng.standard_normal((n, 2)))[0]
        u, v = Q[:, 0], alpha * Q[:, 0] + np.sqrt(1 - alpha * alpha) * Q[:, 1]
        dec = WaringDecomposition.from_arrays([1.0, 1.0], np.column_stack([u, v / np.linalg.norm(v)]), D)
        kappas.append(condition_veronese(dec).kappa)
    _require(_rel(kappas[1], kappas[0]) <= 1e-10, f"kappa depends on n: {kappas}")
    return ctx["params"]


def check_veronese_perp(seed, ctx):
    rng = _rng(seed)
    n, D = int(rng.integers(2, 5)), int(rng.choice([3, 4]))
    _note(ctx, n=n, D=D)
    u = _unit_columns(rng, n, 1)[:, 0]
    x = _unit_columns(rng, n, 1)[:, 0]
    U = default_tangent_basis(u)
    H = helmert_matrix(D)
    modes = [mode_insert(U, u, d, D) for d in range(1, D + 1)]
    xD = outer_power(x, D)
    for j in range(1, D):
        S = sum(H[d, j] * modes[d] for d in range(D))
        err = np.max(np.abs(xD @ S))
        _require(err <= 1e-13, f"symmetric tensor not orthogonal to complement block {j} ({err:.2e})")
    return ctx["params"]


def check_psrd_compression_bound(seed, ctx):
    rng = _rng(seed)
    degrees = [(1, 1), (2, 1), (2, 2)][int(rng.integers(0, 3))]
    R = int(rng.integers(1, 3))
    m = [int(x) for x in rng.integers(2, 4, 2)]
    n = [int(rng.integers(mk + 1, 8)) for mk in m]
    _note(ctx, m=m, n=n, degrees=degrees, R=R)
    cores = [_unit_columns(rng, mk, R) for mk in m]
    Qs = [np.linalg.qr(rng.standard_normal((nk, mk)))[0] for nk, mk in zip(n, m)]
    w = _random_weights(rng, R)
    small = PsrdDecomposition.from_arrays(w, cores, degrees)
    big_factors = []
    for Q, G in zip(Qs, cores):
        A = Q @ G
        big_factors.append(A / np.linalg.norm(A, axis=0))
    big = PsrdDecomposition.from_arrays(w, big_factors, degrees)
    km = condition_segre_veronese(small).kappa
    kn = condition_segre_veronese(big).kappa
    _require(kn <= np.sqrt(max(degrees)) * km + 1e-9, f"bound violated: {kn} > sqrt(max d) * {km}")
    kf = condition_psrd_fast(big).kappa
    _require(_rel(kf, kn) <= 1e-9, f"fast {kf} vs direct {kn}")
    return ctx["params"]


def check_psrd_reductions(seed, ctx):
    rng = _rng(seed)
    n, D, R = int(rng.integers(2, 5)), int(rng.integers(2, 4)), int(rng.integers(1, 3))
    _note(ctx, n=n, D=D, R=R)
    dec = WaringDecomposition.from_arrays(np.ones(R), _unit_columns(rng, n, R), D)
    _require(
        np.array_equal(terracini_segre_veronese(dec.as_psrd()).matrix, terracini_veronese(dec).matrix),
        "single-group Segre-Veronese differs from Veronese",
    )
    _require(
        np.array_equal(terracini_segre_veronese(dec.as_cpd()).matrix, terracini_segre(dec).matrix),
        "degree-one Segre-Veronese differs from Segre",
    )
    return ctx["params"]


def check_determinism(seed, ctx):
    rng = _rng(seed)
    n, D, R = int(rng.integers(2, 6)), int(rng.choice([3, 4])), int(rng.integers(1, 4))
    _note(ctx, n=n, D=D, R=R)
    a, b = random_waring(n, D, R, seed), random_waring(n, D, R, seed)
    _require(np.array_equal(a.directions, b.directions) and np.array_equal(a.weights, b.weights), "random_waring")
    for build in (terracini_segre, terracini_veronese):
        _require(np.array_equal(build(a).matrix, build(b).matrix), f"{build.__name__} not deterministic")
    _require(condition_segre(a).kappa == condition_segre(b).kappa, "condition not deterministic")
    return ctx["params"]


CHECKS: dict[str, Callable] = {
    "kappa_sigma_consistency": check_kappa_sigma_consistency,
    "weight_invariance": check_weight_invariance,
    "block_orthonormality": check_block_orthonormality,
    "basis_invariance": check_basis_invariance,
    "manifold_nesting": check_manifold_nesting,
    "compression_sandwich": check_compression_sandwich,
    "fast_path": check_fast_path,
    "singular_value_union": check_singular_value_union,
    "gramian_orthocomplement": check_gramian_orthocomplement,
    "rank2_blocks": check_rank2_blocks,
    "rank2_closed_form": check_rank2_closed_form,
    "proof_inequality": check_proof_inequality,
    "rank2_dimension_free": check_rank2_dimension_free,
    "veronese_perp": check_veronese_perp,
    "psrd_compression_bound": check_psrd_compression_bound,
    "psrd_reductions": check_psrd_reductions,
    "determinism": check_determinism,
}


@dataclass
class Failure:
    check: str
    seed: int
    params: dict
    message: str


@dataclass
class VerifyReport:
    cases: int
    passed: dict[str, int] = field(default_factory=dict)
    failed: dict[str, int] = field(default_factory=dict)
    failures: list[Failure] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        out = [f"{name:26s} passed {self.passed.get(name, 0):4d}  failed {self.failed.get(name, 0):4d}" for name in CHECKS]
        for w in self.warnings:
            out.append(f"warning: {w}")
        for f in self.failures:
            out.append(f"FAIL {f.check} seed={f.seed} params={f.params}: {f.message}")
        out.append("OK" if self.ok else f"{len(self.failures)} failure(s)")
        return out


def check_seed(seed: int, case: int, index: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(case, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_check(name: str, seed: int, tangent_basis=None) -> dict:
    """Rerun a single check, e.g. one listed in a failure report."""
    return CHECKS[name](seed, {"tangent_basis": tangent_basis, "params": {}})


def verify_suite(seed: int = 0, cases: int = 25, corrupt_tangent_basis: bool = False) -> VerifyReport:
    """Run every check on ``cases`` random instances.

    ``corrupt_tangent_basis`` is a negative-control hook: the compression sandwich
    check then builds the large Terracini matrix with :func:`corrupted_basis`.
    """
    report = VerifyReport(cases=cases)
    if cases <= 0:
        msg = "no cases requested; nothing was checked"
        warnings.warn(msg)
        report.warnings.append(msg)
    basis = corrupted_basis if corrupt_tangent_basis else None
    for case in range(max(cases, 0)):
        for index, (name, fn) in enumerate(CHECKS.items()):
            s = check_seed(seed, case, index)
            ctx = {"tangent_basis": basis, "params": {}}
            try:
                fn(s, ctx)
            except CheckFailed as exc:
                report.failed[name] = report.failed.get(name, 0) + 1
                report.failures.append(Failure(name, s, ctx["params"], str(exc)))
            else:
                report.passed[name] = report.passed.get(name, 0) + 1
    return report

