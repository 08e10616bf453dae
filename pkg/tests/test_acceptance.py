"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Every test prints a single ``PASS``/``FAIL`` line with the measured worst case.
"""
import csv
import json
import time

import numpy as np
import pytest

from conftest import unit
from symcond.cli import main
from symcond.condition import (
    condition_psrd_fast,
    condition_segre,
    condition_segre_veronese,
    condition_veronese,
    condition_waring_fast,
    embed_waring,
    q_wd_condition,
    singular_values,
)
from symcond.experiments import random_waring
from symcond.rank2 import gramian_orthocomplement, orthocomplement_terracini, rank2_condition
from symcond.terracini import PsrdDecomposition, WaringDecomposition, terracini_veronese
from symcond.verify import random_q_wd

# dense Segre Terracini matrices larger than this many entries are not formed
MAX_ENTRIES = 4_000_000


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {k:2d}: {detail}")
        assert ok, detail

    return emit


def rel(a, b):
    return abs(a - b) / abs(b)


def excess(lhs, rhs):
    """How far ``lhs <= rhs`` is violated; ``inf <= inf`` holds."""
    if lhs == rhs:
        return 0.0
    return lhs - rhs


def random_weights(rng, R):
    return rng.choice([-1.0, 1.0], R) * rng.uniform(0.1, 5.0, R)


def largest_n(D):
    n = 2
    while n < 30 and (n + 1) ** D * (1 + D * n) <= MAX_ENTRIES:
        n += 1
    return n


def test_c01_rank_one_exactness(report):
    rng = np.random.default_rng(101)
    start, worst, sizes = time.perf_counter(), 0.0, []
    for _ in range(20):
        D = int(rng.choice([3, 4, 5]))
        n = int(rng.integers(2, largest_n(D) + 1))
        sizes.append((n, D))
        dec = WaringDecomposition.from_arrays(random_weights(rng, 1), unit(rng, n, 1), D)
        for k in (condition_segre(dec).kappa, condition_veronese(dec).kappa, condition_waring_fast(dec).kappa):
            worst = max(worst, abs(k - 1))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-11 and elapsed < 10
    report(1, ok, f"rank-1 |kappa-1| max {worst:.1e} (tol 1e-11), max n {max(s[0] for s in sizes)}, {elapsed:.1f}s (< 10s)")


def test_c02_rank_two_closed_form(report):
    rng = np.random.default_rng(102)
    start, sv, cf = time.perf_counter(), 0.0, 0.0
    for _ in range(200):
        n, D = int(rng.integers(2, 9)), int(rng.choice([3, 4, 5]))
        dirs = unit(rng, n, 2)
        dec = WaringDecomposition.from_arrays(random_weights(rng, 2), dirs, D)
        ks, kv = condition_segre(dec).kappa, condition_veronese(dec).kappa
        kc = rank2_condition(float(dirs[:, 0] @ dirs[:, 1]), D).kappa
        sv = max(sv, rel(ks, kv))
        cf = max(cf, rel(ks, kc), rel(kv, kc))
    elapsed = time.perf_counter() - start
    ok = sv <= 1e-10 and cf <= 1e-9 and elapsed < 60
    report(2, ok, f"rank-2 S/V rel {sv:.1e} (tol 1e-10), vs closed form {cf:.1e} (tol 1e-9), {elapsed:.1f}s (< 60s)")


def test_c03_compression_sandwich(report):
    rng = np.random.default_rng(103)
    start, slack, infinite = time.perf_counter(), -np.inf, 0
    for _ in range(100):
        core, Q = random_q_wd(rng, m_range=(2, 4), n_max=10, D_choices=(3, 4), R_range=(1, 3))
        kw = q_wd_condition(core, Q).kappa
        kv = condition_veronese(embed_waring(core, Q)).kappa
        infinite += not np.isfinite(kw)
        slack = max(slack, excess(kw, kv), excess(kv, np.sqrt(core.D) * kw))
    elapsed = time.perf_counter() - start
    ok = slack <= 1e-9 and elapsed < 120
    report(3, ok, f"kW <= kV <= sqrt(D) kW worst violation {slack:.1e} (slack 1e-9), "
                  f"{infinite} with kW = inf, {elapsed:.1f}s (< 120s)")


def test_c04_fast_path(report):
    rng = np.random.default_rng(104)
    start, worst = time.perf_counter(), 0.0
    for i in range(50):
        R = int(rng.integers(1, 7))
        n = int(rng.integers(R + 2, 26))
        dec = random_waring(n, 3, R, 1000 + i)
        worst = max(worst, rel(condition_waring_fast(dec).kappa, condition_veronese(dec).kappa))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 120
    report(4, ok, f"fast vs direct rel {worst:.1e} (tol 1e-9), {elapsed:.1f}s (< 120s)")


def test_c05_gramian_identity(report):
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(50):
        core, Q = random_q_wd(rng, m_range=(2, 5), n_max=9, D_choices=(3, 4), R_range=(1, 4))
        dirs = core.directions.T
        Tp = orthocomplement_terracini(dirs, Q, core.D)
        worst = max(worst, np.max(np.abs(Tp.T @ Tp - gramian_orthocomplement(dirs, core.D, Q.shape[0]))))
    report(5, worst <= 1e-12, f"complement Gramian entrywise {worst:.1e} (tol 1e-12)")


def test_c06_singular_value_union(report):
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(30):
        core, Q = random_q_wd(rng)
        full = np.sort(singular_values(terracini_veronese(embed_waring(core, Q)).matrix))
        parts = np.sort(np.concatenate([
            singular_values(terracini_veronese(core).matrix),
            singular_values(orthocomplement_terracini(core.directions.T, Q, core.D)),
        ]))
        assert full.shape == parts.shape
        worst = max(worst, np.max(np.abs(full - parts)))
    report(6, worst <= 1e-9, f"singular value union {worst:.1e} (tol 1e-9)")


@pytest.mark.slow
def test_c07_ratio_experiment(report, tmp_path, capsys):
    out = tmp_path / "ratios.csv"
    start = time.perf_counter()
    code = main(["ratio-experiment", "--n-min", "3", "--n-max", "10", "--D", "3", "--trials", "50", "--out", str(out)])
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    finite = [float(r["ratio"]) for r in rows if r["infinite_flag"] == "0"]
    hi, lo = max(finite), min(finite)
    ok = code == 0 and hi <= 1 + 1e-11 and lo >= 1 - 1e-11 and elapsed < 600
    report(7, ok, f"{len(rows)} trials, {len(rows) - len(finite)} non-finite, ratio in [1{lo - 1:+.2e}, 1{hi - 1:+.2e}] "
                  f"(tol 1e-11), {elapsed:.0f}s (< 600s)")


@pytest.mark.slow
def test_c08_benchmark(report, capsys):
    code = main(["bench", "--n", "60", "--D", "3", "--R", "8"])
    res = json.loads(capsys.readouterr().out)
    ok = code == 0 and res["speedup"] >= 100 and res["rel_diff"] <= 1e-9
    report(8, ok, f"direct {res['median_direct_s']:.2f}s, fast {res['median_fast_s']:.4f}s, "
                  f"speedup {res['speedup']:.0f}x (>= 100), rel diff {res['rel_diff']:.1e} (tol 1e-9)")


def test_c09_psrd(report):
    rng = np.random.default_rng(109)
    bound, agree, infinite = -np.inf, 0.0, 0
    for _ in range(30):
        degrees = [(1, 1), (2, 1), (2, 2)][int(rng.integers(0, 3))]
        R = int(rng.integers(1, 3))
        m = [int(x) for x in rng.integers(2, 4, 2)]
        n = [int(rng.integers(mk + 1, 8)) for mk in m]
        cores = [unit(rng, mk, R) for mk in m]
        Qs = [np.linalg.qr(rng.standard_normal((nk, mk)))[0] for nk, mk in zip(n, m)]
        w = random_weights(rng, R)
        small = PsrdDecomposition.from_arrays(w, cores, degrees)
        big = PsrdDecomposition.from_arrays(w, [Q @ G for Q, G in zip(Qs, cores)], degrees)
        km, kn = condition_segre_veronese(small).kappa, condition_segre_veronese(big).kappa
        kf = condition_psrd_fast(big).kappa
        infinite += not np.isfinite(kn)
        bound = max(bound, excess(kn, np.sqrt(max(degrees)) * km))
        agree = max(agree, 0.0 if kf == kn else rel(kf, kn))
    ok = bound <= 1e-9 and agree <= 1e-9
    report(9, ok, f"k_n - sqrt(max d) k_m max {bound:.1e} (slack 1e-9), fast vs direct rel {agree:.1e} (tol 1e-9), "
                  f"{infinite} with k_n = inf")


@pytest.mark.slow
def test_c10_verify_suite(report, capsys):
    start = time.perf_counter()
    code = main(["verify", "--seed", "0", "--cases", "25"])
    elapsed = time.perf_counter() - start
    last = capsys.readouterr().out.strip().splitlines()[-1]
    report(10, code == 0 and elapsed < 300, f"verify seed 0, 25 cases: exit {code}, '{last}', {elapsed:.1f}s (< 300s)")
