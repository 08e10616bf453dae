"""Seeded random instances, the CPD/Waring ratio experiment and the speed benchmark.

Random numbers come from NumPy's PCG64 bit generator. ``random_waring`` seeds
PCG64 directly with the given integer. The ratio experiment derives one
64-bit seed per ``(n, R, trial)`` from ``SeedSequence(seed, spawn_key=(n, R, trial))``,
so every record can be regenerated in isolation from its ``seed`` column and
the output does not depend on execution order.
"""
from __future__ import annotations

import csv
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .condition import SvdFailure, condition_segre, condition_veronese, condition_waring_fast
from .terracini import WaringDecomposition, symmetric_dimension

log = logging.getLogger(__name__)

RATIO_HEADER = ["n", "R", "trial", "kappa_segre", "kappa_veronese", "ratio", "infinite_flag", "seed"]
SUMMARY_HEADER = ["n", "R", "max_ratio", "num_infinite"]

FLAG_FINITE = 0
FLAG_INFINITE = 1
FLAG_SVD_FAILURE = 2


def random_waring(n: int, D: int, R: int, seed: int) -> WaringDecomposition:
    """Random Waring decomposition of ``sum_r x_r^{⊗D}`` with Gaussian ``x_r``.

    The vectors ``x_1, ..., x_R`` are drawn one after another from
    ``Generator(PCG64(seed)).standard_normal``. Term ``r`` stores
    ``x_r / |x_r|`` with weight ``|x_r|^D``.
    """
    if n < 2 or D < 2 or R < 1:
        raise ValueError(f"need n >= 2, D >= 2, R >= 1; got n={n}, D={D}, R={R}")
    rng = np.random.Generator(np.random.PCG64(seed))
    raw = rng.standard_normal((R, n)).T
    norms = np.linalg.norm(raw, axis=0)
    return WaringDecomposition.from_arrays(norms ** D, raw / norms, D)


def max_rank_bound(n: int, D: int) -> int:
    """Largest ``R`` with ``R n < binom(n + D - 1, D)``.

    Above this rank the Terracini matrix has more columns than the symmetric
    tensor space has dimensions, so the condition number is infinite.
    """
    if n < 2 or D < 2:
        raise ValueError(f"need n >= 2 and D >= 2, got n={n}, D={D}")
    return (symmetric_dimension(n, D) - 1) // n


def trial_seed(seed: int, n: int, R: int, trial: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(n, R, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    n_min: int = 3
    n_max: int = 10
    D: int = 3
    trials: int = 50
    seed: int = 0
    fixed_rank: int | None = None  # None: every R up to max_rank_bound
    output_path: Path | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 2 <= self.n_min <= self.n_max <= 64:
            raise ValueError(f"need 2 <= n_min <= n_max <= 64, got [{self.n_min}, {self.n_max}]")
        if self.D < 2:
            raise ValueError("D must be at least 2")
        if self.fixed_rank is not None and self.fixed_rank < 1:
            raise ValueError("fixed rank must be positive")

    def ranks(self, n: int) -> range:
        if self.fixed_rank is not None:
            return range(self.fixed_rank, self.fixed_rank + 1)
        return range(1, max_rank_bound(n, self.D) + 1)

    def tasks(self) -> list[tuple[int, int, int]]:
        return [
            (n, R, t)
            for n in range(self.n_min, self.n_max + 1)
            for R in self.ranks(n)
            for t in range(self.trials)
        ]


@dataclass(frozen=True)
class RatioRecord:
    n: int
    R: int
    trial: int
    kappa_segre: float
    kappa_veronese: float
    ratio: float
    infinite_flag: int
    seed_used: int

    @property
    def finite(self) -> bool:
        return self.infinite_flag == FLAG_FINITE

    def row(self) -> list[str]:
        return [
            str(self.n), str(self.R), str(self.trial),
            repr(self.kappa_segre), repr(self.kappa_veronese), repr(self.ratio),
            str(self.infinite_flag), str(self.seed_used),
        ]


@dataclass(frozen=True)
class RatioSummary:
    n: int
    R: int
    max_ratio: float
    num_infinite: int

    def row(self) -> list[str]:
        return [str(self.n), str(self.R), repr(self.max_ratio), str(self.num_infinite)]


def run_trial(n: int, D: int, R: int, trial: int, seed: int) -> RatioRecord:
    s = trial_seed(seed, n, R, trial)
    dec = random_waring(n, D, R, s)
    try:
        ks = condition_segre(dec).kappa
        kv = condition_veronese(dec).kappa
    except SvdFailure as exc:
        log.warning("n=%d R=%d trial=%d seed=%d: %s", n, R, trial, s, exc)
        nan = float("nan")
        return RatioRecord(n, R, trial, nan, nan, nan, FLAG_SVD_FAILURE, s)
    if np.isfinite(ks) and np.isfinite(kv):
        return RatioRecord(n, R, trial, ks, kv, ks / kv, FLAG_FINITE, s)
    return RatioRecord(n, R, trial, ks, kv, float("nan"), FLAG_INFINITE, s)


def _run_task(args):
    return run_trial(*args)


def summarize(records: list[RatioRecord]) -> list[RatioSummary]:
    """Per ``(n, R)``: maximum finite ratio and the number of trials without one."""
    groups: dict[tuple[int, int], list[RatioRecord]] = {}
    for rec in records:
        groups.setdefault((rec.n, rec.R), []).append(rec)
    out = []
    for (n, R), recs in sorted(groups.items()):
        finite = [r.ratio for r in recs if r.finite]
        out.append(RatioSummary(n, R, max(finite) if finite else float("nan"), len(recs) - len(finite)))
    return out


def summary_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}_summary{path.suffix or '.csv'}")


def write_ratio_csv(records: list[RatioRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RATIO_HEADER)
        for rec in records:
            w.writerow(rec.row())


def write_summary_csv(summary: list[RatioSummary], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for s in summary:
            w.writerow(s.row())


def ratio_experiment(cfg: ExperimentConfig, jobs: int = 1) -> tuple[list[RatioRecord], list[RatioSummary]]:
    """Compare CPD and Waring condition numbers on random rank-``R`` decompositions.

    Writes ``cfg.output_path`` and its ``_summary`` sibling when a path is set.
    """
    args = [(n, cfg.D, R, t, cfg.seed) for n, R, t in cfg.tasks()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, args, chunksize=16))
    else:
        records = [_run_task(a) for a in args]
    records.sort(key=lambda r: (r.n, r.R, r.trial))
    summary = summarize(records)
    if cfg.output_path is not None:
        write_ratio_csv(records, cfg.output_path)
        write_summary_csv(summary, summary_path(cfg.output_path))
    return records, summary


class BenchmarkMemoryError(MemoryError):
    pass


def speed_benchmark(n: int, D: int, R: int, seed: int = 0, reps: int = 3) -> dict:
    """Median wall-clock of the direct and compressed Waring condition numbers."""
    if n <= R:
        raise ValueError(f"the fast path needs n > R, got n={n}, R={R}")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    dec = random_waring(n, D, R, seed)
    nbytes = (n ** D) * (R * n) * 8
    direct, fast = [], []
    for _ in range(reps):
        try:
            rd = condition_veronese(dec)
        except MemoryError as exc:
            raise BenchmarkMemoryError(
                f"direct path needs a {n ** D} x {R * n} float64 matrix ({nbytes / 2**30:.2f} GiB)"
            ) from exc
        rf = condition_waring_fast(dec)
        direct.append(rd.elapsed)
        fast.append(rf.elapsed)
    med_d = statistics.median(direct)
    med_f = statistics.median(fast)
    kd, kf = rd.kappa, rf.kappa
    if np.isfinite(kd) and np.isfinite(kf):
        rel = abs(kd - kf) / kd
    else:
        rel = 0.0 if kd == kf else float("inf")
    return {
        "n": n,
        "D": D,
        "R": R,
        "reps": reps,
        "median_direct_s": med_d,
        "median_fast_s": med_f,
        "speedup": med_d / med_f,
        "kappa_direct": kd,
        "kappa_fast": kf,
        "rel_diff": rel,
    }
