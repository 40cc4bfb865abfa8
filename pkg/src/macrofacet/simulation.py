"""Random coverage instances under partition-plus-budget quotas: greedy vs. optimum."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .matroid import QuotaTree, partition_matroid
from .selection import approximation_ratio, brute_force_optimal, greedy_select
from .utility import WeightedCoverage

HIST_LO, HIST_HI = 0.5, 1.0
RATIO_TOL = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int = 5000
    num_macro: int = 14
    universe_size: int = 120
    num_groups: int = 4
    cover_probability: float = 0.15
    weight_lo: float = 0.1
    weight_hi: float = 1.0
    quota_lo: int = 1
    quota_hi: int | None = None  # None: the group's size
    budget_lo: int = 3
    budget_hi: int = 8
    seed: int = 20240601
    bins: int = 50

    def __post_init__(self):
        for name in ("trials", "num_macro", "universe_size", "num_groups", "bins"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.num_groups > self.num_macro:
            raise ValueError("num_groups must not exceed num_macro")
        if not 0 < self.cover_probability < 1:
            raise ValueError("cover_probability must lie in (0, 1)")
        if not 0 < self.weight_lo <= self.weight_hi:
            raise ValueError("weights need 0 < weight_lo <= weight_hi")
        if self.quota_lo < 0 or (self.quota_hi is not None and self.quota_hi < self.quota_lo):
            raise ValueError("empty quota range")
        if not 0 <= self.budget_lo <= self.budget_hi:
            raise ValueError("empty budget range")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


def trial_seed(master: int, trial: int) -> int:
    """Per-trial seed; independent of how trials are scheduled."""
    return int(np.random.SeedSequence([master, trial]).generate_state(1, np.uint64)[0])


def macro_ids(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"m{i:0{width}d}" for i in range(n)]


def generate_instance(config: ExperimentConfig, seed: int) -> tuple[WeightedCoverage, QuotaTree]:
    rng = np.random.default_rng(seed)
    ids = macro_ids(config.num_macro)
    weights = rng.uniform(config.weight_lo, config.weight_hi, size=config.universe_size)
    cover = rng.random((config.num_macro, config.universe_size)) < config.cover_probability
    utility = WeightedCoverage(weights, {m: np.nonzero(row)[0].tolist()
                                         for m, row in zip(ids, cover)})

    # balanced random partition: sizes differ by at most one
    perm = rng.permutation(config.num_macro)
    groups = []
    for g in range(config.num_groups):
        members = sorted(ids[i] for i in perm[g::config.num_groups])
        hi = len(members) if config.quota_hi is None else config.quota_hi
        lo = min(config.quota_lo, hi)
        groups.append((f"G{g + 1}", frozenset(members), int(rng.integers(lo, hi + 1))))
    budget = int(rng.integers(config.budget_lo, config.budget_hi + 1))
    return utility, partition_matroid(ids, groups, overall_budget=budget)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    greedy: float
    optimal: float
    ratio: float
    seed: int


def run_trial(config: ExperimentConfig, trial: int, backend: str | None = None) -> TrialRecord:
    seed = trial_seed(config.seed, trial)
    utility, tree = generate_instance(config, seed)
    g = greedy_select(tree.universe, utility, tree)
    o = brute_force_optimal(tree.universe, utility, tree, backend=backend)
    try:
        ratio = approximation_ratio(g, o)
    except Exception as exc:
        raise type(exc)(f"trial {trial}: {exc}") from exc
    return TrialRecord(trial, g.value, o.value, ratio, seed)


def _run_chunk(args):
    config, trials, backend = args
    return [run_trial(config, t, backend) for t in trials]


def histogram(ratios, bins: int = 50):
    """Fixed-width bins over [0.5, 1.0], last bin closed.

    Values are clipped into the range first, so a ratio a hair above 1 from
    rounding still lands in the last bin and the counts always add up.
    """
    ratios = np.asarray(ratios, dtype=np.float64)
    if ratios.size == 0:
        raise ValueError("histogram of an empty sample")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, edges = np.histogram(np.clip(ratios, HIST_LO, HIST_HI), bins=bins,
                                 range=(HIST_LO, HIST_HI))
    return edges, counts


def summarize(ratios, bins: int = 50) -> dict:
    r = np.asarray(ratios, dtype=np.float64)
    n = r.size
    mean = float(np.mean(r))
    sd = float(np.std(r, ddof=1)) if n > 1 else 0.0
    half = 1.96 * sd / math.sqrt(n)
    edges, counts = histogram(r, bins)
    return {
        "n": n,
        "mean": mean,
        "sd": sd,
        "ci95": [mean - half, mean + half],
        "min": float(np.min(r)),
        "p5": float(np.percentile(r, 5)),
        "max": float(np.max(r)),
        "share_ge_095": float(np.count_nonzero(r >= 0.95) / n),
        "violations_below_half": int(np.count_nonzero(r < 0.5 - RATIO_TOL)),
        "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
    }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    records: list[TrialRecord]
    stats: dict
    wall_clock: float = field(default=0.0, compare=False)

    def as_dict(self):
        # wall-clock is left out so reruns serialise identically
        return {"config": asdict(self.config), "stats": self.stats}

    def trials_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "greedy", "optimal", "ratio", "seed"])
        for r in self.records:
            w.writerow([r.trial, repr(r.greedy), repr(r.optimal), repr(r.ratio), r.seed])
        return buf.getvalue()

    def histogram_csv(self) -> str:
        h = self.stats["histogram"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lo", "hi", "count"])
        for lo, hi, c in zip(h["edges"][:-1], h["edges"][1:], h["counts"]):
            w.writerow([repr(lo), repr(hi), c])
        return buf.getvalue()


def run_experiment(config: ExperimentConfig, workers: int = 1,
                   backend: str | None = None, progress=None) -> ExperimentReport:
    """Run every trial; records come back ordered by trial index."""
    if config.num_macro > 20:
        raise ValueError("num_macro above the brute-force ceiling of 20")
    t0 = time.perf_counter()
    indices = list(range(config.trials))
    if workers <= 1:
        records = []
        for t in indices:
            records.append(run_trial(config, t, backend))
            if progress is not None:
                progress(t + 1)
    else:
        chunks = [indices[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [(config, c, backend) for c in chunks])
            records = sorted((r for part in parts for r in part), key=lambda r: r.trial)
    stats = summarize([r.ratio for r in records], config.bins)
    return ExperimentReport(config, records, stats, time.perf_counter() - t0)


def stats_from_csv(text: str, bins: int = 50) -> dict:
    rows = list(csv.DictReader(io.StringIO(text)))
    return summarize([float(r["ratio"]) for r in rows], bins)
