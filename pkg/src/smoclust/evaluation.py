"""Metrics and harnesses: fading per-class recalls, the class-balanced
periodic holdout test, prequential test-then-train evaluation, Friedman and
Nemenyi ranking, pairwise difference tables and decision-area grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from smoclust.core import Example, make_rng
from smoclust.streams import balanced_holdout


def gmean(recall0: float, recall1: float) -> float:
    return math.sqrt(recall0 * recall1)


class FadingRecalls:
    """Per-class recall with exponentially decayed correct/total counts."""

    __slots__ = ("theta", "s", "n")

    def __init__(self, theta: float = 0.999):
        self.theta = theta
        self.s = [0.0, 0.0]
        self.n = [0.0, 0.0]

    def update(self, true_class: int, correct: bool) -> None:
        self.s[true_class] = self.theta * self.s[true_class] + (1.0 if correct else 0.0)
        self.n[true_class] = self.theta * self.n[true_class] + 1.0

    def recall(self, c: int) -> float:
        if self.n[c] == 0.0:
            return 0.0
        return self.s[c] / self.n[c]

    def gmean(self) -> float:
        return gmean(self.recall(0), self.recall(1))


@dataclass
class RunRecord:
    """Sampled G-Mean trajectory for one (approach, stream, seed) run."""

    approach: str
    stream: str
    seed: int
    samples: list[tuple[int, float]] = field(default_factory=list)

    @property
    def average(self) -> float:
        if not self.samples:
            return 0.0
        return sum(g for _, g in self.samples) / len(self.samples)

    def average_over(self, lo: int, hi: int) -> float:
        """Mean of the samples with lo < step <= hi."""
        vals = [g for t, g in self.samples if lo < t <= hi]
        return sum(vals) / len(vals) if vals else 0.0

    def min_over(self, lo: int, hi: int) -> float:
        vals = [g for t, g in self.samples if lo < t <= hi]
        return min(vals) if vals else 0.0


def _labels_matrix(examples: list[Example]) -> tuple[np.ndarray, np.ndarray]:
    xs = np.stack([ex.values for ex in examples])
    ys = np.array([ex.label for ex in examples], dtype=np.int64)
    return np.ascontiguousarray(xs), ys


def holdout_gmean(strategy, examples: list[Example]) -> float:
    xs, ys = _labels_matrix(examples)
    if hasattr(strategy, "predict_batch"):
        preds = strategy.predict_batch(xs)
    else:
        preds = np.array([strategy.predict(e).predicted for e in examples], dtype=np.int64)
    recalls = []
    for c in (0, 1):
        mask = ys == c
        total = int(mask.sum())
        correct = int((preds[mask] == c).sum())
        recalls.append(correct / total if total else 0.0)
    return gmean(recalls[0], recalls[1])


def holdout_run(
    strategy,
    stream,
    n_train: int = 1000,
    m_test: int = 1000,
    approach: str = "",
    seed: int = 0,
) -> RunRecord:
    """Train sequentially; after every n_train examples, test on a fresh
    class-balanced holdout set drawn from the concept active at that step."""
    record = RunRecord(approach or getattr(strategy, "name", "strategy"), stream.name, seed)
    eval_rng = make_rng("holdout", stream.name, seed)
    t = 0
    for example in stream:
        strategy.train(example)
        t = example.timestamp
        if t % n_train == 0:
            test = balanced_holdout(stream.concept_at(t), m_test, eval_rng)
            record.samples.append((t, holdout_gmean(strategy, test)))
    return record


def prequential_run(
    strategy,
    stream,
    sample_every: int = 500,
    theta_e: float = 0.999,
    approach: str = "",
    seed: int = 0,
) -> RunRecord:
    """Strict test-then-train: every example is predicted before training;
    the fading G-Mean is sampled every sample_every steps."""
    record = RunRecord(
        approach or getattr(strategy, "name", "strategy"),
        getattr(stream, "name", "stream"),
        seed,
    )
    recalls = FadingRecalls(theta_e)
    t = 0
    for example in stream:
        pred = strategy.predict(example)
        recalls.update(example.label, pred.predicted == example.label)
        strategy.train(example)
        t += 1
        if t % sample_every == 0:
            record.samples.append((t, recalls.gmean()))
    return record


# Critical values of the studentized range statistic divided by sqrt(2) at
# alpha = 0.05, indexed by the number of compared approaches k.
NEMENYI_Q05 = {
    2: 1.959964,
    3: 2.343701,
    4: 2.569032,
    5: 2.727774,
    6: 2.849705,
    7: 2.948319,
    8: 3.030879,
    9: 3.101730,
    10: 3.163684,
    11: 3.218654,
    12: 3.268004,
}


@dataclass(frozen=True)
class FriedmanResult:
    avg_ranks: np.ndarray
    statistic: float
    p_value: float
    critical_difference: float
    n_observations: int
    n_approaches: int


def friedman_nemenyi(table: np.ndarray, alpha: float = 0.05) -> FriedmanResult:
    """Friedman chi-square test over an observations x approaches table of
    averages (higher is better), plus the Nemenyi critical difference.

    Ranks are per observation, 1 = best, ties share the average rank.
    """
    table = np.asarray(table, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise ValueError("ranking needs at least 2 observations and 2 approaches")
    n, k = table.shape
    if alpha != 0.05:
        raise ValueError("only alpha = 0.05 critical values are embedded")
    if k not in NEMENYI_Q05:
        raise ValueError(f"no Nemenyi critical value embedded for k = {k}")
    ranks = np.empty_like(table)
    for i in range(n):
        ranks[i] = stats.rankdata(-table[i], method="average")
    avg_ranks = ranks.mean(axis=0)
    chi2 = 12.0 * n / (k * (k + 1)) * (float(np.sum(avg_ranks**2)) - k * (k + 1) ** 2 / 4.0)
    p_value = float(stats.chi2.sf(chi2, k - 1))
    cd = NEMENYI_Q05[k] * math.sqrt(k * (k + 1) / (6.0 * n))
    return FriedmanResult(avg_ranks, chi2, p_value, cd, n, k)


def collect_averages(records: list[RunRecord]) -> dict[tuple[str, str, int], float]:
    return {(r.approach, r.stream, r.seed): r.average for r in records}


def difference_table(
    records: list[RunRecord], reference: str = "SMOClust"
) -> tuple[list[str], list[str], np.ndarray, list[tuple[str, str]]]:
    """Per-stream mean-over-seeds G-Mean deltas of every approach against
    the reference approach (positive delta = reference worse).

    Returns (streams, approaches, matrix, missing cells); missing cells are
    NaN in the matrix, flagged rather than imputed.
    """
    approaches = sorted({r.approach for r in records})
    streams = sorted({r.stream for r in records})
    if reference not in approaches:
        raise ValueError(f"reference approach {reference!r} missing from the records")
    by_cell: dict[tuple[str, str], list[float]] = {}
    for r in records:
        by_cell.setdefault((r.approach, r.stream), []).append(r.average)
    matrix = np.full((len(streams), len(approaches)), np.nan)
    missing = []
    for si, stream in enumerate(streams):
        ref_vals = by_cell.get((reference, stream))
        for ai, approach in enumerate(approaches):
            vals = by_cell.get((approach, stream))
            if vals is None or ref_vals is None:
                missing.append((approach, stream))
                continue
            matrix[si, ai] = float(np.mean(vals)) - float(np.mean(ref_vals))
    return streams, approaches, matrix, missing


def export_decision_grid(strategy, bounds, resolution: int, schema) -> np.ndarray:
    """Predictions of a strategy over a resolution x resolution lattice.

    Returns rows (x, y, predicted); only defined for 2-D numeric schemas.
    """
    if schema.n_attributes != 2 or not all(a.is_numeric for a in schema.attributes):
        raise ValueError("decision grids need a two-attribute numeric schema")
    xlo, xhi, ylo, yhi = bounds
    xs = np.linspace(xlo, xhi, resolution)
    ys = np.linspace(ylo, yhi, resolution)
    grid = np.empty((resolution * resolution, 2), dtype=np.float64)
    idx = 0
    for y in ys:
        for x in xs:
            grid[idx, 0] = x
            grid[idx, 1] = y
            idx += 1
    preds = strategy.predict_batch(np.ascontiguousarray(grid))
    out = np.empty((resolution * resolution, 3), dtype=np.float64)
    out[:, :2] = grid
    out[:, 2] = preds
    return out


def write_grid_csv(fh, rows: np.ndarray) -> None:
    fh.write("x,y,predicted\n")
    for x, y, p in rows:
        fh.write(f"{x!r},{y!r},{int(p)}\n")
