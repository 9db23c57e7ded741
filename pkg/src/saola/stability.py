"""Similarity of selected feature sets and the subsample stability protocol.

Two selections are compared on a weighted complete bipartite graph whose
edge weights are the symmetrical uncertainty between the features; the
similarity is the maximum-weight matching total normalized by the larger
set size, which bounds it in [0, 1] and penalizes size mismatch.

The stability experiment partitions the instances into folds, runs the
selector once per leave-one-fold-out training set per repeat, and averages
the similarity over every pair of runs, pooled across repeats.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .correlation import DiscreteVar, symmetrical_uncertainty
from .dataset import CONTINUOUS, Dataset, OrderSpec, discretize
from .selection import SaolaConfig, select_features


@dataclass(frozen=True)
class SimilarityReport:
    similarity: float
    matching: tuple[tuple[int, int, float], ...]  # (feature in S1, in S2, weight)
    degenerate: bool = False


@dataclass(frozen=True)
class StabilityRun:
    repeat: int
    fold: int
    selected: tuple[int, ...]


@dataclass(frozen=True)
class PairSimilarity:
    run_a: int
    run_b: int
    similarity: float


@dataclass(frozen=True)
class StabilityResult:
    runs: tuple[StabilityRun, ...]
    pairs: tuple[PairSimilarity, ...]
    mean_similarity: float


class SuWeightCache:
    """Memoizes per-feature discrete views and pairwise SU on one dataset."""

    def __init__(self, dataset: Dataset):
        if dataset.value_kind == CONTINUOUS:
            raise ValueError(
                "SU weights need discrete columns; discretize the dataset first"
            )
        self._dataset = dataset
        self._vars: dict[int, DiscreteVar] = {}
        self._su: dict[tuple[int, int], float] = {}

    def var(self, feature_index: int) -> DiscreteVar:
        if feature_index not in self._vars:
            self._vars[feature_index] = DiscreteVar.from_column(
                self._dataset.column(feature_index), self._dataset.n_instances
            )
        return self._vars[feature_index]

    def su(self, i: int, j: int) -> float:
        key = (i, j) if i <= j else (j, i)
        if key not in self._su:
            self._su[key] = symmetrical_uncertainty(self.var(key[0]), self.var(key[1])).value
        return self._su[key]


def max_weight_matching(weights: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Exact maximum-weight assignment on a rectangular weight matrix."""
    rows, cols = linear_sum_assignment(weights, maximize=True)
    total = float(weights[rows, cols].sum())
    return list(zip(rows.tolist(), cols.tolist())), total


def set_similarity(
    s1: Sequence[int],
    s2: Sequence[int],
    dataset: Dataset,
    cache: Optional[SuWeightCache] = None,
) -> SimilarityReport:
    """SU-weighted matching similarity of two feature-index sets.

    An empty side yields similarity 0 with an empty matching rather than an
    error, flagged via ``degenerate``.
    """
    s1 = list(s1)
    s2 = list(s2)
    if not s1 or not s2:
        return SimilarityReport(0.0, (), degenerate=True)
    if cache is None:
        cache = SuWeightCache(dataset)
    weights = np.empty((len(s1), len(s2)), dtype=np.float64)
    for a, i in enumerate(s1):
        for b, j in enumerate(s2):
            weights[a, b] = cache.su(i, j)
    pairs, total = max_weight_matching(weights)
    matching = tuple((s1[a], s2[b], float(weights[a, b])) for a, b in pairs)
    return SimilarityReport(total / max(len(s1), len(s2)), matching)


def run_stability(
    dataset: Dataset,
    cfg: SaolaConfig,
    folds: int = 5,
    repeats: int = 30,
    seed: int = 0,
    threads: int = 1,
    weight_bins: int = 10,
) -> StabilityResult:
    """Leave-one-fold-out selection runs and their pooled pairwise similarity.

    Matching weights are computed on the full dataset so they are comparable
    across runs; a continuous dataset is equal-frequency binned into
    ``weight_bins`` codes for that purpose only.
    """
    if dataset.n_instances < folds:
        raise ValueError("need at least as many instances as folds")
    if folds < 2:
        raise ValueError("folds must be at least 2")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")

    training_rows: list[tuple[int, int, np.ndarray]] = []
    for repeat in range(repeats):
        rng = np.random.default_rng([seed, repeat])
        perm = rng.permutation(dataset.n_instances)
        fold_slices = np.array_split(perm, folds)
        for fold in range(folds):
            rows = np.sort(
                np.concatenate([fold_slices[f] for f in range(folds) if f != fold])
            )
            training_rows.append((repeat, fold, rows))

    def one_run(job):
        repeat, fold, rows = job
        result = select_features(dataset.subset_instances(rows), cfg, OrderSpec())
        return StabilityRun(repeat, fold, tuple(result.selected_indices))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one_run, training_rows))
    else:
        runs = [one_run(job) for job in training_rows]

    weights_data = (
        discretize(dataset, weight_bins)
        if dataset.value_kind == CONTINUOUS
        else dataset
    )
    cache = SuWeightCache(weights_data)
    pairs = []
    for a, b in combinations(range(len(runs)), 2):
        report = set_similarity(runs[a].selected, runs[b].selected, weights_data, cache)
        pairs.append(PairSimilarity(a, b, report.similarity))
    if not pairs:
        raise ValueError("stability needs at least two selection runs")
    mean = float(np.mean([p.similarity for p in pairs]))
    return StabilityResult(tuple(runs), tuple(pairs), mean)
