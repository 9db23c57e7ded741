"""Desk-scale evaluation: 1-NN accuracy and randomized feature-order trials."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import DISCRETE, Dataset, OrderSpec
from .selection import SaolaConfig, select_features


@dataclass(frozen=True)
class TrialOutcome:
    order_seed: int
    selected: tuple[int, ...]
    accuracy: float


@dataclass(frozen=True)
class TrialReport:
    trials: tuple[TrialOutcome, ...]
    mean_accuracy: float
    std_accuracy: float  # sample standard deviation, denominator n-1
    mean_size: float


def dense_matrix(dataset: Dataset, feature_indices: Sequence[int]) -> np.ndarray:
    """Materialize the given 1-based feature columns as a dense (N, s) array."""
    out = np.zeros((dataset.n_instances, len(feature_indices)), dtype=np.float64)
    for j, idx in enumerate(feature_indices):
        col = dataset.column(idx)
        out[col.indices, j] = col.values
    return out


def knn_predict(
    train: Dataset,
    test: Dataset,
    feature_indices: Sequence[int],
    k: int = 1,
) -> np.ndarray:
    """k-NN labels for every test instance over the selected columns.

    Continuous data uses Euclidean distance on raw values; discrete data
    counts per-feature mismatches.  Distance ties resolve to the lowest
    training-instance index, vote ties to the lowest label code.
    """
    feature_indices = list(feature_indices)
    if not feature_indices:
        raise ValueError("empty selected feature set")
    if k < 1:
        raise ValueError("k must be at least 1")
    if train.value_kind != test.value_kind:
        raise ValueError("train and test value kinds differ")
    x_train = dense_matrix(train, feature_indices)
    x_test = dense_matrix(test, feature_indices)
    n_test = test.n_instances
    n_classes = train.n_classes
    pred = np.empty(n_test, dtype=np.int64)

    block = max(1, min(n_test, 4_000_000 // max(train.n_instances, 1)))
    for start in range(0, n_test, block):
        stop = min(start + block, n_test)
        chunk = x_test[start:stop]
        if train.value_kind == DISCRETE:
            dist = np.zeros((stop - start, train.n_instances), dtype=np.float64)
            for j in range(len(feature_indices)):
                dist += chunk[:, j][:, None] != x_train[:, j][None, :]
        else:
            dist = (
                (chunk * chunk).sum(axis=1)[:, None]
                + (x_train * x_train).sum(axis=1)[None, :]
                - 2.0 * chunk @ x_train.T
            )
        if k == 1:
            pred[start:stop] = train.labels[np.argmin(dist, axis=1)]
        else:
            for r in range(dist.shape[0]):
                order = np.lexsort((np.arange(train.n_instances), dist[r]))[:k]
                votes = np.bincount(train.labels[order], minlength=n_classes)
                pred[start + r] = int(np.argmax(votes))
    return pred


def accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("prediction and truth lengths differ")
    return float(np.mean(pred == truth))


def order_trials(
    train: Dataset,
    test: Dataset,
    cfg: SaolaConfig,
    n_trials: int,
    seed: int,
    k: int = 1,
    threads: int = 1,
) -> TrialReport:
    """Re-run selection under shuffled feature orders and score each outcome."""
    if n_trials < 2:
        raise ValueError("need at least 2 trials")
    trial_seeds = [
        int(s) for s in np.random.default_rng(seed).integers(0, 2**63 - 1, size=n_trials)
    ]

    def one_trial(order_seed: int) -> TrialOutcome:
        result = select_features(train, cfg, OrderSpec.shuffled(order_seed))
        pred = knn_predict(train, test, result.selected_indices, k=k)
        return TrialOutcome(order_seed, tuple(result.selected_indices), accuracy(pred, test.labels))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trials = list(pool.map(one_trial, trial_seeds))
    else:
        trials = [one_trial(s) for s in trial_seeds]

    accs = np.array([t.accuracy for t in trials], dtype=np.float64)
    sizes = np.array([len(t.selected) for t in trials], dtype=np.float64)
    return TrialReport(
        trials=tuple(trials),
        mean_accuracy=float(accs.mean()),
        std_accuracy=float(accs.std(ddof=1)),
        mean_size=float(sizes.mean()),
    )
