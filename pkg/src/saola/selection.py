"""Online single-feature selection over a feature stream.

Each arriving feature passes a relevance gate against the class, then a
pairwise redundancy check against the currently selected set; surviving
features may in turn evict selected incumbents they dominate.  The selected
set is therefore minimal at every step without ever revisiting a discarded
feature.

The two redundancy rules share one shape: a feature loses to a partner with
strictly higher class relevance whenever their mutual correlation reaches a
bound, which is the smaller of the two relevances in ``min`` mode and the
larger in ``max`` mode.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .correlation import (
    FISHER_Z,
    SU_DISCRETE,
    ContinuousVar,
    CorrelationScore,
    DiscreteVar,
    MeasureConfig,
    Var,
    abs_correlation,
    fisher_z_test,
    make_feature_var,
    make_target_var,
    symmetrical_uncertainty,
)
from .dataset import CONTINUOUS, DISCRETE, Dataset, OrderSpec, SparseColumn, feature_stream

BOUND_MIN = "min"
BOUND_MAX = "max"
TIE_STRICT = "strict"
TIE_DISCARD_NEW = "discard_new"


@dataclass(frozen=True)
class SaolaConfig:
    measure: MeasureConfig
    bound_mode: str = BOUND_MIN
    tie_break: str = TIE_STRICT
    top_k: Optional[int] = None

    def __post_init__(self):
        if self.bound_mode not in (BOUND_MIN, BOUND_MAX):
            raise ValueError(f"unknown bound_mode {self.bound_mode!r}")
        if self.tie_break not in (TIE_STRICT, TIE_DISCARD_NEW):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be at least 1")


@dataclass
class SelectedFeature:
    feature_index: int
    var: Var
    relevance: CorrelationScore
    arrival_step: int


@dataclass
class SelectionCounters:
    seen: int = 0
    discarded_irrelevant: int = 0
    discarded_redundant_new: int = 0
    removed_incumbent: int = 0

    def balanced_against(self, n_selected: int) -> bool:
        return self.seen == (
            self.discarded_irrelevant
            + self.discarded_redundant_new
            + self.removed_incumbent
            + n_selected
        )


@dataclass
class SelectionState:
    """Mutable per-run state: the selected set plus instrumentation."""

    target: Var
    cfg: SaolaConfig
    selected: list[SelectedFeature] = field(default_factory=list)
    step: int = 0
    counters: SelectionCounters = field(default_factory=SelectionCounters)
    comparisons: int = 0  # correlation evaluations, gate included

    def selected_indices(self) -> list[int]:
        return [f.feature_index for f in self.selected]


@dataclass
class SelectionResult:
    selected_indices: list[int]
    scores: list[CorrelationScore]
    counters: SelectionCounters
    comparisons: int
    elapsed_ms: float

    def to_dict(self) -> dict:
        return {
            "selected": [
                {
                    "feature": idx,
                    "relevance": score.value,
                    "p_value": score.p_value,
                }
                for idx, score in zip(self.selected_indices, self.scores)
            ],
            "counters": {
                "seen": self.counters.seen,
                "discarded_irrelevant": self.counters.discarded_irrelevant,
                "discarded_redundant_new": self.counters.discarded_redundant_new,
                "removed_incumbent": self.counters.removed_incumbent,
            },
            "comparisons": self.comparisons,
        }


def relevance_gate(var: Var, target: Var, measure: MeasureConfig) -> Optional[CorrelationScore]:
    """Score a feature against the class; None means the gate discards it.

    Discrete backend keeps a feature when SU exceeds delta; the continuous
    backend keeps it when the Fisher z p-value is at most alpha.
    """
    if measure.backend == SU_DISCRETE:
        if not isinstance(var, DiscreteVar) or not isinstance(target, DiscreteVar):
            raise TypeError("su_discrete backend needs discrete columns")
        score = symmetrical_uncertainty(var, target)
        return None if score.value <= measure.delta else score
    if not isinstance(var, ContinuousVar) or not isinstance(target, ContinuousVar):
        raise TypeError("fisher_z backend needs continuous columns")
    score = fisher_z_test(var, target)
    return None if score.p_value > measure.alpha else score


def _pair_correlation(a: Var, b: Var, measure: MeasureConfig) -> float:
    if measure.backend == SU_DISCRETE:
        return symmetrical_uncertainty(a, b).value
    return abs_correlation(a, b)


def _bound(rel_a: float, rel_b: float, bound_mode: str) -> float:
    return min(rel_a, rel_b) if bound_mode == BOUND_MIN else max(rel_a, rel_b)


def _cached_correlation(state: SelectionState, cache: dict, cand: SelectedFeature,
                        incumbent: SelectedFeature) -> float:
    key = incumbent.feature_index
    if key not in cache:
        cache[key] = _pair_correlation(cand.var, incumbent.var, state.cfg.measure)
        state.comparisons += 1
    return cache[key]


def redundancy_check_new(cand: SelectedFeature, state: SelectionState, cache: dict) -> bool:
    """True when some incumbent makes the new feature redundant.

    Incumbents are scanned in insertion order and the first witness wins.
    Under ``discard_new`` an incumbent with merely equal relevance also
    qualifies, so exact duplicates lose to the feature already selected.
    """
    strict = state.cfg.tie_break == TIE_STRICT
    for incumbent in state.selected:
        rel_i = incumbent.relevance.value
        rel_f = cand.relevance.value
        dominated = rel_i > rel_f if strict else rel_i >= rel_f
        if not dominated:
            continue
        corr = _cached_correlation(state, cache, cand, incumbent)
        if corr >= _bound(rel_f, rel_i, state.cfg.bound_mode):
            return True
    return False


def redundancy_purge_incumbents(cand: SelectedFeature, state: SelectionState,
                                cache: dict) -> list[int]:
    """Remove every incumbent the new feature dominates; return their indices."""
    removed: list[int] = []
    survivors: list[SelectedFeature] = []
    for incumbent in state.selected:
        if cand.relevance.value > incumbent.relevance.value:
            corr = _cached_correlation(state, cache, cand, incumbent)
            if corr >= _bound(cand.relevance.value, incumbent.relevance.value,
                              state.cfg.bound_mode):
                removed.append(incumbent.feature_index)
                continue
        survivors.append(incumbent)
    state.selected = survivors
    return removed


def _truncate_top_k(state: SelectionState) -> int:
    k = state.cfg.top_k
    if k is None or len(state.selected) <= k:
        return 0
    ranked = sorted(state.selected, key=lambda f: (-f.relevance.value, f.arrival_step))
    keep = {id(f) for f in ranked[:k]}
    dropped = len(state.selected) - k
    state.selected = [f for f in state.selected if id(f) in keep]
    return dropped


def saola_step(state: SelectionState, feature_index: int, column: SparseColumn) -> SelectionState:
    """Process one arriving feature: gate, redundancy check, purge, insert."""
    state.step += 1
    state.counters.seen += 1
    var = make_feature_var(column, state.target.n, state.cfg.measure.backend)
    state.comparisons += 1
    score = relevance_gate(var, state.target, state.cfg.measure)
    if score is None:
        state.counters.discarded_irrelevant += 1
        return state
    cand = SelectedFeature(feature_index, var, score, state.step)
    cache: dict = {}
    if redundancy_check_new(cand, state, cache):
        state.counters.discarded_redundant_new += 1
        return state
    removed = redundancy_purge_incumbents(cand, state, cache)
    state.counters.removed_incumbent += len(removed)
    state.selected.append(cand)
    state.counters.removed_incumbent += _truncate_top_k(state)
    return state


def saola_run(
    stream: Iterable[tuple[int, SparseColumn]],
    target: Var,
    cfg: SaolaConfig,
) -> SelectionResult:
    """Fold the per-feature step over a stream and report the final set."""
    state = SelectionState(target=target, cfg=cfg)
    started = time.perf_counter()
    for feature_index, column in stream:
        saola_step(state, feature_index, column)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    if state.counters.seen == 0:
        raise ValueError("empty feature stream")
    return SelectionResult(
        selected_indices=state.selected_indices(),
        scores=[f.relevance for f in state.selected],
        counters=state.counters,
        comparisons=state.comparisons,
        elapsed_ms=elapsed_ms,
    )


def backend_for_kind(value_kind: str) -> str:
    return SU_DISCRETE if value_kind == DISCRETE else FISHER_Z


def select_features(
    dataset: Dataset,
    cfg: SaolaConfig,
    order: OrderSpec = OrderSpec(),
) -> SelectionResult:
    """Run selection over a dataset's feature stream in the given order."""
    expected = DISCRETE if cfg.measure.backend == SU_DISCRETE else CONTINUOUS
    if dataset.value_kind != expected:
        raise ValueError(
            f"{cfg.measure.backend} backend needs a {expected} dataset, "
            f"got {dataset.value_kind}"
        )
    target = make_target_var(dataset.labels, cfg.measure.backend)
    return saola_run(feature_stream(dataset, order), target, cfg)
