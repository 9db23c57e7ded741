"""Online group feature selection: sparse between groups and within them.

A group arriving from the stream is dropped whole when no member passes the
relevance gate; surviving members are pruned against each other, then traded
off pairwise against the members of already-selected groups.  Groups that
lose all members disappear, so the retained state is sparse at both levels.

Pairwise rules, bounds, and tie handling are shared with the single-feature
selector; a stream of singleton groups reproduces its output exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .correlation import CorrelationScore, Var, make_feature_var, make_target_var
from .dataset import (
    CONTINUOUS,
    DISCRETE,
    Dataset,
    FeatureGroupView,
    Grouping,
    OrderSpec,
    group_stream,
)
from .selection import (
    SU_DISCRETE,
    SaolaConfig,
    TIE_STRICT,
    _bound,
    _pair_correlation,
    relevance_gate,
)


@dataclass
class GroupMember:
    feature_index: int
    var: Var
    relevance: CorrelationScore


@dataclass
class FeatureGroup:
    group_id: int
    members: list[GroupMember]


@dataclass
class GroupCounters:
    groups_seen: int = 0
    groups_discarded_irrelevant: int = 0
    groups_emptied: int = 0
    features_seen: int = 0
    features_discarded_irrelevant: int = 0
    features_removed_intra: int = 0
    features_removed_inter: int = 0

    def groups_balanced(self, n_retained: int) -> bool:
        return self.groups_seen == (
            self.groups_discarded_irrelevant + self.groups_emptied + n_retained
        )

    def features_balanced(self, n_retained: int) -> bool:
        return self.features_seen == (
            self.features_discarded_irrelevant
            + self.features_removed_intra
            + self.features_removed_inter
            + n_retained
        )


@dataclass
class GroupState:
    target: Var
    cfg: SaolaConfig
    groups: list[FeatureGroup] = field(default_factory=list)
    step: int = 0
    counters: GroupCounters = field(default_factory=GroupCounters)
    comparisons: int = 0

    def selected_indices(self) -> list[int]:
        return [m.feature_index for g in self.groups for m in g.members]

    def n_retained_features(self) -> int:
        return sum(len(g.members) for g in self.groups)


@dataclass
class GroupResult:
    groups: list[tuple[int, list[int], list[CorrelationScore]]]
    counters: GroupCounters
    comparisons: int
    elapsed_ms: float

    @property
    def selected_indices(self) -> list[int]:
        return [i for _, members, _ in self.groups for i in members]

    def to_dict(self) -> dict:
        return {
            "groups": [
                {
                    "group": gid,
                    "members": [
                        {
                            "feature": idx,
                            "relevance": score.value,
                            "p_value": score.p_value,
                        }
                        for idx, score in zip(members, scores)
                    ],
                }
                for gid, members, scores in self.groups
            ],
            "counters": {
                "groups_seen": self.counters.groups_seen,
                "groups_discarded_irrelevant": self.counters.groups_discarded_irrelevant,
                "groups_emptied": self.counters.groups_emptied,
                "features_seen": self.counters.features_seen,
                "features_discarded_irrelevant": self.counters.features_discarded_irrelevant,
                "features_removed_intra": self.counters.features_removed_intra,
                "features_removed_inter": self.counters.features_removed_inter,
            },
            "comparisons": self.comparisons,
        }


def _member_correlation(state: GroupState, cache: dict, a: GroupMember, b: GroupMember) -> float:
    key = (min(a.feature_index, b.feature_index), max(a.feature_index, b.feature_index))
    if key not in cache:
        cache[key] = _pair_correlation(a.var, b.var, state.cfg.measure)
        state.comparisons += 1
    return cache[key]


def irrelevant_group_gate(
    view: FeatureGroupView, state: GroupState
) -> Optional[FeatureGroup]:
    """Gate every member; None when the whole group is irrelevant.

    Members failing the gate are dropped from a surviving group, so every
    retained member carries a cached relevance score above the gate.
    """
    members: list[GroupMember] = []
    for feature_index, column in view.members:
        var = make_feature_var(column, state.target.n, state.cfg.measure.backend)
        state.comparisons += 1
        score = relevance_gate(var, state.target, state.cfg.measure)
        if score is None:
            state.counters.features_discarded_irrelevant += 1
        else:
            members.append(GroupMember(feature_index, var, score))
    if not members:
        return None
    return FeatureGroup(view.group_id, members)


def prune_within_group(group: FeatureGroup, state: GroupState, cache: dict) -> FeatureGroup:
    """Apply the directional redundancy rules between members to a fixed point.

    One pass walks the members in stored order: a member dominated by any
    other is removed on the spot, otherwise it removes every member it
    dominates.  Passes repeat until nothing changes, so the survivors do not
    depend on which removal happened to come first within a pass.
    """
    strict = state.cfg.tie_break == TIE_STRICT
    members = list(group.members)

    def dominated_by_any(f: GroupMember) -> bool:
        for other in members:
            if other is f:
                continue
            rel_o, rel_f = other.relevance.value, f.relevance.value
            wins = rel_o > rel_f if strict else rel_o >= rel_f
            if wins and _member_correlation(state, cache, f, other) >= _bound(
                rel_f, rel_o, state.cfg.bound_mode
            ):
                return True
        return False

    changed = True
    while changed:
        changed = False
        j = 0
        while j < len(members):
            f = members[j]
            if dominated_by_any(f):
                members.pop(j)
                state.counters.features_removed_intra += 1
                changed = True
                continue
            losers = [
                other
                for other in members
                if other is not f
                and f.relevance.value > other.relevance.value
                and _member_correlation(state, cache, f, other)
                >= _bound(f.relevance.value, other.relevance.value, state.cfg.bound_mode)
            ]
            if losers:
                doomed = {id(o) for o in losers}
                members = [m for m in members if id(m) not in doomed]
                state.counters.features_removed_intra += len(losers)
                changed = True
                j = members.index(f)
            j += 1
    return FeatureGroup(group.group_id, members)


def purge_between_groups(state: GroupState, new_group: FeatureGroup,
                         cache: dict) -> Optional[FeatureGroup]:
    """Trade the new group off against the selected groups, member-wise.

    Phase one removes every new member dominated by some incumbent member
    (first witness in group-insertion then member order); an emptied new
    group is not inserted.  Phase two then removes incumbents dominated by a
    surviving new member and drops any group that emptied.  Running the
    phases in this order keeps singleton groups exactly equivalent to the
    single-feature selector.
    """
    strict = state.cfg.tie_break == TIE_STRICT

    survivors: list[GroupMember] = []
    for f in new_group.members:
        discarded = False
        for grp in state.groups:
            for inc in grp.members:
                rel_i, rel_f = inc.relevance.value, f.relevance.value
                wins = rel_i > rel_f if strict else rel_i >= rel_f
                if wins and _member_correlation(state, cache, f, inc) >= _bound(
                    rel_f, rel_i, state.cfg.bound_mode
                ):
                    discarded = True
                    break
            if discarded:
                break
        if discarded:
            state.counters.features_removed_inter += 1
        else:
            survivors.append(f)
    if not survivors:
        state.counters.groups_emptied += 1
        return None

    kept_groups: list[FeatureGroup] = []
    for grp in state.groups:
        kept: list[GroupMember] = []
        for inc in grp.members:
            removed = False
            for f in survivors:
                if f.relevance.value > inc.relevance.value and _member_correlation(
                    state, cache, inc, f
                ) >= _bound(f.relevance.value, inc.relevance.value, state.cfg.bound_mode):
                    removed = True
                    break
            if removed:
                state.counters.features_removed_inter += 1
            else:
                kept.append(inc)
        if kept:
            kept_groups.append(FeatureGroup(grp.group_id, kept))
        else:
            state.counters.groups_emptied += 1
    state.groups = kept_groups

    pruned = FeatureGroup(new_group.group_id, survivors)
    state.groups.append(pruned)
    return pruned


def group_saola_step(state: GroupState, view: FeatureGroupView) -> GroupState:
    state.step += 1
    state.counters.groups_seen += 1
    state.counters.features_seen += len(view.members)
    gated = irrelevant_group_gate(view, state)
    if gated is None:
        state.counters.groups_discarded_irrelevant += 1
        return state
    cache: dict = {}
    pruned = prune_within_group(gated, state, cache)
    purge_between_groups(state, pruned, cache)
    return state


def group_saola_run(
    stream: Iterable[FeatureGroupView],
    target: Var,
    cfg: SaolaConfig,
) -> GroupResult:
    """Fold the per-group step over a group stream and report the final state."""
    state = GroupState(target=target, cfg=cfg)
    started = time.perf_counter()
    for view in stream:
        group_saola_step(state, view)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    if state.counters.groups_seen == 0:
        raise ValueError("empty group stream")
    return GroupResult(
        groups=[
            (
                g.group_id,
                [m.feature_index for m in g.members],
                [m.relevance for m in g.members],
            )
            for g in state.groups
        ],
        counters=state.counters,
        comparisons=state.comparisons,
        elapsed_ms=elapsed_ms,
    )


def select_groups(
    dataset: Dataset,
    grouping: Grouping,
    cfg: SaolaConfig,
    order: OrderSpec = OrderSpec(),
) -> GroupResult:
    """Run group selection over a dataset in the given group order."""
    expected = DISCRETE if cfg.measure.backend == SU_DISCRETE else CONTINUOUS
    if dataset.value_kind != expected:
        raise ValueError(
            f"{cfg.measure.backend} backend needs a {expected} dataset, "
            f"got {dataset.value_kind}"
        )
    target = make_target_var(dataset.labels, cfg.measure.backend)
    return group_saola_run(group_stream(dataset, grouping, order), target, cfg)
