"""Sparse labeled datasets: svmlight ingestion, column views, and streams.

A dataset is stored column-major: one sorted sparse column per feature,
with rows absent from a column implicitly holding value 0.  Labels are
remapped at load time to dense codes 0..c-1 in first-appearance order.
Datasets are immutable after construction; streams are thin generators
over the stored columns.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

DISCRETE = "discrete"
CONTINUOUS = "continuous"


class DataFormatError(ValueError):
    """Raised for malformed input files or inconsistent dataset arguments."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SparseColumn:
    """One feature column: sorted zero-based row indices and nonzero values."""

    feature_index: int  # 1-based, as in svmlight files
    indices: np.ndarray  # int64, strictly increasing, no duplicates
    values: np.ndarray  # int64 codes (discrete) or float64 (continuous)

    @property
    def nnz(self) -> int:
        return int(self.indices.shape[0])


@dataclass(frozen=True)
class Dataset:
    n_instances: int
    n_features: int
    columns: tuple[SparseColumn, ...]
    labels: np.ndarray  # int64 codes 0..c-1, length n_instances
    value_kind: str
    label_values: tuple[float, ...] = ()  # code -> label value in the source file

    def __post_init__(self):
        if self.value_kind not in (DISCRETE, CONTINUOUS):
            raise DataFormatError(f"unknown value_kind {self.value_kind!r}")
        if len(self.columns) != self.n_features:
            raise DataFormatError("column count does not match n_features")
        if self.labels.shape[0] != self.n_instances:
            raise DataFormatError("label vector length does not match n_instances")
        if not self.label_values:
            codes = int(self.labels.max()) + 1 if self.n_instances else 0
            object.__setattr__(
                self, "label_values", tuple(float(c) for c in range(codes))
            )

    @property
    def n_classes(self) -> int:
        return len(self.label_values)

    def column(self, feature_index: int) -> SparseColumn:
        """Column for a 1-based feature index."""
        if not 1 <= feature_index <= self.n_features:
            raise DataFormatError(f"feature index {feature_index} out of range")
        return self.columns[feature_index - 1]

    def label_histogram(self) -> dict[int, int]:
        counts = np.bincount(self.labels, minlength=self.n_classes)
        return {code: int(c) for code, c in enumerate(counts)}

    def dense_column(self, feature_index: int) -> np.ndarray:
        col = self.column(feature_index)
        dtype = np.int64 if self.value_kind == DISCRETE else np.float64
        out = np.zeros(self.n_instances, dtype=dtype)
        out[col.indices] = col.values
        return out

    def subset_instances(self, rows: np.ndarray) -> "Dataset":
        """New dataset restricted to the given sorted, unique row ids."""
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            raise DataFormatError("instance subset must be nonempty")
        if np.any(np.diff(rows) <= 0):
            raise DataFormatError("instance subset must be sorted and unique")
        if rows[0] < 0 or rows[-1] >= self.n_instances:
            raise DataFormatError("instance subset out of range")
        columns = []
        for col in self.columns:
            keep = np.isin(col.indices, rows, assume_unique=True)
            new_idx = np.searchsorted(rows, col.indices[keep])
            columns.append(
                SparseColumn(
                    col.feature_index,
                    _frozen(new_idx.astype(np.int64)),
                    _frozen(col.values[keep].copy()),
                )
            )
        return Dataset(
            n_instances=int(rows.shape[0]),
            n_features=self.n_features,
            columns=tuple(columns),
            labels=_frozen(self.labels[rows].copy()),
            value_kind=self.value_kind,
            label_values=self.label_values,
        )


@dataclass(frozen=True)
class Grouping:
    """Ordered disjoint groups of 1-based feature indices."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for g, members in enumerate(self.groups, start=1):
            if not members:
                raise DataFormatError(f"group {g} is empty")
            for idx in members:
                if idx < 1:
                    raise DataFormatError(f"group {g} has non-positive index {idx}")
                if idx in seen:
                    raise DataFormatError(f"feature {idx} appears in two groups")
                seen.add(idx)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def max_feature_index(self) -> int:
        return max(max(g) for g in self.groups)


@dataclass(frozen=True)
class FeatureGroupView:
    """A group as streamed: id plus (feature_index, column) members."""

    group_id: int
    members: tuple[tuple[int, SparseColumn], ...]


@dataclass(frozen=True)
class OrderSpec:
    """Presentation order for a stream of m items (features or groups)."""

    mode: str = "natural"
    seed: Optional[int] = None
    permutation: Optional[tuple[int, ...]] = None

    @classmethod
    def natural(cls) -> "OrderSpec":
        return cls("natural")

    @classmethod
    def shuffled(cls, seed: int) -> "OrderSpec":
        return cls("shuffled", seed=int(seed))

    @classmethod
    def explicit(cls, permutation: Sequence[int]) -> "OrderSpec":
        return cls("explicit", permutation=tuple(int(i) for i in permutation))

    def indices(self, m: int) -> np.ndarray:
        """The 1-based visit order over m items."""
        if self.mode == "natural":
            return np.arange(1, m + 1, dtype=np.int64)
        if self.mode == "shuffled":
            rng = np.random.default_rng(self.seed)
            return rng.permutation(m).astype(np.int64) + 1
        if self.mode == "explicit":
            perm = np.asarray(self.permutation, dtype=np.int64)
            if perm.shape[0] != m or np.any(np.sort(perm) != np.arange(1, m + 1)):
                raise DataFormatError(
                    f"explicit order must be a permutation of 1..{m}"
                )
            return perm
        raise DataFormatError(f"unknown order mode {self.mode!r}")


# ---------------------------------------------------------------------------
# svmlight I/O

def _parse_line(line: str, lineno: int, value_kind: str):
    parts = line.split()
    try:
        label = float(parts[0])
    except ValueError:
        raise DataFormatError(f"line {lineno}: bad label {parts[0]!r}") from None
    idxs: list[int] = []
    vals: list[float] = []
    prev = 0
    for tok in parts[1:]:
        try:
            stext, vtext = tok.split(":", 1)
            idx = int(stext)
            val = float(vtext)
        except ValueError:
            raise DataFormatError(f"line {lineno}: bad entry {tok!r}") from None
        if idx <= prev:
            raise DataFormatError(
                f"line {lineno}: feature indices must be strictly increasing "
                f"(got {idx} after {prev})"
            )
        prev = idx
        if val == 0.0:
            continue  # explicit zeros are the implicit default; drop them
        if value_kind == DISCRETE:
            if val != int(val) or val < 0:
                raise DataFormatError(
                    f"line {lineno}: discrete values must be nonnegative "
                    f"integer codes (got {vtext})"
                )
        idxs.append(idx)
        vals.append(val)
    return label, idxs, vals


def load_svmlight(
    path,
    value_kind: str,
    n_features: Optional[int] = None,
) -> Dataset:
    """Load an svmlight/libsvm text file into a column-major Dataset.

    Labels are remapped to dense codes 0..c-1 in first-appearance order.
    ``n_features`` overrides the default (the maximum index observed),
    which svmlight files underreport when trailing features are all zero.
    """
    if value_kind not in (DISCRETE, CONTINUOUS):
        raise DataFormatError(f"unknown value_kind {value_kind!r}")
    raw_labels: list[float] = []
    feat_ids: list[int] = []
    row_ids: list[int] = []
    values: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            row = len(raw_labels)
            label, idxs, vals = _parse_line(stripped, lineno, value_kind)
            raw_labels.append(label)
            feat_ids.extend(idxs)
            row_ids.extend([row] * len(idxs))
            values.extend(vals)
    if not raw_labels:
        raise DataFormatError(f"{path}: empty dataset file")

    n = len(raw_labels)
    max_idx = max(feat_ids) if feat_ids else 0
    if n_features is None:
        n_features = max_idx
    elif n_features < max_idx:
        raise DataFormatError(
            f"n_features={n_features} is below the maximum index {max_idx} in the file"
        )

    code_of: dict[float, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        if lab not in code_of:
            code_of[lab] = len(code_of)
        labels[i] = code_of[lab]
    if len(code_of) < 2:
        raise DataFormatError("dataset must contain at least 2 distinct labels")

    f = np.asarray(feat_ids, dtype=np.int64)
    r = np.asarray(row_ids, dtype=np.int64)
    v = np.asarray(values, dtype=np.float64)
    order = np.lexsort((r, f))
    f, r, v = f[order], r[order], v[order]
    starts = np.searchsorted(f, np.arange(1, n_features + 1))
    ends = np.searchsorted(f, np.arange(2, n_features + 2))

    vdtype = np.int64 if value_kind == DISCRETE else np.float64
    columns = tuple(
        SparseColumn(
            j + 1,
            _frozen(r[starts[j]:ends[j]].copy()),
            _frozen(v[starts[j]:ends[j]].astype(vdtype)),
        )
        for j in range(n_features)
    )
    label_values = tuple(sorted(code_of, key=code_of.get))
    return Dataset(n, n_features, columns, _frozen(labels), value_kind, label_values)


def save_svmlight(dataset: Dataset, path) -> None:
    """Write the dataset back out as svmlight text (original label values)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_svmlight(dataset))


def _format_number(value: float) -> str:
    return str(int(value)) if value == int(value) else repr(float(value))


def dumps_svmlight(dataset: Dataset) -> str:
    per_row: list[list[str]] = [[] for _ in range(dataset.n_instances)]
    discrete = dataset.value_kind == DISCRETE
    for col in dataset.columns:
        for row, val in zip(col.indices, col.values):
            text = str(int(val)) if discrete else repr(float(val))
            per_row[row].append(f"{col.feature_index}:{text}")
    buf = io.StringIO()
    for row in range(dataset.n_instances):
        buf.write(_format_number(dataset.label_values[dataset.labels[row]]))
        for entry in per_row[row]:
            buf.write(" ")
            buf.write(entry)
        buf.write("\n")
    return buf.getvalue()


def align_label_codes(reference: Dataset, other: Dataset) -> Dataset:
    """Re-code ``other``'s labels so equal label values share codes with ``reference``.

    Needed when two files (say train and test) were loaded separately: each
    load assigns codes in its own first-appearance order.
    """
    if other.label_values == reference.label_values:
        return other
    mapping = {}
    ref_code_of = {value: code for code, value in enumerate(reference.label_values)}
    for code, value in enumerate(other.label_values):
        if value not in ref_code_of:
            raise DataFormatError(
                f"label value {value!r} does not occur in the reference dataset"
            )
        mapping[code] = ref_code_of[value]
    remap = np.array([mapping[c] for c in range(len(other.label_values))], dtype=np.int64)
    return Dataset(
        n_instances=other.n_instances,
        n_features=other.n_features,
        columns=other.columns,
        labels=_frozen(remap[other.labels]),
        value_kind=other.value_kind,
        label_values=reference.label_values,
    )


# ---------------------------------------------------------------------------
# streams

def feature_stream(
    dataset: Dataset, order: OrderSpec = OrderSpec()
) -> Iterator[tuple[int, SparseColumn]]:
    """Yield every (feature_index, column) exactly once in the given order."""
    for idx in order.indices(dataset.n_features):
        yield int(idx), dataset.columns[idx - 1]


def group_stream(
    dataset: Dataset, grouping: Grouping, order: OrderSpec = OrderSpec()
) -> Iterator[FeatureGroupView]:
    """Yield each feature group once, members bound to their columns."""
    if grouping.max_feature_index() > dataset.n_features:
        raise DataFormatError(
            f"grouping references feature {grouping.max_feature_index()} "
            f"but the dataset has {dataset.n_features}"
        )
    for gid in order.indices(grouping.n_groups):
        members = tuple(
            (idx, dataset.columns[idx - 1]) for idx in grouping.groups[gid - 1]
        )
        yield FeatureGroupView(int(gid), members)


def random_partition(n_features: int, n_groups: int, seed: int) -> Grouping:
    """Split features 1..n_features into n_groups disjoint groups.

    Group sizes differ by at most one; membership is a seeded shuffle.
    """
    if not 1 <= n_groups <= n_features:
        raise DataFormatError(
            f"n_groups must be in [1, {n_features}], got {n_groups}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_features) + 1
    base, extra = divmod(n_features, n_groups)
    groups = []
    pos = 0
    for g in range(n_groups):
        size = base + (1 if g < extra else 0)
        members = np.sort(perm[pos:pos + size])
        groups.append(tuple(int(i) for i in members))
        pos += size
    return Grouping(tuple(groups))


def split(dataset: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded disjoint train/test split over instances.

    Test size is round(N * fraction) clamped to [1, N-1]; both parts keep
    all feature columns and the original relative instance order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataFormatError("test_fraction must be strictly between 0 and 1")
    n = dataset.n_instances
    if n < 2:
        raise DataFormatError("need at least 2 instances to split")
    test_size = min(max(int(round(n * test_fraction)), 1), n - 1)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    test_rows = np.sort(perm[:test_size])
    train_rows = np.sort(perm[test_size:])
    return dataset.subset_instances(train_rows), dataset.subset_instances(test_rows)


def discretize(dataset: Dataset, n_bins: int) -> Dataset:
    """Equal-frequency binning of every column into codes 0..n_bins-1.

    Bin of a value is floor(rank_min * n_bins / N) where rank_min counts
    strictly smaller values, so ties always land in the lower bin.  Rows
    whose code is 0 stay implicit, which keeps columns sparse whenever 0
    is the per-column minimum.
    """
    if dataset.value_kind != CONTINUOUS:
        raise DataFormatError("discretize expects a continuous dataset")
    if n_bins < 2:
        raise DataFormatError("n_bins must be at least 2")
    if n_bins > dataset.n_instances:
        raise DataFormatError("n_bins cannot exceed the number of instances")
    n = dataset.n_instances
    columns = []
    for col in dataset.columns:
        dense = np.zeros(n, dtype=np.float64)
        dense[col.indices] = col.values
        ranks = np.searchsorted(np.sort(dense), dense, side="left")
        codes = (ranks * n_bins) // n
        nz = np.flatnonzero(codes)
        columns.append(
            SparseColumn(
                col.feature_index,
                _frozen(nz.astype(np.int64)),
                _frozen(codes[nz].astype(np.int64)),
            )
        )
    return Dataset(
        n_instances=n,
        n_features=dataset.n_features,
        columns=tuple(columns),
        labels=dataset.labels,
        value_kind=DISCRETE,
        label_values=dataset.label_values,
    )
