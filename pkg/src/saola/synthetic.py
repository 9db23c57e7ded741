"""Deterministic synthetic datasets for benchmarks, trials, and tests.

Three constructions matter here:

* pinned streams, where a fixed prefix of mutually tolerable relevant
  features is followed by empty columns, so the selected-set size is known
  at every step and comparison-count bounds can be checked exactly;
* clustered plants, where each cluster has one dominant feature that wins
  against its satellites under any arrival order;
* a hard continuous benchmark in the style of the NIPS-2003 hypercube
  datasets: cluster centroids on hypercube vertices with parity labels, so
  every single feature is marginally uninformative, plus linear-combination
  features and pure Gaussian probes.
"""

from __future__ import annotations

import numpy as np

from .correlation import DiscreteVar, symmetrical_uncertainty
from .dataset import CONTINUOUS, DISCRETE, Dataset, SparseColumn


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def dataset_from_dense(x: np.ndarray, labels: np.ndarray, value_kind: str) -> Dataset:
    """Build a column-major sparse dataset from a dense (N, P) matrix.

    Labels are re-coded in first-appearance order (the load-time convention),
    with the incoming values kept as the datasets's label values.
    """
    x = np.asarray(x)
    raw = np.asarray(labels)
    n, p = x.shape
    if raw.shape[0] != n:
        raise ValueError("label vector length does not match the matrix")
    if np.unique(raw).shape[0] < 2:
        raise ValueError("need at least 2 distinct labels")
    code_of: dict[float, int] = {}
    coded = np.empty(n, dtype=np.int64)
    for i, value in enumerate(raw):
        value = float(value)
        if value not in code_of:
            code_of[value] = len(code_of)
        coded[i] = code_of[value]
    label_values = tuple(sorted(code_of, key=code_of.get))
    vdtype = np.int64 if value_kind == DISCRETE else np.float64
    columns = []
    for j in range(p):
        col = x[:, j]
        nz = np.flatnonzero(col).astype(np.int64)
        columns.append(
            SparseColumn(j + 1, _frozen(nz), _frozen(col[nz].astype(vdtype)))
        )
    return Dataset(n, p, tuple(columns), _frozen(coded), value_kind, label_values)


def _su(a: np.ndarray, b: np.ndarray) -> float:
    return symmetrical_uncertainty(
        DiscreteVar.from_dense(a), DiscreteVar.from_dense(b)
    ).value


def make_pinned_stream(
    n_features: int,
    n_pinned: int = 8,
    n_instances: int = 256,
    seed: int = 0,
) -> Dataset:
    """Discrete dataset whose selection retains exactly the first n_pinned columns.

    The pinned columns are independent bits and the class is their majority
    vote, so each is relevant while no pair can trigger a redundancy rule.
    All remaining columns are empty (constant zero) and fall at the gate.
    The construction is verified and an unlucky seed raises.
    """
    if not 1 <= n_pinned <= n_features:
        raise ValueError("need 1 <= n_pinned <= n_features")
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n_instances, n_pinned), dtype=np.int64)
    labels = (bits.sum(axis=1) * 2 > n_pinned).astype(np.int64)
    if np.unique(labels).shape[0] < 2:
        raise ValueError("degenerate labels; use another seed")

    rel = [_su(bits[:, j], labels) for j in range(n_pinned)]
    if min(rel) <= 0.0:
        raise ValueError("a pinned column failed the relevance gate; use another seed")
    for i in range(n_pinned):
        for j in range(i + 1, n_pinned):
            if _su(bits[:, i], bits[:, j]) >= min(rel[i], rel[j]):
                raise ValueError(
                    "pinned columns came out mutually redundant; use another seed"
                )

    columns = []
    for j in range(n_pinned):
        nz = np.flatnonzero(bits[:, j]).astype(np.int64)
        columns.append(SparseColumn(j + 1, _frozen(nz), _frozen(bits[nz, j])))
    empty_idx = _frozen(np.empty(0, dtype=np.int64))
    empty_val = _frozen(np.empty(0, dtype=np.int64))
    for j in range(n_pinned, n_features):
        columns.append(SparseColumn(j + 1, empty_idx, empty_val))
    return Dataset(n_instances, n_features, tuple(columns), _frozen(labels), DISCRETE)


def make_clustered(
    n_clusters: int = 5,
    satellites_per_cluster: int = 3,
    n_noise: int = 8,
    n_instances: int = 600,
    satellite_flip_fraction: float = 0.15,
    gate_delta: float = 0.05,
    seed: int = 0,
) -> tuple[Dataset, list[int]]:
    """Clusters of correlated bits, one strictly dominant feature per cluster.

    The class is the majority vote of the cluster roots; satellites are
    noisy copies of their root.  The returned dominant (root) features are
    selected under every arrival order with gate threshold ``gate_delta``:
    each root out-scores its satellites and stays below the redundancy
    bound against everything outside its cluster, while noise columns stay
    below the gate.  Violated margins raise, so a fixed seed is a proof.
    """
    if n_clusters % 2 == 0:
        raise ValueError("n_clusters must be odd so the majority vote has no ties")
    rng = np.random.default_rng(seed)
    roots = rng.integers(0, 2, size=(n_instances, n_clusters), dtype=np.int64)
    labels = (roots.sum(axis=1) * 2 > n_clusters).astype(np.int64)

    features = []
    dominant_positions = []
    cluster_of = []
    for c in range(n_clusters):
        dominant_positions.append(len(features))
        features.append(roots[:, c])
        cluster_of.append(c)
        n_flips = int(round(satellite_flip_fraction * n_instances))
        for _ in range(satellites_per_cluster):
            flip_rows = rng.choice(n_instances, size=n_flips, replace=False)
            sat = roots[:, c].copy()
            sat[flip_rows] ^= 1
            features.append(sat)
            cluster_of.append(c)
    for _ in range(n_noise):
        features.append(rng.integers(0, 2, size=n_instances, dtype=np.int64))
        cluster_of.append(-1)

    rel = [_su(f, labels) for f in features]
    for pos, cluster in enumerate(cluster_of):
        if cluster == -1:
            if rel[pos] > gate_delta:
                raise ValueError("a noise column passed the gate; use another seed")
            continue
        root_pos = dominant_positions[cluster]
        if pos == root_pos:
            if rel[pos] <= gate_delta:
                raise ValueError("a dominant column failed the gate; use another seed")
            continue
        if rel[pos] >= rel[root_pos]:
            raise ValueError("a satellite out-scored its root; use another seed")
        if _su(features[pos], features[root_pos]) < rel[pos]:
            raise ValueError("a satellite escapes its root; use another seed")
    gated = [pos for pos, c in enumerate(cluster_of) if c != -1]
    for a_i, a in enumerate(gated):
        for b in gated[a_i + 1:]:
            if cluster_of[a] == cluster_of[b]:
                continue
            if _su(features[a], features[b]) >= min(rel[a], rel[b]):
                raise ValueError("clusters came out cross-correlated; use another seed")

    x = np.stack(features, axis=1)
    dataset = dataset_from_dense(x, labels, DISCRETE)
    dominants = [pos + 1 for pos in dominant_positions]
    return dataset, dominants


def make_hypercube_parity(
    n_instances: int = 2000,
    n_features: int = 500,
    n_informative: int = 5,
    n_combination: int = 15,
    class_sep: float = 1.5,
    label_noise: float = 0.01,
    seed: int = 0,
) -> Dataset:
    """Continuous benchmark where no single feature is marginally informative.

    Instances draw Gaussian clusters centered on the 2^d vertices of a
    d-dimensional hypercube; the class is the parity of the vertex sign
    pattern, so every informative axis has zero population correlation with
    the class.  Combination columns mix the informative axes linearly and
    probe columns are pure standard normals.  Columns are shuffled.
    """
    d = n_informative
    if n_combination + d > n_features:
        raise ValueError("n_features too small for the requested structure")
    rng = np.random.default_rng(seed)
    signs = ((np.arange(2**d)[:, None] >> np.arange(d)[None, :]) & 1) * 2 - 1
    parity = (signs > 0).sum(axis=1) % 2
    assign = rng.integers(0, 2**d, size=n_instances)
    informative = signs[assign] * class_sep + rng.normal(size=(n_instances, d))
    labels = parity[assign].astype(np.int64)
    flips = rng.random(n_instances) < label_noise
    labels[flips] ^= 1

    mix = rng.normal(size=(d, n_combination)) / np.sqrt(d)
    combination = informative @ mix
    n_probe = n_features - d - n_combination
    probes = rng.normal(size=(n_instances, n_probe))
    x = np.hstack([informative, combination, probes])
    x = x[:, rng.permutation(n_features)]
    return dataset_from_dense(x, labels, CONTINUOUS)


def make_random_discrete(
    n_instances: int,
    n_features: int,
    alphabet: int = 3,
    zero_inflation: float = 0.5,
    seed: int = 0,
) -> Dataset:
    """Random sparse discrete dataset with binary labels (for fuzzing runs)."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n_instances, dtype=np.int64)
    if np.unique(labels).shape[0] < 2:
        labels[0] = 1 - labels[0]
    x = rng.integers(1, alphabet, size=(n_instances, n_features), dtype=np.int64)
    x[rng.random((n_instances, n_features)) < zero_inflation] = 0
    return dataset_from_dense(x, labels, DISCRETE)
