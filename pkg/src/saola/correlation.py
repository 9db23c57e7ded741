"""Correlation measures used by the selection rules.

Discrete columns get plug-in information measures in bits: entropy, mutual
information, conditional mutual information, and symmetrical uncertainty
SU(X,Y) = 2*I(X;Y) / (H(X) + H(Y)).  Continuous columns get the absolute
Pearson correlation with a Fisher z-transform significance test.

All measures operate on immutable variable views built once per column, so
marginal statistics (histograms, entropies, sums of squares) are computed a
single time and reused across the many pairwise comparisons a selection run
performs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .dataset import CONTINUOUS, DISCRETE, SparseColumn

SU_DISCRETE = "su_discrete"
FISHER_Z = "fisher_z"

_NEGATIVE_GUARD = 1e-9  # information quantities below this are treated as bugs
_MAX_TABLE_CELLS = 100_000_000


@dataclass(frozen=True)
class MeasureConfig:
    """Backend choice plus the relevance thresholds it interprets."""

    backend: str
    delta: float = 0.0
    alpha: float = 0.01

    def __post_init__(self):
        if self.backend not in (SU_DISCRETE, FISHER_Z):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError("delta must satisfy 0 <= delta < 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must satisfy 0 < alpha < 1")


@dataclass(frozen=True)
class CorrelationScore:
    """Normalized association strength, optionally with a significance."""

    value: float
    p_value: Optional[float] = None
    degenerate: bool = False


@dataclass(frozen=True)
class JointCounts:
    dims: tuple[int, ...]
    counts: np.ndarray
    total: int


def _entropy_from_counts(counts: np.ndarray, total: int) -> float:
    """Plug-in entropy in bits.

    Counts are sorted before summation so the result depends only on the
    multiset of cell counts; swapping table axes then yields bit-identical
    entropies, which makes MI and SU exactly symmetric.
    """
    nz = np.sort(counts[counts > 0]).astype(np.float64)
    p = nz / total
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class DiscreteVar:
    """A discrete column view: sparse nonzero codes plus cached marginals."""

    indices: np.ndarray  # rows with nonzero code, sorted
    codes: np.ndarray  # int64 codes >= 1
    n: int
    k: int  # alphabet size, max code + 1
    counts: np.ndarray  # histogram over 0..k-1 including implicit zeros
    entropy_bits: float

    @classmethod
    def from_column(cls, col: SparseColumn, n: int) -> "DiscreteVar":
        return cls._build(col.indices, col.values.astype(np.int64), n)

    @classmethod
    def from_dense(cls, values: np.ndarray) -> "DiscreteVar":
        values = np.asarray(values, dtype=np.int64)
        if np.any(values < 0):
            raise ValueError("discrete codes must be nonnegative")
        nz = np.flatnonzero(values).astype(np.int64)
        return cls._build(nz, values[nz], int(values.shape[0]))

    @classmethod
    def _build(cls, indices, codes, n):
        if n <= 0:
            raise ValueError("empty column")
        k = int(codes.max()) + 1 if codes.shape[0] else 1
        counts = np.bincount(codes, minlength=k)
        counts[0] += n - codes.shape[0]
        return cls(indices, codes, n, k, counts, _entropy_from_counts(counts, n))


@dataclass(frozen=True)
class ContinuousVar:
    """A continuous column view with cached first and second moments."""

    indices: np.ndarray
    values: np.ndarray
    n: int
    total: float
    total_sq: float

    @classmethod
    def from_column(cls, col: SparseColumn, n: int) -> "ContinuousVar":
        return cls._build(col.indices, col.values.astype(np.float64), n)

    @classmethod
    def from_dense(cls, values: np.ndarray) -> "ContinuousVar":
        values = np.asarray(values, dtype=np.float64)
        nz = np.flatnonzero(values).astype(np.int64)
        return cls._build(nz, values[nz], int(values.shape[0]))

    @classmethod
    def _build(cls, indices, values, n):
        if n <= 0:
            raise ValueError("empty column")
        return cls(indices, values, n, float(values.sum()), float((values * values).sum()))

    def variance_sum(self) -> float:
        """n times the population variance, from the cached moments."""
        return self.total_sq - self.total * self.total / self.n


Var = Union[DiscreteVar, ContinuousVar]


def make_feature_var(col: SparseColumn, n: int, backend: str) -> Var:
    if backend == SU_DISCRETE:
        return DiscreteVar.from_column(col, n)
    return ContinuousVar.from_column(col, n)


def make_target_var(labels: np.ndarray, backend: str) -> Var:
    if backend == SU_DISCRETE:
        return DiscreteVar.from_dense(labels)
    return ContinuousVar.from_dense(labels.astype(np.float64))


def _check_lengths(*vars_: Var) -> int:
    n = vars_[0].n
    for v in vars_[1:]:
        if v.n != n:
            raise ValueError(f"column length mismatch: {v.n} != {n}")
    return n


def _clamp_information(v: float) -> float:
    if v < 0.0:
        if v < -_NEGATIVE_GUARD:
            raise ArithmeticError(f"information measure came out at {v}")
        return 0.0
    return v


# ---------------------------------------------------------------------------
# discrete measures

def entropy(x: DiscreteVar) -> float:
    """Plug-in entropy H(X) in bits."""
    return x.entropy_bits


def _pair_table(x: DiscreteVar, y: DiscreteVar) -> np.ndarray:
    n = _check_lengths(x, y)
    flat = _kernels.pair_counts(x.indices, x.codes, y.indices, y.codes, x.k, y.k, n)
    return flat.reshape(x.k, y.k)


def _dense_codes(x: DiscreteVar) -> np.ndarray:
    out = np.zeros(x.n, dtype=np.int64)
    out[x.indices] = x.codes
    return out


def _triple_table(x: DiscreteVar, y: DiscreteVar, z: DiscreteVar) -> np.ndarray:
    n = _check_lengths(x, y, z)
    cells = x.k * y.k * z.k
    if cells > _MAX_TABLE_CELLS:
        raise ValueError(f"joint alphabet too large ({cells} cells)")
    flat = (_dense_codes(x) * y.k + _dense_codes(y)) * z.k + _dense_codes(z)
    return np.bincount(flat, minlength=cells).reshape(x.k, y.k, z.k)


def joint_counts(x: DiscreteVar, y: DiscreteVar, z: Optional[DiscreteVar] = None) -> JointCounts:
    """Contingency table over two or three discrete variables."""
    if z is None:
        table = _pair_table(x, y)
    else:
        table = _triple_table(x, y, z)
    return JointCounts(table.shape, table, x.n)


def mutual_information(x: DiscreteVar, y: DiscreteVar) -> float:
    """I(X;Y) in bits via H(X) + H(Y) - H(X,Y); tiny negatives clamp to 0."""
    n = _check_lengths(x, y)
    h_xy = _entropy_from_counts(_pair_table(x, y).ravel(), n)
    return _clamp_information(x.entropy_bits + y.entropy_bits - h_xy)


def conditional_mutual_information(x: DiscreteVar, y: DiscreteVar, z: DiscreteVar) -> float:
    """I(X;Y|Z) in bits via the four-entropy identity."""
    n = _check_lengths(x, y, z)
    h_xz = _entropy_from_counts(_pair_table(x, z).ravel(), n)
    h_yz = _entropy_from_counts(_pair_table(y, z).ravel(), n)
    h_xyz = _entropy_from_counts(_triple_table(x, y, z).ravel(), n)
    return _clamp_information(h_xz + h_yz - h_xyz - z.entropy_bits)


def symmetrical_uncertainty(x: DiscreteVar, y: DiscreteVar) -> CorrelationScore:
    """SU(X,Y) = 2*I(X;Y) / (H(X) + H(Y)), defined as 0 when both are constant."""
    _check_lengths(x, y)
    denom = x.entropy_bits + y.entropy_bits
    if denom == 0.0:
        return CorrelationScore(0.0, degenerate=True)
    value = 2.0 * mutual_information(x, y) / denom
    return CorrelationScore(min(max(value, 0.0), 1.0))


# ---------------------------------------------------------------------------
# continuous measures

def pearson(x: ContinuousVar, y: ContinuousVar) -> tuple[float, bool]:
    """Pearson r over sparse columns; the flag marks zero-variance inputs."""
    n = _check_lengths(x, y)
    var_x = x.variance_sum()
    var_y = y.variance_sum()
    floor_x = 1e-12 * max(x.total_sq, x.total * x.total / n)
    floor_y = 1e-12 * max(y.total_sq, y.total * y.total / n)
    if var_x <= floor_x or var_y <= floor_y:
        return 0.0, True
    sxy = _kernels.sparse_dot(x.indices, x.values, y.indices, y.values)
    cov = sxy - x.total * y.total / n
    return cov / math.sqrt(var_x * var_y), False


def abs_correlation(x: ContinuousVar, y: ContinuousVar) -> float:
    """|Pearson r| clamped below 1, the continuous analogue of SU."""
    r, degenerate = pearson(x, y)
    if degenerate:
        return 0.0
    return min(abs(r), 1.0 - 1e-12)


def fisher_z_test(x: ContinuousVar, y: ContinuousVar) -> CorrelationScore:
    """Two-sided Fisher z significance test of the Pearson correlation.

    The statistic is sqrt(n-3) * atanh(|r|) with |r| clamped below 1;
    zero-variance inputs come back degenerate (value 0, p 1), not as errors.
    """
    n = _check_lengths(x, y)
    if n < 4:
        raise ValueError("Fisher z-test needs at least 4 instances")
    r, degenerate = pearson(x, y)
    if degenerate:
        return CorrelationScore(0.0, p_value=1.0, degenerate=True)
    value = min(abs(r), 1.0 - 1e-12)
    stat = math.sqrt(n - 3) * math.atanh(value)
    p = math.erfc(stat / math.sqrt(2.0))
    return CorrelationScore(value, p_value=p)
