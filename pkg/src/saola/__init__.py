"""Online streaming feature selection with pairwise redundancy filtering."""

__version__ = "0.1.0"

from .correlation import (
    FISHER_Z,
    SU_DISCRETE,
    CorrelationScore,
    MeasureConfig,
)
from .dataset import (
    CONTINUOUS,
    DISCRETE,
    DataFormatError,
    Dataset,
    Grouping,
    OrderSpec,
    SparseColumn,
    discretize,
    feature_stream,
    group_stream,
    load_svmlight,
    random_partition,
    save_svmlight,
    split,
)
from .evaluation import TrialReport, accuracy, knn_predict, order_trials
from .group_selection import GroupResult, select_groups
from .selection import (
    BOUND_MAX,
    BOUND_MIN,
    TIE_DISCARD_NEW,
    TIE_STRICT,
    SaolaConfig,
    SelectionResult,
    select_features,
)
from .stability import run_stability, set_similarity

__all__ = [
    "__version__",
    "FISHER_Z",
    "SU_DISCRETE",
    "CorrelationScore",
    "MeasureConfig",
    "CONTINUOUS",
    "DISCRETE",
    "DataFormatError",
    "Dataset",
    "Grouping",
    "OrderSpec",
    "SparseColumn",
    "discretize",
    "feature_stream",
    "group_stream",
    "load_svmlight",
    "random_partition",
    "save_svmlight",
    "split",
    "TrialReport",
    "accuracy",
    "knn_predict",
    "order_trials",
    "GroupResult",
    "select_groups",
    "BOUND_MAX",
    "BOUND_MIN",
    "TIE_DISCARD_NEW",
    "TIE_STRICT",
    "SaolaConfig",
    "SelectionResult",
    "select_features",
    "run_stability",
    "set_similarity",
]
