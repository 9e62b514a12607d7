"""groupsense: predict, diagnose, and redesign perceived groupings in dot plots."""

from .chart import (
    Category,
    Chart,
    ChartError,
    PixelLayout,
    PlotGeometry,
    Point,
    apply_permutation,
    chart_from_dict,
    chart_id,
    chart_to_dict,
    generate_random_chart,
    layout,
)
from .diagnose import (
    DetectedGroup,
    DiagnosisReport,
    diagnose,
    enumerate_candidates,
    is_colinear,
)
from .defaults import DEFAULT_MODEL_ID, default_model
from .geometry import (
    FeatureVector,
    Group,
    GroupError,
    cluster_features,
    convex_hull_overlap,
    feature_matrix,
    feature_vector,
    linear_fit,
)
from .kernels import FEATURE_NAMES, NUMBA_ENABLED
from .model import (
    DecisionTree,
    GroupingModel,
    LogisticModel,
    ModelError,
    TreeNode,
    load_model,
    predict,
    predict_batch,
    save_model,
)
from .redesign import (
    BudgetExceeded,
    LandscapeMatrix,
    PermutationScore,
    RedesignResult,
    landscape,
    redesign,
    score_permutation,
    valid_permutations,
)

__version__ = "0.1.0"
