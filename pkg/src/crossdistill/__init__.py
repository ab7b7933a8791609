"""Cross-fitted and loss-corrected knowledge distillation for tabular data."""

from .core import (
    DEFAULT_CLIP,
    CorrectionField,
    DivergenceError,
    InvalidInputError,
    LabeledDataset,
    ParseError,
    ProbabilityField,
    UndefinedMetricError,
    clip_probabilities,
    log_scores,
    one_hot,
)
from .losses import (
    LossSpec,
    ace_loss,
    corrected_loss,
    corrected_sel_labels,
    correction_matrix,
    fd_correction_matrix,
    grad_corrected,
    grad_scores,
    orthogonal_loss,
    sel_loss,
)
from .policy import (
    ALPHA_GRID_DEFAULT,
    CorrectionPolicy,
    balanced_weights,
    balanced_weights_plugin,
    correction_objective,
    policy_from_alpha,
    select_alpha_cv,
)
from .teachers import (
    ForestTeacher,
    ForestTeacherConfig,
    NadarayaWatsonTeacher,
    NadarayaWatsonTeacherConfig,
    RidgeMeanTeacher,
    RidgeMeanTeacherConfig,
    fit_teacher,
)
from .students import (
    ConstantStudent,
    ConstantStudentConfig,
    ForestStudentConfig,
    LinearStudent,
    LinearStudentConfig,
    RegressionForestStudent,
    SgdConfig,
    fit_constant_sel,
    fit_forest_student,
    fit_linear_sel,
    predict_scores,
    sgd_fit,
)
from .crossfit import (
    CrossfitResult,
    DistillConfig,
    FoldPlan,
    NuisanceBundle,
    distill_vanilla,
    fit_nuisances,
    fit_student_on_bundle,
    holdout_score,
    make_folds,
    pooled_objective,
    run_crossfit,
    verify_fold_isolation,
)
from .data import (
    BayesOracle,
    ConstantBayes,
    CsvSchema,
    SmoothLogisticBayes,
    SyntheticDraw,
    TabularMixtureBayes,
    generate,
    load_csv,
    save_csv,
)
from .metrics import (
    RateSlope,
    accuracy,
    auc_binary,
    fit_rate_slope,
    student_mse_to_f0,
    teacher_mse,
)

__version__ = "0.1.0"
