"""Shrinkage and principal-component estimators for binary logistic
regression under multicollinearity, with asymptotic error-matrix analysis
and a reproducible Monte Carlo study harness."""

from .errors import (
    CellFailedError,
    DatasetFormatError,
    DecompositionError,
    LiulogitError,
    SingularSystemError,
)
from .estimators import (
    ComponentSplit,
    EstimatorKind,
    EstimatorSpec,
    KSelection,
    ShrinkageParams,
    SpectralDecomposition,
    choose_d,
    choose_k,
    ltl_estimate,
    mle_estimate,
    pclr_estimate,
    pcltl_estimate,
    point_estimate,
    select_components,
    spectral_decompose,
)
from .io import (
    StudyTable,
    build_study_tables,
    parse_dataset,
    render_table_delimited,
    render_table_text,
    study_to_json,
    write_dataset,
)
from .model import (
    Dataset,
    FitConfig,
    LogisticFit,
    irls_fit,
    log_likelihood,
    predict_probabilities,
    weight_diagonal,
    working_response,
)
from .msem import (
    DominanceVerdict,
    MsemReport,
    asymptotic_msem,
    pcltl_bias,
    pcltl_covariance,
    psd_dominates,
    smse,
    theorem_3_1_condition,
    theorem_3_2_condition,
    theorem_3_3_condition,
)
from .simulation import (
    DESIGN_COLUMN_NORM,
    CellResult,
    SimulationConfig,
    StudyGrid,
    cell_design,
    components_for_p,
    derive_cell_seed,
    generate_design,
    generate_response,
    newhouse_oman_beta,
    ptv_for_p,
    run_study,
    scale_columns,
    simulate_cell,
    study_configs,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "LiulogitError",
    "SingularSystemError",
    "DecompositionError",
    "CellFailedError",
    "DatasetFormatError",
    # model
    "Dataset",
    "FitConfig",
    "LogisticFit",
    "predict_probabilities",
    "log_likelihood",
    "weight_diagonal",
    "working_response",
    "irls_fit",
    # estimators
    "SpectralDecomposition",
    "ComponentSplit",
    "ShrinkageParams",
    "EstimatorKind",
    "EstimatorSpec",
    "KSelection",
    "spectral_decompose",
    "select_components",
    "mle_estimate",
    "ltl_estimate",
    "pclr_estimate",
    "pcltl_estimate",
    "choose_d",
    "choose_k",
    "point_estimate",
    # msem
    "MsemReport",
    "DominanceVerdict",
    "pcltl_bias",
    "pcltl_covariance",
    "asymptotic_msem",
    "smse",
    "psd_dominates",
    "theorem_3_1_condition",
    "theorem_3_2_condition",
    "theorem_3_3_condition",
    # simulation
    "SimulationConfig",
    "CellResult",
    "StudyGrid",
    "DESIGN_COLUMN_NORM",
    "generate_design",
    "scale_columns",
    "newhouse_oman_beta",
    "generate_response",
    "cell_design",
    "components_for_p",
    "simulate_cell",
    "study_configs",
    "run_study",
    "derive_cell_seed",
    "ptv_for_p",
    # io
    "parse_dataset",
    "write_dataset",
    "StudyTable",
    "build_study_tables",
    "render_table_text",
    "render_table_delimited",
    "study_to_json",
]
