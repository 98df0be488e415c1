"""Weakly-paired maximum covariance analysis for vision/touch representation sharing."""

from .assign import Matching, brute_force_assignment, solve_max_assignment
from .dataset import (
    Sample,
    SplitSpec,
    SynthConfig,
    WeaklyPairedDataset,
    load_manifest,
    save_manifest,
    split_train_test,
    synth_generate,
)
from .errors import (
    DataError,
    DimensionError,
    DmcaError,
    EmptyPairing,
    FormatError,
    InvalidData,
    ManifestError,
    NumericalError,
    ShapeError,
    SizeError,
    SplitError,
    TrainError,
)
from .evalharness import (
    ClassifierConfig,
    EvalReport,
    accuracy,
    fit_classifier,
    run_crossmodal,
    run_protocol,
    run_shared_sweep,
    run_unimodal,
)
from .features import (
    FeatureExtractor,
    GrayImage,
    center_crop,
    extract_flatten,
    extract_lbp,
    extract_randproj,
    load_feature_matrix,
    load_pgm,
    resize_bilinear,
    save_feature_matrix,
    save_pgm,
)
from .matcore import SvdResult, center_columns, cross_covariance, pca_fit, project, truncated_svd
from .mca import (
    DmcaConfig,
    DmcaTrace,
    PairingMatrix,
    ProjectionPair,
    assignment_step,
    dmca_fit,
    load_model,
    mca_fit,
    objective,
    project_modality,
    save_model,
)

__version__ = "0.1.0"
