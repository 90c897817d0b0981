"""Adaptive locally-affine outlier filtering for image feature matches."""

from .core import (
    AdalamParams,
    AffineModel,
    FilterResult,
    ImageSize,
    KeypointSet,
    MatchSet,
    Neighborhood,
    Seed,
    SeedReport,
    wrap_angle,
)
from .filtering import (
    IterationOutcome,
    adalam_filter,
    assemble_neighborhood,
    compute_radius,
    confidences,
    fit_affine_lsq,
    fit_affine_minimal,
    residuals,
    select_inliers,
    select_seeds,
    verify_seed,
)
from .fileio import (
    ParseError,
    read_errors,
    read_keypoints,
    read_matches,
    write_keypoints,
    write_matches,
)
from .matching import mutual_nn_filter, nn_match, ratio_test_filter
from .metrics import EvalReport, exact_auc, hist_auc, map_at, match_prf
from .synth import SynthConfig, SynthScene, generate_scene

__all__ = [
    "AdalamParams",
    "AffineModel",
    "EvalReport",
    "FilterResult",
    "ImageSize",
    "IterationOutcome",
    "KeypointSet",
    "MatchSet",
    "Neighborhood",
    "ParseError",
    "Seed",
    "SeedReport",
    "SynthConfig",
    "SynthScene",
    "adalam_filter",
    "assemble_neighborhood",
    "compute_radius",
    "confidences",
    "exact_auc",
    "fit_affine_lsq",
    "fit_affine_minimal",
    "generate_scene",
    "hist_auc",
    "map_at",
    "match_prf",
    "mutual_nn_filter",
    "nn_match",
    "ratio_test_filter",
    "read_errors",
    "read_keypoints",
    "read_matches",
    "residuals",
    "select_inliers",
    "select_seeds",
    "verify_seed",
    "wrap_angle",
    "write_keypoints",
    "write_matches",
]

__version__ = "0.1.0"
