"""Geometry-guided gaze estimation toolkit (python surface of the C++ core)."""

from ._core import (  # noqa: F401
    HgnError,
    angles_to_vector,
    angular_error_deg,
    dataset_info,
    default_config,
    evaluate,
    gaussian_nll_reference,
    gaze_loss,
    generate_dataset,
    grad_check,
    heatmap_loss,
    load_sample,
    normalization_rotation,
    predict,
    project_landmarks,
    quality_scores,
    radius_loss,
    recon_jacobian,
    reconstruct_gaze,
    render_target,
    soft_argmax,
    spatial_softmax,
    train,
    uncertainty_gaze_loss,
    vector_to_angles,
)

__all__ = [
    "HgnError",
    "angles_to_vector",
    "angular_error_deg",
    "dataset_info",
    "default_config",
    "evaluate",
    "gaussian_nll_reference",
    "gaze_loss",
    "generate_dataset",
    "grad_check",
    "heatmap_loss",
    "load_sample",
    "normalization_rotation",
    "predict",
    "project_landmarks",
    "quality_scores",
    "radius_loss",
    "recon_jacobian",
    "reconstruct_gaze",
    "render_target",
    "soft_argmax",
    "spatial_softmax",
    "train",
    "uncertainty_gaze_loss",
    "vector_to_angles",
]
