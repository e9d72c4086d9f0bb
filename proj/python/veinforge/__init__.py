"""Synthetic palm-vein generation and dataset validation."""

from ._veinforge import (
    CorruptDataset,
    DivergentDistance,
    GeneratorExhausted,
    ImageIoError,
    KFormParams,
    NonLeptokurticError,
    bessel_k,
    cluster,
    estimate_kform,
    extract_features,
    fid,
    fit_kform,
    generate_database,
    generate_image,
    kform_distance,
    kform_pdf,
    nn_loo_accuracy,
    sample_kform,
    similarity_score,
)

__all__ = [
    "CorruptDataset",
    "DivergentDistance",
    "GeneratorExhausted",
    "ImageIoError",
    "KFormParams",
    "NonLeptokurticError",
    "bessel_k",
    "cluster",
    "estimate_kform",
    "extract_features",
    "fid",
    "fit_kform",
    "generate_database",
    "generate_image",
    "kform_distance",
    "kform_pdf",
    "nn_loo_accuracy",
    "sample_kform",
    "similarity_score",
]
