"""Chest X-ray texture features, learning and statistics (C++ core)."""

from ._core import (
    Config,
    CxrError,
    Model,
    SegmentationError,
    dwt2,
    extract_features,
    extract_image,
    glcm,
    haralick,
    hef_filter,
    idwt2,
    load_image,
    quantize,
    run,
    sha256_file,
    synth,
    train,
)

__all__ = [
    "Config",
    "CxrError",
    "Model",
    "SegmentationError",
    "dwt2",
    "extract_features",
    "extract_image",
    "glcm",
    "haralick",
    "hef_filter",
    "idwt2",
    "load_image",
    "quantize",
    "run",
    "sha256_file",
    "synth",
    "train",
]
