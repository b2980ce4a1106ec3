"""Python bindings for the aof point cloud attack library."""

from ._core import (
    DEFAULT_POINTS,
    AofError,
    Classifier,
    DegenerateInput,
    InvalidArgument,
    IoError,
    ModelDims,
    ParseError,
    __version__,
    asr,
    attack,
    laplacian,
    lfc_split,
    shape_dataset,
    sor,
    spectral_basis,
    srs,
    train_on_shapes,
)

__all__ = [
    "DEFAULT_POINTS",
    "AofError",
    "Classifier",
    "DegenerateInput",
    "InvalidArgument",
    "IoError",
    "ModelDims",
    "ParseError",
    "__version__",
    "asr",
    "attack",
    "laplacian",
    "lfc_split",
    "shape_dataset",
    "sor",
    "spectral_basis",
    "srs",
    "train_on_shapes",
]
