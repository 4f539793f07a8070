"""Minimal tensor library with tape-based reverse-mode differentiation."""

from style_intervention.domain.numgrad.gradcheck import GradientCheckReport, check_gradient
from style_intervention.domain.numgrad.ops import (
    add_bias,
    clamp,
    conv2d,
    instance_norm,
    leaky_relu,
    matvec,
    scale_channels,
    slice_vector,
    upsample,
)
from style_intervention.domain.numgrad.tape import Tape
from style_intervention.domain.numgrad.tensor import (
    ShapeError,
    TapeError,
    Tensor,
    float64_mode,
    storage_dtype,
)

__all__ = [
    "GradientCheckReport",
    "ShapeError",
    "Tape",
    "TapeError",
    "Tensor",
    "add_bias",
    "check_gradient",
    "clamp",
    "conv2d",
    "float64_mode",
    "instance_norm",
    "leaky_relu",
    "matvec",
    "scale_channels",
    "slice_vector",
    "storage_dtype",
    "upsample",
]
