"""Forward pass of the toy style-based generator."""

from __future__ import annotations

import numpy as np

from style_intervention.domain.numgrad import (
    Tensor,
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
from style_intervention.domain.stylegen.arch import LayoutError
from style_intervention.domain.stylegen.codes import Image, LatentVector, StyleCode
from style_intervention.domain.stylegen.weights import GeneratorWeights


def map_latent(weights: GeneratorWeights, z: LatentVector) -> LatentVector:
    """Map z to w through the two-layer leaky-ReLU MLP."""
    arch = weights.arch
    if z.dim != arch.d_z:
        raise LayoutError(f"latent has {z.dim} entries, generator expects {arch.d_z}")
    h = Tensor(z.values)
    for weight, bias in weights.mapping:
        h = leaky_relu(matvec(weight, h, bias), arch.slope)
    return LatentVector(h.data)


def style_from_w(weights: GeneratorWeights, w: LatentVector) -> StyleCode:
    """Apply each layer's affine map to w and concatenate the results."""
    arch = weights.arch
    if w.dim != arch.d_w:
        raise LayoutError(f"w has {w.dim} entries, generator expects {arch.d_w}")
    w_tensor = Tensor(w.values)
    parts = [matvec(weight, w_tensor, bias).data for weight, bias in weights.affine]
    return StyleCode(np.concatenate(parts), arch.layout)


def forward(
    weights: GeneratorWeights,
    style: Tensor,
    modulate: bool = True,
    apply_clamp: bool = True,
    capture: list[Tensor] | None = None,
) -> Tensor:
    """Run synthesis on a (possibly tape-tracked) style tensor.

    Args:
        weights: Generator parameters.
        style: Style vector with the architecture's layout length.
        modulate: Apply the per-channel style gains.
        apply_clamp: Clip the output to [0, 1].
        capture: If given, receives each styled layer's post-activation map.

    Returns:
        Image tensor [3, H, W].
    """
    arch = weights.arch
    layout = arch.layout
    if style.dims != (layout.total,):
        raise LayoutError(f"style vector has dims {style.dims}, layout needs ({layout.total},)")

    x = weights.const
    for layer, entry, kernel in zip(arch.layers, layout.entries, weights.kernels):
        if layer.upsample_before:
            x = upsample(x, arch.upsample)
        x = instance_norm(x, center=arch.center)
        if modulate:
            x = scale_channels(x, slice_vector(style, entry.offset, entry.length))
        x = leaky_relu(conv2d(x, kernel), arch.slope)
        if capture is not None:
            capture.append(x)

    x = add_bias(conv2d(x, weights.to_rgb_weight), weights.to_rgb_bias)
    return clamp(x, 0.0, 1.0) if apply_clamp else x


def synthesize(
    weights: GeneratorWeights,
    style: StyleCode,
    modulate: bool = True,
    apply_clamp: bool = True,
) -> Image:
    """Render an image from a style code."""
    return forward(weights, style.as_tensor(), modulate=modulate, apply_clamp=apply_clamp)


def feature_maps(weights: GeneratorWeights, style: StyleCode) -> list[Tensor]:
    """Return the post-activation map of every styled layer."""
    maps: list[Tensor] = []
    forward(weights, style.as_tensor(), capture=maps)
    return maps


def generate(
    weights: GeneratorWeights, z: LatentVector
) -> tuple[LatentVector, StyleCode, Image]:
    """Run the full z -> w -> s -> image pipeline."""
    w = map_latent(weights, z)
    s = style_from_w(weights, w)
    return w, s, synthesize(weights, s)
