"""Toy style-based generator: architecture, weights and synthesis."""

from style_intervention.domain.stylegen.arch import (
    ArchError,
    ArchSpec,
    LayerSpec,
    LayoutError,
    LevelSpec,
    StyleLayout,
)
from style_intervention.domain.stylegen.codes import (
    Image,
    LatentVector,
    Mask,
    StyleCode,
    mask_from_array,
)
from style_intervention.domain.stylegen.network import (
    feature_maps,
    forward,
    generate,
    map_latent,
    style_from_w,
    synthesize,
)
from style_intervention.domain.stylegen.partition import (
    QUADRANTS,
    ChannelPartition,
    channel_group,
    quadrant_mask,
    segmentation_mask,
)
from style_intervention.domain.stylegen.weights import GeneratorWeights, build_random_generator

__all__ = [
    "QUADRANTS",
    "ArchError",
    "ArchSpec",
    "ChannelPartition",
    "GeneratorWeights",
    "Image",
    "LatentVector",
    "LayerSpec",
    "LayoutError",
    "LevelSpec",
    "Mask",
    "StyleCode",
    "StyleLayout",
    "build_random_generator",
    "channel_group",
    "feature_maps",
    "forward",
    "generate",
    "map_latent",
    "mask_from_array",
    "quadrant_mask",
    "segmentation_mask",
    "style_from_w",
    "synthesize",
]
