"""Network dissection: score feature-map units against concept regions by IoU."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from style_intervention.domain.numgrad import Tensor, upsample
from style_intervention.domain.stylegen.codes import LatentVector, Mask, mask_from_array
from style_intervention.domain.stylegen.network import feature_maps, map_latent, style_from_w
from style_intervention.domain.stylegen.partition import ChannelPartition
from style_intervention.domain.stylegen.weights import GeneratorWeights

logger = logging.getLogger(__name__)

DEFAULT_FRACTION = 0.05


class DissectionError(ValueError):
    """Exception raised for invalid dissection inputs."""


def upsample_to(fmap: Tensor, size: int, mode: str = "bilinear") -> Tensor:
    """Repeatedly double a [C, h, w] map until it is size x size."""
    side = fmap.dims[-1]
    if size % side or (size // side) & (size // side - 1):
        raise DissectionError(f"cannot upsample {side} to {size} by doubling")
    while fmap.dims[-1] < size:
        fmap = upsample(fmap, mode)
    return fmap


def binarize_topk(
    fmap: np.ndarray | Tensor,
    fraction: float = DEFAULT_FRACTION,
    size: int | None = None,
    mode: str = "bilinear",
) -> Mask:
    """Keep the top fraction of activations of one [h, w] map.

    The map is first upsampled to size x size if given. The threshold is the
    k-th largest value with k = max(1, floor(fraction * H * W)); every pixel
    at or above it is kept, so ties can select more than k pixels.
    """
    if not 0.0 < fraction < 1.0:
        raise DissectionError(f"fraction must be in (0, 1), got {fraction}")
    data = fmap.data if isinstance(fmap, Tensor) else np.asarray(fmap, dtype=np.float64)
    if data.ndim != 2:
        raise DissectionError(f"expected a 2-D map, got shape {data.shape}")
    if size is not None and data.shape[-1] != size:
        data = upsample_to(Tensor(data[None]), size, mode).data[0]
    flat = data.ravel()
    k = max(1, int(np.floor(fraction * flat.size)))
    threshold = np.partition(flat, flat.size - k)[flat.size - k]
    return mask_from_array((data >= threshold).astype(np.float64))


def iou(a: Mask | np.ndarray, b: Mask | np.ndarray) -> float:
    """Intersection over union of two binary masks; 0 if both are empty."""
    x = (a.data if isinstance(a, Tensor) else np.asarray(a)) > 0.5
    y = (b.data if isinstance(b, Tensor) else np.asarray(b)) > 0.5
    if x.shape != y.shape:
        raise DissectionError(f"mask dims differ: {x.shape} vs {y.shape}")
    union = np.count_nonzero(x | y)
    if union == 0:
        return 0.0
    return float(np.count_nonzero(x & y) / union)


@dataclass(frozen=True)
class UnitScore:
    layer: int
    channel: int
    iou: float


@dataclass(frozen=True)
class DissectionReport:
    """Mean IoU of every (layer, channel) unit against every concept.

    Attributes:
        concepts: Concept names, in column order of scores.
        units: (layer, channel) of each row of scores.
        levels: Resolution level of each layer.
        scores: [n_units, n_concepts] mean IoU.
        fraction: Top-activation fraction used for binarization.
        n_samples: Number of samples averaged.
    """

    concepts: tuple[str, ...]
    units: tuple[tuple[int, int], ...]
    levels: tuple[int, ...]
    scores: np.ndarray
    fraction: float
    n_samples: int

    def ranking(self, concept: str, final_level_only: bool = False) -> list[UnitScore]:
        """Units sorted by decreasing IoU; ties keep (layer, channel) order."""
        if concept not in self.concepts:
            raise DissectionError(f"unknown concept: {concept}")
        column = self.concepts.index(concept)
        final_level = max(self.levels)
        rows = [
            UnitScore(layer, channel, float(self.scores[i, column]))
            for i, (layer, channel) in enumerate(self.units)
            if not final_level_only or self.levels[layer] == final_level
        ]
        return sorted(rows, key=lambda u: -u.iou)

    def to_dict(self, top: int | None = None, final_level_only: bool = False) -> dict[str, Any]:
        return {
            "fraction": self.fraction,
            "n_samples": self.n_samples,
            "final_level_only": final_level_only,
            "rankings": {
                concept: [
                    {"layer": u.layer, "channel": u.channel, "iou": u.iou}
                    for u in self.ranking(concept, final_level_only)[:top]
                ]
                for concept in self.concepts
            },
        }


def _sample_ious(
    weights: GeneratorWeights,
    z: LatentVector,
    regions: list[np.ndarray],
    fraction: float,
    mode: str,
) -> np.ndarray:
    size = weights.arch.resolution
    s = style_from_w(weights, map_latent(weights, z))
    rows = []
    for fmap in feature_maps(weights, s):
        full = upsample_to(fmap, size, mode).data
        for channel in range(full.shape[0]):
            mask = binarize_topk(full[channel], fraction)
            rows.append([iou(mask, region) for region in regions])
    return np.array(rows)


def dissect_generator(
    weights: GeneratorWeights,
    samples: Sequence[LatentVector],
    concepts: Sequence[ChannelPartition],
    fraction: float = DEFAULT_FRACTION,
    mode: str = "bilinear",
    jobs: int = 1,
) -> DissectionReport:
    """Score every styled-layer unit against every concept region.

    Args:
        weights: Generator to dissect.
        samples: Latents to average over, in order.
        concepts: Concept partitions; only their regions are used.
        fraction: Top-activation fraction.
        mode: Upsampling used to bring maps to image resolution.
        jobs: Worker threads; results are combined in sample order.

    Returns:
        A DissectionReport.
    """
    if not samples:
        raise DissectionError("at least one sample is required")
    if not concepts:
        raise DissectionError("at least one concept is required")
    arch = weights.arch
    for concept in concepts:
        concept.validate(arch)
    regions = [c.region.astype(np.float64) for c in concepts]

    def score(z: LatentVector) -> np.ndarray:
        return _sample_ious(weights, z, regions, fraction, mode)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_sample = list(pool.map(score, samples))
    else:
        per_sample = [score(z) for z in samples]

    total = np.zeros_like(per_sample[0])
    for scores in per_sample:
        total += scores
    units = tuple((layer.index, c) for layer in arch.layers for c in range(layer.out_channels))
    logger.info("dissected %d units over %d samples", len(units), len(samples))
    return DissectionReport(
        concepts=tuple(c.concept for c in concepts),
        units=units,
        levels=tuple(layer.level for layer in arch.layers),
        scores=total / len(samples),
        fraction=fraction,
        n_samples=len(samples),
    )
