"""Concept partitions: which style coordinates and pixels belong to a concept."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from style_intervention.domain.stylegen.arch import ArchSpec, LayoutError, StyleLayout
from style_intervention.domain.stylegen.codes import Mask, mask_from_array

QUADRANTS = ("top_left", "top_right", "bottom_left", "bottom_right")
N_GROUPS = len(QUADRANTS)


def channel_group(n_channels: int, channel: int) -> int:
    """Return the planted group of a channel: contiguous blocks of n_channels / 4."""
    if n_channels % N_GROUPS:
        raise LayoutError(f"{n_channels} channels cannot be split into {N_GROUPS} groups")
    return channel // (n_channels // N_GROUPS)


def quadrant_mask(quadrant: str | int, size: int) -> np.ndarray:
    """Return a boolean [size, size] mask of one image quadrant."""
    index = QUADRANTS.index(quadrant) if isinstance(quadrant, str) else quadrant
    if not 0 <= index < N_GROUPS:
        raise LayoutError(f"unknown quadrant: {quadrant}")
    half = size // 2
    mask = np.zeros((size, size), dtype=bool)
    row, col = divmod(index, 2)
    mask[row * half : (row + 1) * half, col * half : (col + 1) * half] = True
    return mask


@dataclass(frozen=True, eq=False)
class ChannelPartition:
    """Ground-truth channel group of a concept.

    Attributes:
        concept: Concept name.
        members: Style coordinates (layer, channel) controlling the concept.
        region: Boolean [H, W] pixel region of the concept.
    """

    concept: str
    members: tuple[tuple[int, int], ...]
    region: np.ndarray

    def __post_init__(self) -> None:
        if len(set(self.members)) != len(self.members):
            raise LayoutError(f"partition {self.concept} lists a coordinate twice")
        region = np.asarray(self.region, dtype=bool)
        if region.ndim != 2:
            raise LayoutError(f"partition {self.concept} region must be 2-D")
        object.__setattr__(self, "region", region)

    def validate(self, arch: ArchSpec) -> None:
        for layer, channel in self.members:
            arch.layout.index(layer, channel)
        size = arch.resolution
        if self.region.shape != (size, size):
            raise LayoutError(
                f"partition {self.concept} region is {self.region.shape}, image is {size}x{size}"
            )

    def indices(self, layout: StyleLayout) -> np.ndarray:
        """Return the sorted style-vector positions of the members."""
        return np.array(sorted(layout.index(l, c) for l, c in self.members), dtype=np.int64)

    def complement_indices(self, layout: StyleLayout) -> np.ndarray:
        keep = np.ones(layout.total, dtype=bool)
        keep[self.indices(layout)] = False
        return np.flatnonzero(keep)

    def segmentation_mask(self) -> Mask:
        return mask_from_array(self.region.astype(np.float64))

    def to_dict(self) -> dict[str, Any]:
        return {
            "concept": self.concept,
            "members": [list(m) for m in self.members],
            "region": ["".join("1" if v else "0" for v in row) for row in self.region],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ChannelPartition:
        region = np.array([[ch == "1" for ch in row] for row in data["region"]], dtype=bool)
        members = tuple((int(l), int(c)) for l, c in data["members"])
        return cls(data["concept"], members, region)


def segmentation_mask(partition: ChannelPartition) -> Mask:
    """Return the partition's pixel region as a {0, 1} mask tensor."""
    return partition.segmentation_mask()
