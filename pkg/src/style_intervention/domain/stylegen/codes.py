"""Latent and style code value types."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from style_intervention.domain.numgrad import Tensor
from style_intervention.domain.stylegen.arch import LayoutError, StyleLayout

# Images are [3, H, W] tensors in [0, 1]; masks are [H, W] tensors in {0, 1}.
Image = Tensor
Mask = Tensor


def _vector(values: np.ndarray | list[float]) -> np.ndarray:
    data = np.array(values, dtype=np.float64)
    if data.ndim != 1:
        raise LayoutError(f"expected a 1-D vector, got shape {data.shape}")
    return data


@dataclass(frozen=True, eq=False)
class LatentVector:
    """A point in Z or W."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _vector(self.values))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class StyleCode:
    """A concatenated per-layer style vector laid out by a StyleLayout."""

    values: np.ndarray
    layout: StyleLayout

    def __post_init__(self) -> None:
        values = _vector(self.values)
        if values.shape[0] != self.layout.total:
            raise LayoutError(
                f"style code has {values.shape[0]} entries, layout needs {self.layout.total}"
            )
        object.__setattr__(self, "values", values)

    def layer(self, index: int) -> np.ndarray:
        return self.values[self.layout.slice(index)]

    def shifted(self, delta: np.ndarray) -> StyleCode:
        """Return a new code offset by delta."""
        return StyleCode(self.values + np.asarray(delta, dtype=np.float64), self.layout)

    def as_tensor(self) -> Tensor:
        return Tensor(self.values)


def mask_from_array(values: np.ndarray) -> Mask:
    """Validate and wrap a binary [H, W] array."""
    data = np.asarray(values, dtype=np.float64)
    if data.ndim != 2:
        raise LayoutError(f"mask must be 2-D, got shape {data.shape}")
    if not np.isin(data, (0.0, 1.0)).all():
        raise LayoutError("mask values must be 0 or 1")
    return Tensor(data)
