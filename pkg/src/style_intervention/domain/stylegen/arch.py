"""Generator architecture description and the style-vector layout it implies."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import cached_property
from typing import Any

MAX_RESOLUTION = 64
BASE_RESOLUTION = 4


class ArchError(ValueError):
    """Exception raised for an inconsistent architecture or weight set."""


class LayoutError(ValueError):
    """Exception raised when a vector does not match the style layout."""


@dataclass(frozen=True)
class LevelSpec:
    """One resolution level.

    Attributes:
        resolution: Spatial side length of the level.
        channels: Output channel count of each styled layer at this level.
    """

    resolution: int
    channels: tuple[int, ...]


@dataclass(frozen=True)
class LayerSpec:
    """One styled layer, derived from an ArchSpec."""

    index: int
    level: int
    resolution: int
    in_channels: int
    out_channels: int
    upsample_before: bool


@dataclass(frozen=True)
class LayoutEntry:
    layer: int
    offset: int
    length: int

    @property
    def stop(self) -> int:
        return self.offset + self.length


@dataclass(frozen=True)
class StyleLayout:
    """Ordered (layer, offset, length) entries partitioning a style vector.

    The length of a layer's slice equals its input channel count.
    """

    entries: tuple[LayoutEntry, ...]

    @classmethod
    def from_lengths(cls, lengths: list[int] | tuple[int, ...]) -> StyleLayout:
        entries = []
        offset = 0
        for layer, length in enumerate(lengths):
            entries.append(LayoutEntry(layer, offset, length))
            offset += length
        return cls(tuple(entries))

    @property
    def total(self) -> int:
        return self.entries[-1].stop if self.entries else 0

    @property
    def n_layers(self) -> int:
        return len(self.entries)

    @property
    def offsets(self) -> list[int]:
        return [e.offset for e in self.entries]

    def slice(self, layer: int) -> slice:
        entry = self.entries[layer]
        return slice(entry.offset, entry.stop)

    def index(self, layer: int, channel: int) -> int:
        """Return the style-vector position of (layer, channel)."""
        if not 0 <= layer < self.n_layers:
            raise LayoutError(f"layer {layer} out of range [0, {self.n_layers})")
        entry = self.entries[layer]
        if not 0 <= channel < entry.length:
            raise LayoutError(f"channel {channel} out of range for layer {layer}")
        return entry.offset + channel

    def locate(self, index: int) -> tuple[int, int]:
        """Return (layer, channel) for a style-vector position."""
        for entry in self.entries:
            if entry.offset <= index < entry.stop:
                return entry.layer, index - entry.offset
        raise LayoutError(f"style index {index} out of range [0, {self.total})")

    def layer_of(self) -> list[int]:
        """Return the layer number of every style coordinate."""
        return [e.layer for e in self.entries for _ in range(e.length)]


DEFAULT_LEVELS = (
    LevelSpec(4, (32,)),
    LevelSpec(8, (16, 16)),
    LevelSpec(16, (8, 8)),
    LevelSpec(32, (8, 8)),
)


@dataclass(frozen=True)
class ArchSpec:
    """Architecture of the toy style-based generator.

    Attributes:
        d_z: Latent dimension.
        d_w: Intermediate latent dimension.
        const_channels: Channels of the learned constant 4x4 input.
        levels: Resolution levels, starting at 4 and doubling.
        kernel: Convolution size of the styled layers (1 or 3).
        out_channels: Image channels.
        upsample: "bilinear" or "nearest".
        center: Subtract the channel mean in instance normalization.
        slope: Leaky ReLU negative slope.
    """

    d_z: int = 32
    d_w: int = 32
    const_channels: int = 32
    levels: tuple[LevelSpec, ...] = DEFAULT_LEVELS
    kernel: int = 3
    out_channels: int = 3
    upsample: str = "bilinear"
    center: bool = True
    slope: float = 0.2

    def __post_init__(self) -> None:
        if self.d_z < 1 or self.d_w < 1 or self.const_channels < 1:
            raise ArchError("d_z, d_w and const_channels must be positive")
        if self.kernel not in (1, 3):
            raise ArchError(f"kernel must be 1 or 3, got {self.kernel}")
        if self.upsample not in ("nearest", "bilinear"):
            raise ArchError(f"unknown upsample mode: {self.upsample}")
        if not self.levels:
            raise ArchError("at least one level is required")
        expected = BASE_RESOLUTION
        for level in self.levels:
            if level.resolution != expected:
                raise ArchError(
                    f"level resolutions must start at {BASE_RESOLUTION} and double, "
                    f"got {level.resolution} where {expected} was expected"
                )
            if not level.channels or any(c < 1 for c in level.channels):
                raise ArchError(f"level {level.resolution} needs positive channel counts")
            expected *= 2
        if self.resolution > MAX_RESOLUTION:
            raise ArchError(f"resolution {self.resolution} exceeds {MAX_RESOLUTION}")

    @property
    def resolution(self) -> int:
        return self.levels[-1].resolution

    @cached_property
    def layers(self) -> tuple[LayerSpec, ...]:
        layers = []
        in_channels = self.const_channels
        for level_index, level in enumerate(self.levels):
            for j, out_channels in enumerate(level.channels):
                layers.append(
                    LayerSpec(
                        index=len(layers),
                        level=level_index,
                        resolution=level.resolution,
                        in_channels=in_channels,
                        out_channels=out_channels,
                        upsample_before=level_index > 0 and j == 0,
                    )
                )
                in_channels = out_channels
        return tuple(layers)

    @cached_property
    def layout(self) -> StyleLayout:
        return StyleLayout.from_lengths([layer.in_channels for layer in self.layers])

    @property
    def final_channels(self) -> int:
        return self.layers[-1].out_channels

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["levels"] = [
            {"resolution": lv.resolution, "channels": list(lv.channels)} for lv in self.levels
        ]
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ArchSpec:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ArchError(f"unknown architecture keys: {sorted(unknown)}")
        values = dict(data)
        if "levels" in values:
            values["levels"] = tuple(
                LevelSpec(int(lv["resolution"]), tuple(int(c) for c in lv["channels"]))
                for lv in values["levels"]
            )
        return cls(**values)
