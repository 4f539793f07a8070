"""Tests for ArchSpec and StyleLayout."""

import pytest

from style_intervention.domain.stylegen.arch import (
    ArchError,
    ArchSpec,
    LayoutError,
    LevelSpec,
    StyleLayout,
)


class TestArchSpec:
    """Tests for architecture validation and derived layers."""

    def test_default_layers(self):
        """The default generator should have seven styled layers at 4..32."""
        arch = ArchSpec()

        assert len(arch.layers) == 7
        assert arch.resolution == 32
        assert [layer.resolution for layer in arch.layers] == [4, 8, 8, 16, 16, 32, 32]
        assert [layer.upsample_before for layer in arch.layers] == [
            False,
            True,
            False,
            True,
            False,
            True,
            False,
        ]

    def test_layer_channels_chain(self):
        """Each layer's input channels should be the previous layer's output."""
        arch = ArchSpec()

        assert arch.layers[0].in_channels == arch.const_channels
        for before, after in zip(arch.layers, arch.layers[1:]):
            assert after.in_channels == before.out_channels

    def test_style_dim_is_sum_of_input_channels(self):
        """The layout should hold one gain per input channel of every layer."""
        arch = ArchSpec()

        assert arch.layout.total == sum(layer.in_channels for layer in arch.layers)
        assert arch.layout.total == 120

    def test_resolutions_must_double(self):
        with pytest.raises(ArchError):
            ArchSpec(levels=(LevelSpec(4, (8,)), LevelSpec(16, (8,))))

    def test_resolution_must_start_at_four(self):
        with pytest.raises(ArchError):
            ArchSpec(levels=(LevelSpec(8, (8,)),))

    def test_resolution_is_capped(self):
        """Outputs above 64x64 should be rejected."""
        levels = tuple(LevelSpec(4 * 2**i, (4,)) for i in range(6))
        with pytest.raises(ArchError):
            ArchSpec(levels=levels)

    def test_invalid_kernel(self):
        with pytest.raises(ArchError):
            ArchSpec(kernel=5)

    def test_dict_round_trip(self):
        """from_dict(to_dict()) should reproduce the spec."""
        arch = ArchSpec(d_z=16, upsample="nearest", center=False)

        assert ArchSpec.from_dict(arch.to_dict()) == arch

    def test_unknown_keys_are_rejected(self):
        with pytest.raises(ArchError) as exc_info:
            ArchSpec.from_dict({"depth": 3})

        assert "depth" in str(exc_info.value)


class TestStyleLayout:
    """Tests for StyleLayout lookups."""

    @pytest.fixture
    def layout(self):
        return StyleLayout.from_lengths([4, 2, 3])

    def test_offsets_and_total(self, layout):
        assert layout.offsets == [0, 4, 6]
        assert layout.total == 9
        assert layout.n_layers == 3

    def test_index_and_locate_agree(self, layout):
        """locate() should invert index() for every coordinate."""
        for position in range(layout.total):
            layer, channel = layout.locate(position)
            assert layout.index(layer, channel) == position

    def test_layer_of(self, layout):
        assert layout.layer_of() == [0, 0, 0, 0, 1, 1, 2, 2, 2]

    def test_out_of_range_channel(self, layout):
        with pytest.raises(LayoutError):
            layout.index(1, 2)

    def test_out_of_range_position(self, layout):
        with pytest.raises(LayoutError):
            layout.locate(9)
