"""Tests for channel groups, quadrant masks and ChannelPartition."""

import numpy as np
import pytest

from style_intervention.domain.stylegen.arch import LayoutError, StyleLayout
from style_intervention.domain.stylegen.partition import (
    ChannelPartition,
    channel_group,
    quadrant_mask,
    segmentation_mask,
)


class TestChannelGroup:
    def test_contiguous_blocks(self):
        assert [channel_group(8, c) for c in range(8)] == [0, 0, 1, 1, 2, 2, 3, 3]

    def test_indivisible_count_raises(self):
        with pytest.raises(LayoutError):
            channel_group(6, 0)


class TestQuadrantMask:
    def test_quadrants_tile_the_image(self):
        """The four quadrant masks should be disjoint and cover every pixel."""
        total = sum(quadrant_mask(q, 8).astype(int) for q in range(4))

        np.testing.assert_array_equal(total, np.ones((8, 8)))

    def test_named_quadrant(self):
        mask = quadrant_mask("bottom_right", 4)

        assert mask[3, 3] and not mask[0, 0]
        assert mask.sum() == 4

    def test_unknown_quadrant(self):
        with pytest.raises(ValueError):
            quadrant_mask("middle", 4)


class TestChannelPartition:
    """Tests for ChannelPartition."""

    @pytest.fixture
    def layout(self):
        return StyleLayout.from_lengths([4, 2])

    @pytest.fixture
    def partition(self):
        return ChannelPartition("top_left", ((0, 1), (1, 0)), quadrant_mask(0, 4))

    def test_indices_and_complement(self, partition, layout):
        np.testing.assert_array_equal(partition.indices(layout), [1, 4])
        np.testing.assert_array_equal(partition.complement_indices(layout), [0, 2, 3, 5])

    def test_duplicate_members_are_rejected(self):
        with pytest.raises(LayoutError):
            ChannelPartition("x", ((0, 1), (0, 1)), np.zeros((4, 4)))

    def test_dict_round_trip(self, partition):
        """to_dict() should survive JSON-style reconstruction."""
        restored = ChannelPartition.from_dict(partition.to_dict())

        assert restored.concept == partition.concept
        assert restored.members == partition.members
        np.testing.assert_array_equal(restored.region, partition.region)

    def test_region_is_serialized_as_rows(self, partition):
        assert partition.to_dict()["region"] == ["1100", "1100", "0000", "0000"]

    def test_segmentation_mask(self, partition):
        mask = segmentation_mask(partition)

        assert mask.dims == (4, 4)
        assert mask.data.sum() == 4
