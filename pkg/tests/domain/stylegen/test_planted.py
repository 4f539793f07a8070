"""Tests for the planted generator and its ground-truth partitions."""

import numpy as np
import pytest

from style_intervention.domain.stylegen.arch import ArchError, ArchSpec
from style_intervention.domain.stylegen.codes import LatentVector, StyleCode
from style_intervention.domain.stylegen.network import generate, map_latent, synthesize
from style_intervention.domain.stylegen.partition import QUADRANTS, quadrant_mask
from style_intervention.domain.stylegen.planted import (
    MAPPING_OFFSET,
    PLANTED_ARCH,
    build_planted_generator,
)


class TestPlantedConstruction:
    """Tests for build_planted_generator()."""

    def test_returns_partition_and_attribute_per_quadrant(self, planted):
        weights, partitions, attributes = planted

        assert weights.backend == "planted"
        assert [p.concept for p in partitions] == list(QUADRANTS)
        assert [a.name for a in attributes] == [f"red_{q}" for q in QUADRANTS]
        for partition in partitions:
            partition.validate(weights.arch)

    def test_partitions_cover_every_coordinate_once(self, planted):
        """The four groups should split the style vector exactly."""
        weights, partitions, _ = planted
        layout = weights.arch.layout

        combined = np.concatenate([p.indices(layout) for p in partitions])

        assert sorted(combined.tolist()) == list(range(layout.total))

    def test_same_seed_is_deterministic(self, planted):
        weights, _, _ = build_planted_generator(7)

        for name, values in planted[0].named_arrays().items():
            assert weights.named_arrays()[name].tobytes() == values.tobytes()

    def test_centered_architectures_are_rejected(self):
        """Planted locality needs uncentered normalization."""
        with pytest.raises(ArchError):
            build_planted_generator(0, ArchSpec(kernel=1, upsample="nearest", center=True))

    def test_three_by_three_kernels_are_rejected(self):
        with pytest.raises(ArchError):
            build_planted_generator(0, ArchSpec(upsample="nearest", center=False))


class TestPlantedBehaviour:
    """Tests for the structure the planted weights guarantee."""

    @pytest.fixture
    def sample(self, planted_weights):
        z = LatentVector(np.random.default_rng(3).normal(size=PLANTED_ARCH.d_z))
        return generate(planted_weights, z)

    def test_mapping_is_affine(self, planted_weights):
        """w - offset should be an orthogonal transform of z, so norms match."""
        z = LatentVector(np.random.default_rng(4).normal(size=PLANTED_ARCH.d_z))

        w = map_latent(planted_weights, z)

        np.testing.assert_allclose(
            np.linalg.norm(w.values - MAPPING_OFFSET), np.linalg.norm(z.values), rtol=1e-5
        )

    def test_unit_gains_give_threshold_red(self, planted_weights):
        """At unit gains every quadrant's mean red should sit at 0.5."""
        layout = planted_weights.arch.layout
        image = synthesize(planted_weights, StyleCode(np.ones(layout.total), layout))

        for quadrant in QUADRANTS:
            region = quadrant_mask(quadrant, 32)
            assert image.data[0][region].mean() == pytest.approx(0.5, abs=1e-5)

    @pytest.mark.parametrize("group", range(4))
    def test_finest_gain_changes_only_its_quadrant(
        self, planted_weights, planted_partitions, sample, group
    ):
        """Changing a finest-layer gain of group g should leave other quadrants bit-identical."""
        _, s, image = sample
        layout = planted_weights.arch.layout
        last = layout.n_layers - 1
        partition = planted_partitions[QUADRANTS[group]]
        channel = min(c for layer, c in partition.members if layer == last)
        delta = np.zeros(layout.total)
        delta[layout.index(last, channel)] = 0.5

        edited = synthesize(planted_weights, s.shifted(delta))

        outside = ~partition.region
        np.testing.assert_array_equal(edited.data[:, outside], image.data[:, outside])
        assert np.abs(edited.numpy() - image.numpy())[:, partition.region].max() > 1e-3

    def test_coarse_gains_have_no_visible_effect(self, planted_weights, sample):
        """Gains before the finest layer are divided out by normalization."""
        _, s, image = sample
        layout = planted_weights.arch.layout
        delta = np.zeros(layout.total)
        delta[: layout.entries[-1].offset] = 0.3

        edited = synthesize(planted_weights, s.shifted(delta))

        np.testing.assert_allclose(edited.data, image.data, atol=1e-5)

    def test_labels_are_balanced(self, planted_dataset):
        """Each quadrant attribute should have both classes within 20-80%."""
        for attribute in planted_dataset.attributes:
            positive = np.mean(planted_dataset.labels_for(attribute.name) > 0)
            assert 0.2 <= positive <= 0.8, attribute.name
