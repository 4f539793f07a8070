"""Tests for the generator forward pass and the random backend."""

import numpy as np
import pytest

from style_intervention.domain.stylegen.arch import ArchError, LayoutError
from style_intervention.domain.stylegen.codes import LatentVector, StyleCode
from style_intervention.domain.stylegen.network import (
    feature_maps,
    generate,
    map_latent,
    style_from_w,
    synthesize,
)
from style_intervention.domain.stylegen.weights import GeneratorWeights, build_random_generator


class TestRandomBackend:
    """Tests for build_random_generator()."""

    def test_same_seed_gives_identical_weights(self):
        """Equal seeds should give bit-identical parameters."""
        a = build_random_generator(11).named_arrays()
        b = build_random_generator(11).named_arrays()

        assert list(a) == list(b)
        for name in a:
            assert a[name].tobytes() == b[name].tobytes()

    def test_different_seeds_differ(self):
        a = build_random_generator(1).named_arrays()
        b = build_random_generator(2).named_arrays()

        assert a["const"].tobytes() != b["const"].tobytes()

    def test_named_arrays_round_trip(self, small_weights):
        """from_named_arrays(named_arrays()) should rebuild the same weights."""
        rebuilt = GeneratorWeights.from_named_arrays(
            small_weights.arch, small_weights.named_arrays()
        )

        for name, values in small_weights.named_arrays().items():
            assert rebuilt.named_arrays()[name].tobytes() == values.tobytes()

    def test_missing_tensor_is_reported(self, small_weights):
        arrays = small_weights.named_arrays()
        del arrays["const"]

        with pytest.raises(ArchError) as exc_info:
            GeneratorWeights.from_named_arrays(small_weights.arch, arrays)

        assert "const" in str(exc_info.value)


class TestForward:
    """Tests for the z -> w -> s -> image pipeline."""

    @pytest.fixture
    def z(self):
        return LatentVector(np.random.default_rng(0).normal(size=8))

    def test_generate_shapes(self, small_weights, z):
        """generate() should return codes and an image of the right dims."""
        w, s, image = generate(small_weights, z)

        assert w.dim == 8
        assert s.values.shape == (small_weights.arch.layout.total,)
        assert image.dims == (3, 16, 16)

    def test_image_is_in_unit_range(self, small_weights, z):
        _, _, image = generate(small_weights, z)

        assert image.data.min() >= 0.0
        assert image.data.max() <= 1.0

    def test_generate_is_deterministic(self, small_weights, z):
        """Repeated calls should give byte-identical images."""
        first = generate(small_weights, z)[2]
        second = generate(small_weights, z)[2]

        assert first.data.tobytes() == second.data.tobytes()

    def test_generate_composes_the_stages(self, small_weights, z):
        """generate() should equal map_latent, style_from_w and synthesize in turn."""
        w = map_latent(small_weights, z)
        s = style_from_w(small_weights, w)

        np.testing.assert_array_equal(
            synthesize(small_weights, s).data, generate(small_weights, z)[2].data
        )

    def test_unmodulated_output_ignores_style(self, small_weights, z):
        """With modulate=False the style code should have no effect."""
        _, s, _ = generate(small_weights, z)
        other = s.shifted(np.ones(s.values.shape))

        np.testing.assert_array_equal(
            synthesize(small_weights, s, modulate=False).data,
            synthesize(small_weights, other, modulate=False).data,
        )

    def test_feature_maps_one_per_layer(self, small_weights, z):
        _, s, _ = generate(small_weights, z)

        maps = feature_maps(small_weights, s)

        assert [m.dims for m in maps] == [(8, 4, 4), (4, 8, 8), (4, 8, 8), (4, 16, 16)]

    def test_wrong_latent_dim_raises(self, small_weights):
        with pytest.raises(LayoutError):
            map_latent(small_weights, LatentVector(np.zeros(5)))

    def test_wrong_style_length_raises(self, small_weights):
        """A style code laid out for another architecture should be rejected."""
        with pytest.raises(LayoutError):
            StyleCode(np.zeros(3), small_weights.arch.layout)
