"""Tests for the forward values of the differentiable primitives."""

import numpy as np
import pytest

from style_intervention.domain.numgrad import (
    ShapeError,
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


class TestConv2d:
    """Tests for conv2d()."""

    def test_one_by_one_kernel_mixes_channels(self):
        """A 1x1 convolution should be a per-pixel matrix product."""
        rng = np.random.default_rng(0)
        x = rng.normal(size=(3, 4, 4))
        kernel = rng.normal(size=(2, 3, 1, 1))

        out = conv2d(Tensor(x), Tensor(kernel))

        expected = np.einsum("oc,chw->ohw", kernel[:, :, 0, 0], x)
        np.testing.assert_allclose(out.data, expected, rtol=1e-5, atol=1e-6)

    def test_three_by_three_kernel_on_a_delta(self):
        """A centered delta should reproduce the kernel flipped, with same padding."""
        x = np.zeros((1, 5, 5))
        x[0, 2, 2] = 1.0
        kernel = np.arange(9, dtype=float).reshape(1, 1, 3, 3)

        out = conv2d(Tensor(x), Tensor(kernel))

        assert out.dims == (1, 5, 5)
        np.testing.assert_allclose(out.data[0, 1:4, 1:4], kernel[0, 0, ::-1, ::-1])
        assert out.data[0, 0].sum() == 0.0

    def test_even_kernel_is_rejected(self):
        """Only 1x1 and 3x3 kernels are supported."""
        with pytest.raises(ShapeError):
            conv2d(Tensor(np.ones((1, 4, 4))), Tensor(np.ones((1, 1, 2, 2))))

    def test_channel_mismatch_is_rejected(self):
        """The kernel's input channels must match the map."""
        with pytest.raises(ShapeError) as exc_info:
            conv2d(Tensor(np.ones((2, 4, 4))), Tensor(np.ones((1, 3, 1, 1))))

        assert exc_info.value.op == "conv2d"
        assert exc_info.value.expected == 3
        assert exc_info.value.actual == 2


class TestUpsample:
    """Tests for upsample()."""

    def test_nearest_repeats_pixels(self):
        """Nearest upsampling should copy each pixel into a 2x2 block."""
        x = np.array([[[1.0, 2.0], [3.0, 4.0]]])

        out = upsample(Tensor(x), "nearest")

        np.testing.assert_array_equal(
            out.data[0],
            [[1, 1, 2, 2], [1, 1, 2, 2], [3, 3, 4, 4], [3, 3, 4, 4]],
        )

    def test_bilinear_uses_half_pixel_weights(self):
        """Bilinear upsampling should blend neighbours 3:1 with edge clamping."""
        x = np.array([[[0.0, 1.0], [0.0, 1.0]]])

        out = upsample(Tensor(x), "bilinear")

        for row in out.data[0]:
            np.testing.assert_allclose(row, [0.0, 0.25, 0.75, 1.0])

    def test_bilinear_preserves_constant_maps(self):
        """A constant map should stay constant."""
        out = upsample(Tensor(np.full((2, 3, 3), 0.7)), "bilinear")

        assert out.dims == (2, 6, 6)
        np.testing.assert_allclose(out.data, 0.7, rtol=1e-6)

    def test_unknown_mode_is_rejected(self):
        with pytest.raises(ShapeError):
            upsample(Tensor(np.ones((1, 2, 2))), "bicubic")


class TestInstanceNorm:
    """Tests for instance_norm()."""

    def test_centered_output_has_zero_mean_unit_variance(self):
        """Each channel should be standardized over its pixels."""
        x = np.random.default_rng(1).normal(3.0, 2.0, size=(4, 8, 8))

        out = instance_norm(Tensor(x)).numpy()

        np.testing.assert_allclose(out.mean(axis=(1, 2)), 0.0, atol=1e-5)
        np.testing.assert_allclose(out.var(axis=(1, 2)), 1.0, rtol=1e-4)

    def test_uncentered_output_keeps_zeros(self):
        """Without centering, zero pixels stay zero and the RMS becomes one."""
        x = np.zeros((1, 4, 4))
        x[0, :2, :2] = 5.0

        out = instance_norm(Tensor(x), center=False).numpy()

        assert (out[0, 2:, :] == 0).all()
        np.testing.assert_allclose(out[0, :2, :2], 2.0, rtol=1e-6)
        np.testing.assert_allclose(np.sqrt((out**2).mean()), 1.0, rtol=1e-6)


class TestElementwiseOps:
    """Tests for the simple per-element and per-channel ops."""

    def test_scale_channels(self):
        x = np.ones((2, 2, 2))
        out = scale_channels(Tensor(x), Tensor([2.0, -1.0]))

        np.testing.assert_array_equal(out.data[0], 2.0)
        np.testing.assert_array_equal(out.data[1], -1.0)

    def test_scale_channels_rejects_wrong_length(self):
        with pytest.raises(ShapeError):
            scale_channels(Tensor(np.ones((2, 2, 2))), Tensor([1.0, 2.0, 3.0]))

    def test_add_bias(self):
        out = add_bias(Tensor(np.zeros((2, 2, 2))), Tensor([0.5, -0.5]))

        np.testing.assert_array_equal(out.data[0], 0.5)
        np.testing.assert_array_equal(out.data[1], -0.5)

    def test_leaky_relu(self):
        """Negative inputs should be scaled by the slope."""
        out = leaky_relu(Tensor([-2.0, 0.0, 3.0]), slope=0.2)

        np.testing.assert_allclose(out.data, [-0.4, 0.0, 3.0])

    def test_clamp(self):
        out = clamp(Tensor([-0.5, 0.25, 1.5]))

        np.testing.assert_array_equal(out.data, [0.0, 0.25, 1.0])

    def test_matvec(self):
        out = matvec(Tensor([[1.0, 2.0], [0.0, 1.0]]), Tensor([3.0, 4.0]), Tensor([1.0, 1.0]))

        np.testing.assert_array_equal(out.data, [12.0, 5.0])

    def test_matvec_rejects_wrong_bias(self):
        with pytest.raises(ShapeError):
            matvec(Tensor(np.eye(2)), Tensor([1.0, 1.0]), Tensor([1.0]))

    def test_slice_vector(self):
        out = slice_vector(Tensor([1.0, 2.0, 3.0, 4.0]), 1, 2)

        np.testing.assert_array_equal(out.data, [2.0, 3.0])

    def test_slice_out_of_range_is_rejected(self):
        """A slice running past the end should raise ShapeError."""
        with pytest.raises(ShapeError):
            slice_vector(Tensor([1.0, 2.0]), 1, 2)
