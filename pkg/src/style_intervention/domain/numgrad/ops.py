"""Differentiable primitives used by the generator.

Every op computes in 64-bit internally and stores its result in the
current storage dtype. If any input is tracked by a tape the op is
recorded together with its backward rule.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from style_intervention.domain.numgrad.tape import Backward, common_tape
from style_intervention.domain.numgrad.tensor import ShapeError, Tensor

UPSAMPLE_MODES = ("nearest", "bilinear")


def _f64(tensor: Tensor) -> np.ndarray:
    return tensor.data.astype(np.float64)


def _expect_rank(op: str, name: str, tensor: Tensor, rank: int) -> None:
    if len(tensor.dims) != rank:
        raise ShapeError(op, f"{name} rank", rank, len(tensor.dims))


def _emit(
    op: str,
    value: np.ndarray,
    inputs: Sequence[Tensor],
    backward: Backward,
    regime: np.ndarray | None = None,
) -> Tensor:
    tape = common_tape(op, inputs)
    if tape is None:
        return Tensor(value)
    return tape.record(op, value, inputs, backward, regime)


def conv2d(x: Tensor, kernel: Tensor) -> Tensor:
    """Same-padded stride-1 convolution.

    Args:
        x: Input feature map [C_in, H, W].
        kernel: Weights [C_out, C_in, k, k] with k in {1, 3}.

    Returns:
        Feature map [C_out, H, W].
    """
    _expect_rank("conv2d", "input", x, 3)
    _expect_rank("conv2d", "kernel", kernel, 4)
    c_out, c_in, kh, kw = kernel.dims
    if kh != kw or kh not in (1, 3):
        raise ShapeError("conv2d", "kernel size", "1x1 or 3x3", f"{kh}x{kw}")
    if x.dims[0] != c_in:
        raise ShapeError("conv2d", "input channels", c_in, x.dims[0])

    _, height, width = x.dims
    pad = kh // 2
    xp = np.pad(_f64(x), ((0, 0), (pad, pad), (pad, pad)))
    k = _f64(kernel)

    # Summation order over (dy, dx, c_in) is identical for every pixel.
    out = np.zeros((c_out, height, width))
    for dy in range(kh):
        for dx in range(kw):
            window = xp[None, :, dy : dy + height, dx : dx + width]
            out += (k[:, :, dy, dx, None, None] * window).sum(axis=1)

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grad_xp = np.zeros_like(xp)
        grad_k = np.zeros_like(k)
        for dy in range(kh):
            for dx in range(kw):
                window = xp[None, :, dy : dy + height, dx : dx + width]
                grad_k[:, :, dy, dx] = (grad[:, None] * window).sum(axis=(2, 3))
                grad_xp[:, dy : dy + height, dx : dx + width] += (
                    k[:, :, dy, dx, None, None] * grad[:, None]
                ).sum(axis=0)
        return grad_xp[:, pad : pad + height, pad : pad + width], grad_k

    return _emit("conv2d", out, (x, kernel), backward)


def _bilinear_rows(x: np.ndarray) -> np.ndarray:
    # Doubles axis 0 with half-pixel (align-corners false) sampling.
    n = x.shape[0]
    idx = np.arange(n)
    prev = np.maximum(idx - 1, 0)
    nxt = np.minimum(idx + 1, n - 1)
    even = 0.75 * x + 0.25 * x[prev]
    odd = 0.75 * x + 0.25 * x[nxt]
    return np.stack([even, odd], axis=1).reshape((2 * n,) + x.shape[1:])


def _bilinear_rows_transpose(grad: np.ndarray) -> np.ndarray:
    n = grad.shape[0] // 2
    idx = np.arange(n)
    prev = np.maximum(idx - 1, 0)
    nxt = np.minimum(idx + 1, n - 1)
    paired = grad.reshape((n, 2) + grad.shape[1:])
    even, odd = paired[:, 0], paired[:, 1]
    out = 0.75 * (even + odd)
    np.add.at(out, prev, 0.25 * even)
    np.add.at(out, nxt, 0.25 * odd)
    return out


def upsample(x: Tensor, mode: str = "nearest") -> Tensor:
    """Double the spatial resolution of a [C, H, W] map."""
    _expect_rank("upsample", "input", x, 3)
    if mode not in UPSAMPLE_MODES:
        raise ShapeError("upsample", "mode", UPSAMPLE_MODES, mode)
    channels, height, width = x.dims
    data = _f64(x)

    if mode == "nearest":
        out = data.repeat(2, axis=1).repeat(2, axis=2)

        def backward(grad: np.ndarray) -> tuple[np.ndarray]:
            return (grad.reshape(channels, height, 2, width, 2).sum(axis=(2, 4)),)

    else:
        rows = _bilinear_rows(np.moveaxis(data, 1, 0))
        out = np.moveaxis(_bilinear_rows(np.moveaxis(rows, 2, 0)), 0, 2)
        out = np.moveaxis(out, 0, 1)

        def backward(grad: np.ndarray) -> tuple[np.ndarray]:
            g = np.moveaxis(grad, 1, 0)
            g = np.moveaxis(_bilinear_rows_transpose(np.moveaxis(g, 2, 0)), 0, 2)
            return (np.moveaxis(_bilinear_rows_transpose(g), 0, 1),)

    return _emit("upsample", np.ascontiguousarray(out), (x,), backward)


def instance_norm(x: Tensor, eps: float = 1e-8, center: bool = True) -> Tensor:
    """Normalize each channel over its spatial positions.

    With center=False only the root-mean-square is divided out and the
    channel mean is left in place.
    """
    _expect_rank("instance_norm", "input", x, 3)
    data = _f64(x)
    xc = data - data.mean(axis=(1, 2), keepdims=True) if center else data
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=(1, 2), keepdims=True) + eps)
    y = xc * inv

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        projected = y * (grad * y).mean(axis=(1, 2), keepdims=True)
        if center:
            return (inv * (grad - grad.mean(axis=(1, 2), keepdims=True) - projected),)
        return (inv * (grad - projected),)

    return _emit("instance_norm", y, (x,), backward)


def scale_channels(x: Tensor, gains: Tensor) -> Tensor:
    """Multiply channel c of a [C, H, W] map by gains[c]."""
    _expect_rank("scale_channels", "input", x, 3)
    _expect_rank("scale_channels", "gains", gains, 1)
    if gains.dims[0] != x.dims[0]:
        raise ShapeError("scale_channels", "gains length", x.dims[0], gains.dims[0])
    data, g = _f64(x), _f64(gains)

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return grad * g[:, None, None], (grad * data).sum(axis=(1, 2))

    return _emit("scale_channels", data * g[:, None, None], (x, gains), backward)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    """Elementwise leaky ReLU. The subgradient at zero is the slope."""
    data = _f64(x)
    positive = data > 0

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (np.where(positive, grad, slope * grad),)

    return _emit("leaky_relu", np.where(positive, data, slope * data), (x,), backward, positive)


def matvec(weight: Tensor, x: Tensor, bias: Tensor) -> Tensor:
    """Affine map weight @ x + bias for weight [M, N], x [N], bias [M]."""
    _expect_rank("matvec", "weight", weight, 2)
    _expect_rank("matvec", "input", x, 1)
    _expect_rank("matvec", "bias", bias, 1)
    m, n = weight.dims
    if x.dims[0] != n:
        raise ShapeError("matvec", "input length", n, x.dims[0])
    if bias.dims[0] != m:
        raise ShapeError("matvec", "bias length", m, bias.dims[0])
    w, v, b = _f64(weight), _f64(x), _f64(bias)

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.outer(grad, v), (w * grad[:, None]).sum(axis=0), grad

    return _emit("matvec", (w * v[None, :]).sum(axis=1) + b, (weight, x, bias), backward)


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Add bias[c] to every position of channel c."""
    _expect_rank("add_bias", "input", x, 3)
    _expect_rank("add_bias", "bias", bias, 1)
    if bias.dims[0] != x.dims[0]:
        raise ShapeError("add_bias", "bias length", x.dims[0], bias.dims[0])

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return grad, grad.sum(axis=(1, 2))

    return _emit("add_bias", _f64(x) + _f64(bias)[:, None, None], (x, bias), backward)


def clamp(x: Tensor, low: float = 0.0, high: float = 1.0) -> Tensor:
    """Clip values to [low, high]. The subgradient outside the open range is 0."""
    data = _f64(x)
    inside = (data > low) & (data < high)
    regime = np.stack([inside, data >= high])

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (np.where(inside, grad, 0.0),)

    return _emit("clamp", np.clip(data, low, high), (x,), backward, regime)


def slice_vector(x: Tensor, offset: int, length: int) -> Tensor:
    """Return x[offset : offset + length] of a 1-D tensor."""
    _expect_rank("slice", "input", x, 1)
    n = x.dims[0]
    if offset < 0 or length < 1 or offset + length > n:
        raise ShapeError("slice", "range", f"within [0, {n})", (offset, offset + length))

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(n)
        full[offset : offset + length] = grad
        return (full,)

    return _emit("slice", _f64(x)[offset : offset + length], (x,), backward)
