"""Generator backend with a known, exactly local concept structure.

Channels of every layer are split into four contiguous groups and group g
only ever carries signal inside image quadrant g:

* the constant input of a group-g channel is zero outside quadrant g,
* 1x1 kernels are block-diagonal over groups with positive entries,
* upsampling is nearest-neighbour and normalization divides out the RMS
  without centering, so zeros outside the quadrant stay zero,
* the mapping network operates in the linear regime of its leaky ReLUs.

Only the gains of the last styled layer reach the output (earlier gains are
divided out by the following normalization), and each quadrant's color is
an affine function of its group's last-layer gains. The red attribute of
quadrant g is therefore controlled by exactly the group-g coordinates of
the last layer.
"""

from __future__ import annotations

import logging

import numpy as np

from style_intervention.domain.directions import AttributeSpec
from style_intervention.domain.numgrad import Tensor
from style_intervention.domain.stylegen.arch import ArchError, ArchSpec
from style_intervention.domain.stylegen.network import forward
from style_intervention.domain.stylegen.partition import (
    N_GROUPS,
    QUADRANTS,
    ChannelPartition,
    channel_group,
    quadrant_mask,
)
from style_intervention.domain.stylegen.weights import GeneratorWeights

logger = logging.getLogger(__name__)

PLANTED_ARCH = ArchSpec(kernel=1, upsample="nearest", center=False)

MAPPING_OFFSET = 4.0
FINE_GAIN_STD = 0.25
COARSE_GAIN_STD = 0.02
SHARED_WEIGHT = 0.5
SHARED_DIMS = 8
RED_BASE = 0.2
RED_AMPLITUDE = 0.3
TINT_BASE = 0.2
TINT_AMPLITUDE = 0.25


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def _check_arch(arch: ArchSpec) -> None:
    if arch.kernel != 1 or arch.upsample != "nearest" or arch.center:
        raise ArchError("planted weights need 1x1 kernels, nearest upsampling and center=False")
    if arch.d_z != arch.d_w:
        raise ArchError("planted weights need d_z == d_w")
    if (arch.d_w - SHARED_DIMS) % N_GROUPS or arch.d_w <= SHARED_DIMS:
        raise ArchError(f"d_w - {SHARED_DIMS} must be a positive multiple of {N_GROUPS}")
    counts = [arch.const_channels] + [layer.out_channels for layer in arch.layers]
    if any(c % N_GROUPS for c in counts):
        raise ArchError(f"every channel count must be divisible by {N_GROUPS}")


def _affine_rows(
    rng: np.random.Generator, arch: ArchSpec, n_channels: int, finest: bool
) -> tuple[np.ndarray, np.ndarray]:
    d_w = arch.d_w
    if finest:
        # Group g reads a private block of w plus a block shared by all groups.
        own = (d_w - SHARED_DIMS) // N_GROUPS
        own_std = FINE_GAIN_STD / np.sqrt(own + SHARED_WEIGHT**2 * SHARED_DIMS)
        weight = np.zeros((n_channels, d_w))
        for c in range(n_channels):
            g = channel_group(n_channels, c)
            start = SHARED_DIMS + g * own
            weight[c, start : start + own] = own_std * rng.normal(size=own)
            weight[c, :SHARED_DIMS] = SHARED_WEIGHT * own_std * rng.normal(size=SHARED_DIMS)
    else:
        weight = COARSE_GAIN_STD / np.sqrt(d_w) * rng.normal(size=(n_channels, d_w))
    # E[w] is MAPPING_OFFSET in every coordinate, so gains are centered at 1.
    bias = 1.0 - MAPPING_OFFSET * weight.sum(axis=1)
    return weight, bias


def _block_kernel(rng: np.random.Generator, c_out: int, c_in: int) -> np.ndarray:
    kernel = np.zeros((c_out, c_in, 1, 1))
    per_group = c_in // N_GROUPS
    for o in range(c_out):
        g = channel_group(c_out, o)
        kernel[o, g * per_group : (g + 1) * per_group, 0, 0] = (
            rng.uniform(0.5, 1.5, size=per_group) / per_group
        )
    return kernel


def build_planted_generator(
    seed: int, arch: ArchSpec | None = None
) -> tuple[GeneratorWeights, list[ChannelPartition], list[AttributeSpec]]:
    """Build the planted generator with its ground-truth partitions.

    Args:
        seed: Seeds every random draw.
        arch: Architecture; must use 1x1 kernels, nearest upsampling and
            uncentered normalization. Defaults to PLANTED_ARCH.

    Returns:
        (weights, one partition per quadrant, one red attribute per quadrant).
    """
    arch = arch or PLANTED_ARCH
    _check_arch(arch)
    rng = np.random.default_rng(seed)
    d = arch.d_w

    w1 = _orthogonal(rng, d)
    w2 = _orthogonal(rng, d)
    mapping = (
        (Tensor(w1), Tensor(np.full(d, MAPPING_OFFSET))),
        (Tensor(w2), Tensor(MAPPING_OFFSET - MAPPING_OFFSET * w2.sum(axis=1))),
    )

    const = np.zeros((arch.const_channels, 4, 4))
    for c in range(arch.const_channels):
        g = channel_group(arch.const_channels, c)
        const[c][quadrant_mask(g, 4)] = 1.0 + 0.5 * rng.random()

    affine = []
    kernels = []
    for layer in arch.layers:
        finest = layer.index == len(arch.layers) - 1
        weight, bias = _affine_rows(rng, arch, layer.in_channels, finest)
        affine.append((Tensor(weight), Tensor(bias)))
        kernels.append(Tensor(_block_kernel(rng, layer.out_channels, layer.in_channels)))

    tints = TINT_BASE + TINT_AMPLITUDE * rng.random(size=(2, N_GROUPS))

    c_last = arch.final_channels
    draft = GeneratorWeights(
        arch=arch,
        mapping=mapping,
        affine=tuple(affine),
        const=Tensor(const),
        kernels=tuple(kernels),
        to_rgb_weight=Tensor(np.zeros((3, c_last, 1, 1))),
        to_rgb_bias=Tensor(np.zeros(3)),
        backend="planted",
    )

    # Baseline activation of each final channel at unit gains, read at the
    # centre of its quadrant where the map is constant.
    maps: list[Tensor] = []
    forward(draft, Tensor(np.ones(arch.layout.total)), capture=maps)
    final = maps[-1].data
    size = arch.resolution
    quarter, half = size // 4, size // 2
    centres = [(quarter + (g // 2) * half, quarter + (g % 2) * half) for g in range(N_GROUPS)]
    per_group = c_last // N_GROUPS

    to_rgb = np.zeros((3, c_last, 1, 1))
    for c in range(c_last):
        g = channel_group(c_last, c)
        row, col = centres[g]
        scale = 1.0 / (per_group * float(final[c, row, col]))
        to_rgb[0, c, 0, 0] = RED_AMPLITUDE * scale
        to_rgb[1, c, 0, 0] = tints[0, g] * scale
        to_rgb[2, c, 0, 0] = tints[1, g] * scale

    weights = GeneratorWeights(
        arch=arch,
        mapping=mapping,
        affine=tuple(affine),
        const=Tensor(const),
        kernels=tuple(kernels),
        to_rgb_weight=Tensor(to_rgb),
        to_rgb_bias=Tensor([RED_BASE, TINT_BASE, TINT_BASE]),
        backend="planted",
    )

    partitions = []
    for g, quadrant in enumerate(QUADRANTS):
        members = tuple(
            (layer.index, c)
            for layer in arch.layers
            for c in range(layer.in_channels)
            if channel_group(layer.in_channels, c) == g
        )
        partitions.append(ChannelPartition(quadrant, members, quadrant_mask(g, size)))

    attributes = [
        AttributeSpec(name=f"red_{quadrant}", region=quadrant, channel=0, threshold=0.5)
        for quadrant in QUADRANTS
    ]
    logger.info("built planted generator (seed=%d)", seed)
    return weights, partitions, attributes
