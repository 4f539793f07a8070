"""Generator parameter sets and the seeded random backend."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from style_intervention.domain.numgrad import Tensor
from style_intervention.domain.stylegen.arch import ArchError, ArchSpec

logger = logging.getLogger(__name__)

BACKENDS = ("random", "planted")


@dataclass(frozen=True, eq=False)
class GeneratorWeights:
    """All parameters of one generator.

    Attributes:
        arch: The architecture the tensors are shaped for.
        mapping: Two (weight [d_w, in], bias [d_w]) pairs of the mapping MLP.
        affine: One (weight [C_in, d_w], bias [C_in]) pair per styled layer.
        const: Constant input [C0, 4, 4].
        kernels: One convolution kernel [C_out, C_in, k, k] per styled layer.
        to_rgb_weight: Output projection [3, C_last, 1, 1].
        to_rgb_bias: Output bias [3].
        backend: Which builder produced the weights.
    """

    arch: ArchSpec
    mapping: tuple[tuple[Tensor, Tensor], ...]
    affine: tuple[tuple[Tensor, Tensor], ...]
    const: Tensor
    kernels: tuple[Tensor, ...]
    to_rgb_weight: Tensor
    to_rgb_bias: Tensor
    backend: str = "random"

    def __post_init__(self) -> None:
        arch = self.arch
        if self.backend not in BACKENDS:
            raise ArchError(f"unknown backend: {self.backend}")
        expected = self._expected_dims()
        actual = {name: tensor.dims for name, tensor in self._tensors().items()}
        if list(actual) != list(expected):
            raise ArchError(f"weight set does not match the {len(arch.layers)}-layer architecture")
        for name, dims in expected.items():
            if actual[name] != dims:
                raise ArchError(f"{name}: expected dims {dims}, got {actual[name]}")

    def _expected_dims(self) -> dict[str, tuple[int, ...]]:
        arch = self.arch
        dims: dict[str, tuple[int, ...]] = {
            "mapping.0.weight": (arch.d_w, arch.d_z),
            "mapping.0.bias": (arch.d_w,),
            "mapping.1.weight": (arch.d_w, arch.d_w),
            "mapping.1.bias": (arch.d_w,),
            "const": (arch.const_channels, 4, 4),
        }
        for layer in arch.layers:
            dims[f"layer.{layer.index}.affine.weight"] = (layer.in_channels, arch.d_w)
            dims[f"layer.{layer.index}.affine.bias"] = (layer.in_channels,)
            dims[f"layer.{layer.index}.kernel"] = (
                layer.out_channels,
                layer.in_channels,
                arch.kernel,
                arch.kernel,
            )
        dims["to_rgb.weight"] = (arch.out_channels, arch.final_channels, 1, 1)
        dims["to_rgb.bias"] = (arch.out_channels,)
        return dims

    def _tensors(self) -> dict[str, Tensor]:
        named = {}
        for i, (weight, bias) in enumerate(self.mapping):
            named[f"mapping.{i}.weight"] = weight
            named[f"mapping.{i}.bias"] = bias
        named["const"] = self.const
        for i, ((weight, bias), kernel) in enumerate(zip(self.affine, self.kernels)):
            named[f"layer.{i}.affine.weight"] = weight
            named[f"layer.{i}.affine.bias"] = bias
            named[f"layer.{i}.kernel"] = kernel
        named["to_rgb.weight"] = self.to_rgb_weight
        named["to_rgb.bias"] = self.to_rgb_bias
        return named

    def named_arrays(self) -> dict[str, np.ndarray]:
        """Return every parameter in a fixed order, keyed by a stable name."""
        return {name: tensor.data for name, tensor in self._tensors().items()}

    @classmethod
    def from_named_arrays(
        cls, arch: ArchSpec, arrays: dict[str, np.ndarray], backend: str = "random"
    ) -> GeneratorWeights:
        """Rebuild a weight set from the output of named_arrays.

        Raises:
            ArchError: If a tensor is missing or has the wrong dims.
        """
        try:
            mapping = tuple(
                (Tensor(arrays[f"mapping.{i}.weight"]), Tensor(arrays[f"mapping.{i}.bias"]))
                for i in range(2)
            )
            affine = tuple(
                (
                    Tensor(arrays[f"layer.{i}.affine.weight"]),
                    Tensor(arrays[f"layer.{i}.affine.bias"]),
                )
                for i in range(len(arch.layers))
            )
            kernels = tuple(Tensor(arrays[f"layer.{i}.kernel"]) for i in range(len(arch.layers)))
            return cls(
                arch=arch,
                mapping=mapping,
                affine=affine,
                const=Tensor(arrays["const"]),
                kernels=kernels,
                to_rgb_weight=Tensor(arrays["to_rgb.weight"]),
                to_rgb_bias=Tensor(arrays["to_rgb.bias"]),
                backend=backend,
            )
        except KeyError as e:
            raise ArchError(f"weight file is missing tensor {e.args[0]}") from e


def build_random_generator(seed: int, arch: ArchSpec | None = None) -> GeneratorWeights:
    """Draw a generator with Gaussian fan-in scaled weights.

    Args:
        seed: Seeds every draw; equal seeds give bit-identical weights.
        arch: Architecture, defaulting to the standard 32x32 toy generator.

    Returns:
        GeneratorWeights with backend "random".
    """
    arch = arch or ArchSpec()
    rng = np.random.default_rng(seed)

    mapping = (
        (
            Tensor(rng.normal(size=(arch.d_w, arch.d_z)) / np.sqrt(arch.d_z)),
            Tensor(np.zeros(arch.d_w)),
        ),
        (
            Tensor(rng.normal(size=(arch.d_w, arch.d_w)) / np.sqrt(arch.d_w)),
            Tensor(np.zeros(arch.d_w)),
        ),
    )
    const = Tensor(rng.normal(size=(arch.const_channels, 4, 4)))

    affine = []
    kernels = []
    for layer in arch.layers:
        affine.append(
            (
                Tensor(0.2 * rng.normal(size=(layer.in_channels, arch.d_w))),
                Tensor(np.ones(layer.in_channels)),
            )
        )
        fan_in = layer.in_channels * arch.kernel * arch.kernel
        kernels.append(
            Tensor(
                rng.normal(size=(layer.out_channels, layer.in_channels, arch.kernel, arch.kernel))
                / np.sqrt(fan_in)
            )
        )

    to_rgb_weight = Tensor(
        rng.normal(size=(arch.out_channels, arch.final_channels, 1, 1))
        / np.sqrt(arch.final_channels)
    )
    to_rgb_bias = Tensor(np.full(arch.out_channels, 0.5))

    logger.info("built random generator (seed=%d, %d styled layers)", seed, len(arch.layers))
    return GeneratorWeights(
        arch=arch,
        mapping=mapping,
        affine=tuple(affine),
        const=const,
        kernels=tuple(kernels),
        to_rgb_weight=to_rgb_weight,
        to_rgb_bias=to_rgb_bias,
        backend="random",
    )
