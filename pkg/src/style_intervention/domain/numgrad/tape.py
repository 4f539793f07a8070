"""Wengert-list tape for reverse-mode differentiation."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from style_intervention.domain.numgrad.tensor import ShapeError, TapeError, Tensor

logger = logging.getLogger(__name__)

Backward = Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass(frozen=True)
class TapeEntry:
    """One recorded operation.

    Attributes:
        op: Primitive name.
        inputs: Node id of each input, or None for untracked constants.
        output: Node id assigned to the result.
        backward: Maps the output gradient to one gradient per input.
        regime: Optional array identifying the piecewise branch taken,
            used to detect kink crossings.
    """

    op: str
    inputs: tuple[int | None, ...]
    output: int
    backward: Backward
    regime: np.ndarray | None = None


class Tape:
    """Records primitive operations in execution order and replays them backwards.

    Node ids increase monotonically, so the entry list is already a
    topological order and its reverse is a valid order for gradient
    accumulation.
    """

    def __init__(self) -> None:
        self._entries: list[TapeEntry] = []
        self._dims: list[tuple[int, ...]] = []

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def ops(self) -> list[str]:
        return [entry.op for entry in self._entries]

    def watch(self, tensor: Tensor) -> Tensor:
        """Register a leaf and return a tracked copy of it."""
        node = self._new_node(tensor.dims)
        return Tensor._tracked(tensor.data, self, node)

    def record(
        self,
        op: str,
        value: np.ndarray,
        inputs: Sequence[Tensor],
        backward: Backward,
        regime: np.ndarray | None = None,
    ) -> Tensor:
        node = self._new_node(value.shape if value.ndim else (1,))
        input_nodes = tuple(t.node if t.tape is self else None for t in inputs)
        self._entries.append(TapeEntry(op, input_nodes, node, backward, regime))
        return Tensor._tracked(value, self, node)

    def signature(self) -> tuple[bytes, ...]:
        """Return the branch pattern of every piecewise op on the tape."""
        return tuple(
            np.packbits(entry.regime.astype(np.uint8).ravel()).tobytes()
            for entry in self._entries
            if entry.regime is not None
        )

    def gradient(
        self,
        output: Tensor,
        sources: Sequence[Tensor],
        seed: np.ndarray | None = None,
    ) -> list[Tensor]:
        """Compute d(seed . output)/d(source) for every source.

        Args:
            output: A tensor recorded on this tape.
            sources: Tensors returned by watch (or recorded) on this tape.
            seed: Upstream gradient with the output's dims. Defaults to one
                for single-element outputs.

        Returns:
            One gradient tensor per source, with the source's dims. Sources
            the output does not depend on receive zeros.

        Raises:
            TapeError: If output or a source belongs to a different tape.
            ShapeError: If the seed or a backward rule has the wrong dims.
        """
        if output.tape is not self:
            raise TapeError("output was not recorded on this tape")
        for source in sources:
            if source.tape is not self:
                raise TapeError("gradient source was not recorded on this tape")

        if seed is None:
            if output.size != 1:
                raise TapeError("a seed is required for non-scalar outputs")
            seed = np.ones(output.dims)
        seed = np.asarray(seed, dtype=np.float64)
        if seed.shape != output.dims:
            raise ShapeError("gradient", "seed", output.dims, seed.shape)

        grads: dict[int, np.ndarray] = {output.node: seed}
        for entry in reversed(self._entries):
            if entry.output > output.node:
                continue
            upstream = grads.get(entry.output)
            if upstream is None:
                continue
            for node, grad in zip(entry.inputs, entry.backward(upstream)):
                if node is None or grad is None:
                    continue
                if grad.shape != self._dims[node]:
                    raise ShapeError(entry.op, "gradient", self._dims[node], grad.shape)
                grads[node] = grads[node] + grad if node in grads else grad

        logger.debug("replayed %d tape entries for %d sources", len(self._entries), len(sources))
        return [
            Tensor(grads[s.node]) if s.node in grads else Tensor(np.zeros(s.dims))
            for s in sources
        ]

    def _new_node(self, dims: tuple[int, ...]) -> int:
        self._dims.append(tuple(dims))
        return len(self._dims) - 1


def common_tape(op: str, inputs: Sequence[Tensor]) -> Tape | None:
    """Return the single tape tracking any of the inputs, or None."""
    tapes = {id(t.tape): t.tape for t in inputs if t.tape is not None}
    if len(tapes) > 1:
        raise TapeError(f"{op}: inputs are tracked by different tapes")
    return next(iter(tapes.values()), None)
