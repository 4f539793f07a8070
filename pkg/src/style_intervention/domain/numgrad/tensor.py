"""Dense tensor storage and the storage-precision policy."""

from __future__ import annotations

import contextlib
import contextvars
from collections.abc import Iterator
from typing import TYPE_CHECKING, Any

import numpy as np

if TYPE_CHECKING:
    from style_intervention.domain.numgrad.tape import Tape


_STORAGE_DTYPE: contextvars.ContextVar[type] = contextvars.ContextVar(
    "numgrad_storage_dtype", default=np.float32
)


def storage_dtype() -> type:
    """Return the dtype new tensors are stored in (float32 unless overridden)."""
    return _STORAGE_DTYPE.get()


@contextlib.contextmanager
def float64_mode() -> Iterator[None]:
    """Store every tensor created inside the block in 64-bit.

    Used by gradient checks so central differences are not swamped by
    32-bit rounding.
    """
    token = _STORAGE_DTYPE.set(np.float64)
    try:
        yield
    finally:
        _STORAGE_DTYPE.reset(token)


class ShapeError(ValueError):
    """Exception raised when tensor dimensions do not fit an operation.

    Attributes:
        op: Name of the operation that rejected its input.
        axis: Name of the offending axis or argument.
        expected: What the operation required.
        actual: What it received.
    """

    def __init__(self, op: str, axis: str, expected: Any, actual: Any):
        self.op = op
        self.axis = axis
        self.expected = expected
        self.actual = actual
        super().__init__(f"{op}: {axis} expected {expected}, got {actual}")


class TapeError(RuntimeError):
    """Exception raised for invalid tape usage (mixed tapes, untracked outputs)."""


class Tensor:
    """Immutable dense tensor, optionally tracked by a Tape.

    Values are stored row-major in the current storage dtype. The underlying
    array is marked read-only so a Tensor can be shared between threads.
    """

    __slots__ = ("_data", "_tape", "_node")

    def __init__(self, values: Any):
        data = np.array(values, dtype=storage_dtype())
        if data.ndim == 0:
            data = data.reshape(1)
        if any(d < 1 for d in data.shape):
            raise ShapeError("Tensor", "dims", "positive integers", data.shape)
        data.setflags(write=False)
        self._data = data
        self._tape: Tape | None = None
        self._node: int | None = None

    @classmethod
    def _tracked(cls, values: np.ndarray, tape: Tape, node: int) -> Tensor:
        tensor = cls(values)
        tensor._tape = tape
        tensor._node = node
        return tensor

    @property
    def data(self) -> np.ndarray:
        """Read-only view of the stored values."""
        return self._data

    @property
    def dims(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def tape(self) -> Tape | None:
        return self._tape

    @property
    def node(self) -> int | None:
        return self._node

    @property
    def tracked(self) -> bool:
        return self._tape is not None

    def all_finite(self) -> bool:
        return bool(np.isfinite(self._data).all())

    def numpy(self) -> np.ndarray:
        """Return a writable float64 copy of the values."""
        return self._data.astype(np.float64)

    def detach(self) -> Tensor:
        """Return the same values without tape tracking."""
        return Tensor(self._data)

    def __repr__(self) -> str:
        tracked = f", node={self._node}" if self.tracked else ""
        return f"Tensor(dims={self.dims}, dtype={self._data.dtype}{tracked})"
