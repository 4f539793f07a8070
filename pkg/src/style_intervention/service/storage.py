"""On-disk formats: SIV1 tensor files, JSON sidecars, PPM images."""

from __future__ import annotations

import hashlib
import json
import logging
import struct
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from style_intervention.domain.directions import AttributeSpec, Hyperplane, TrainingParams
from style_intervention.domain.stylegen.arch import ArchError, ArchSpec
from style_intervention.domain.stylegen.codes import Image
from style_intervention.domain.stylegen.partition import ChannelPartition
from style_intervention.domain.stylegen.weights import GeneratorWeights

logger = logging.getLogger(__name__)

MAGIC = b"SIV1"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sII")  # magic, version, tensor count
_U32 = struct.Struct("<I")


class FormatError(ValueError):
    """Exception raised for malformed or unsupported file contents."""


class InputFileError(OSError):
    """Exception raised when an input file cannot be read.

    Attributes:
        path: The offending path.
        reason: What went wrong.
    """

    def __init__(self, path: str | Path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"cannot read {self.path}: {reason}")


class OutputPathError(OSError):
    """Exception raised when an output path cannot be written."""

    def __init__(self, path: str | Path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"cannot write {self.path}: {reason}")


def encode_tensors(tensors: Mapping[str, np.ndarray]) -> bytes:
    """Serialize named tensors as SIV1: little-endian header, then per tensor
    name, rank, dims and float32 data."""
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, len(tensors))]
    for name, values in tensors.items():
        data = np.ascontiguousarray(values, dtype="<f4")
        encoded = name.encode("utf-8")
        parts.append(_U32.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_U32.pack(data.ndim))
        parts.append(struct.pack(f"<{data.ndim}I", *data.shape))
        parts.append(data.tobytes())
    return b"".join(parts)


def decode_tensors(blob: bytes) -> dict[str, np.ndarray]:
    """Parse SIV1 bytes back into named float32 arrays.

    Raises:
        FormatError: On a bad magic, unknown version, truncation or
            trailing bytes.
    """
    view = memoryview(blob)
    offset = 0

    def take(n: int) -> memoryview:
        nonlocal offset
        if offset + n > len(view):
            raise FormatError(f"truncated tensor file at byte {offset}")
        chunk = view[offset : offset + n]
        offset += n
        return chunk

    magic, version, count = _HEADER.unpack(take(_HEADER.size))
    if magic != MAGIC:
        raise FormatError(f"bad magic {bytes(magic)!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")

    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = _U32.unpack(take(_U32.size))
        try:
            name = bytes(take(name_len)).decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"tensor name is not valid UTF-8: {e}") from e
        (rank,) = _U32.unpack(take(_U32.size))
        dims = struct.unpack(f"<{rank}I", take(4 * rank))
        n_values = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(take(4 * n_values), dtype="<f4").reshape(dims)
        if name in tensors:
            raise FormatError(f"duplicate tensor name: {name}")
        tensors[name] = data.astype(np.float32)
    if offset != len(view):
        raise FormatError(f"{len(view) - offset} trailing bytes after the last tensor")
    return tensors


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise OutputPathError(path, e.strerror or str(e)) from e


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError as e:
        raise InputFileError(path, "file not found") from e
    except OSError as e:
        raise InputFileError(path, e.strerror or str(e)) from e


def write_tensors(path: str | Path, tensors: Mapping[str, np.ndarray]) -> None:
    _write_bytes(Path(path), encode_tensors(tensors))


def read_tensors(path: str | Path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        return decode_tensors(_read_bytes(path))
    except (FormatError, struct.error) as e:
        raise FormatError(f"{path}: {e}") from e


def write_json(path: str | Path, data: Any) -> None:
    _write_bytes(Path(path), (json.dumps(data, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        return json.loads(_read_bytes(path).decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"{path}: invalid JSON: {e}") from e


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_bundle(path: str | Path, tensors: Mapping[str, np.ndarray], meta: dict[str, Any]) -> None:
    """Write a tensor file plus its <file>.json metadata sidecar."""
    write_tensors(path, tensors)
    write_json(sidecar_path(path), meta)


def read_bundle(path: str | Path) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    return read_tensors(path), read_json(sidecar_path(path))


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(_read_bytes(Path(path))).hexdigest()


def write_ppm(path: str | Path, image: Image) -> None:
    """Write a binary PPM (P6); values are clamped and mapped to round(v * 255)."""
    data = image.numpy()
    if data.ndim != 3 or data.shape[0] != 3:
        raise FormatError(f"PPM needs a [3, H, W] image, got {data.shape}")
    _, height, width = data.shape
    pixels = np.rint(np.clip(data, 0.0, 1.0) * 255.0).astype(np.uint8)
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    _write_bytes(Path(path), header + pixels.transpose(1, 2, 0).tobytes())


def write_image(stem: str | Path, image: Image) -> None:
    """Write <stem>.ppm for viewing and <stem>.siv with exact float values."""
    stem = Path(stem)
    write_ppm(stem.with_name(stem.name + ".ppm"), image)
    write_tensors(stem.with_name(stem.name + ".siv"), {"image": image.data})


def save_weights(
    path: str | Path,
    weights: GeneratorWeights,
    seed: int,
    partitions: list[ChannelPartition] | None = None,
    attributes: list[AttributeSpec] | None = None,
) -> None:
    meta = {
        "kind": "weights",
        "backend": weights.backend,
        "seed": seed,
        "arch": weights.arch.to_dict(),
        "partitions": [p.to_dict() for p in partitions or []],
        "attributes": [a.to_dict() for a in attributes or []],
    }
    write_bundle(path, weights.named_arrays(), meta)
    logger.info("wrote %s weights to %s", weights.backend, path)


def load_weights(
    path: str | Path,
) -> tuple[GeneratorWeights, list[ChannelPartition], list[AttributeSpec]]:
    """Load a weight bundle with its partitions and attributes.

    Raises:
        FormatError: If the sidecar is not a weights sidecar or the tensors
            do not match the recorded architecture.
    """
    tensors, meta = read_bundle(path)
    if meta.get("kind") != "weights":
        raise FormatError(f"{path}: not a weights file (kind={meta.get('kind')!r})")
    try:
        arch = ArchSpec.from_dict(meta["arch"])
        weights = GeneratorWeights.from_named_arrays(arch, tensors, meta.get("backend", "random"))
        partitions = [ChannelPartition.from_dict(p) for p in meta.get("partitions", [])]
        attributes = [AttributeSpec.from_dict(a) for a in meta.get("attributes", [])]
    except (KeyError, TypeError) as e:
        raise FormatError(f"{path}: malformed weights metadata: {e}") from e
    except ArchError as e:
        raise FormatError(f"{path}: {e}") from e
    return weights, partitions, attributes


def save_plane(
    path: str | Path, plane: Hyperplane, attribute: str, extra: dict[str, Any] | None = None
) -> None:
    meta = {
        "kind": "direction",
        "space": plane.space,
        "attribute": attribute,
        "bias": plane.bias,
        "params": {
            "l1_lambda": plane.params.l1_lambda,
            "hinge_c": plane.params.hinge_c,
            "epochs": plane.params.epochs,
            "seed": plane.params.seed,
            "validation_fraction": plane.params.validation_fraction,
            "solver": plane.params.solver,
            "refit": plane.params.refit,
        },
        **(extra or {}),
    }
    write_bundle(path, {"normal": plane.normal, "unit_normal": plane.unit_normal}, meta)


def load_plane(path: str | Path) -> tuple[Hyperplane, dict[str, Any]]:
    """Load a direction bundle; the unit normal is recomputed from the raw one."""
    tensors, meta = read_bundle(path)
    if meta.get("kind") != "direction":
        raise FormatError(f"{path}: not a direction file (kind={meta.get('kind')!r})")
    try:
        plane = Hyperplane(
            space=meta["space"],
            normal=tensors["normal"],
            bias=meta["bias"],
            params=TrainingParams(**meta["params"]),
        )
    except (KeyError, TypeError) as e:
        raise FormatError(f"{path}: malformed direction file: {e}") from e
    return plane, meta


def write_text(path: str | Path, text: str) -> None:
    _write_bytes(Path(path), text.encode("utf-8"))
