"""Labelled sample datasets: generation, persistence and per-space views."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from style_intervention.domain.directions import SPACES, AttributeSpec, DirectionError
from style_intervention.domain.stylegen.codes import LatentVector
from style_intervention.domain.stylegen.network import generate
from style_intervention.domain.stylegen.weights import GeneratorWeights
from style_intervention.service.storage import (
    FormatError,
    read_json,
    read_tensors,
    write_json,
    write_tensors,
)

logger = logging.getLogger(__name__)

TENSOR_FILE = "dataset.siv"
HEADER_FILE = "dataset.json"


def sample_latent(d_z: int, seed: int, index: int) -> LatentVector:
    """Draw the latent of sample `index`; independent of how many others exist."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    return LatentVector(rng.standard_normal(d_z))


@dataclass(frozen=True, eq=False)
class Dataset:
    """N generated samples with their codes in every space and their labels.

    Attributes:
        z: [N, d_z] latents.
        w: [N, d_w] intermediate latents.
        s: [N, style_dim] style codes.
        labels: [N, A] values in {+1, -1}, one column per attribute.
        attributes: Attribute of each label column.
        seed: Master seed the latents were drawn from.
    """

    z: np.ndarray
    w: np.ndarray
    s: np.ndarray
    labels: np.ndarray
    attributes: tuple[AttributeSpec, ...]
    seed: int

    @property
    def size(self) -> int:
        return self.z.shape[0]

    def vectors(self, space: str) -> np.ndarray:
        if space not in SPACES:
            raise DirectionError(f"unknown space: {space}")
        return {"Z": self.z, "W": self.w, "S": self.s}[space]

    def labels_for(self, attribute: str) -> np.ndarray:
        names = [a.name for a in self.attributes]
        if attribute not in names:
            raise DirectionError(f"unknown attribute {attribute}; dataset has {names}")
        return self.labels[:, names.index(attribute)]


def _external_labels(spec: AttributeSpec, n: int) -> np.ndarray:
    values = read_json(spec.labels_file)
    if not isinstance(values, list) or len(values) < n:
        raise FormatError(f"{spec.labels_file}: expected a list of at least {n} labels")
    labels = np.array(values[:n], dtype=np.int8)
    if not np.isin(labels, (1, -1)).all():
        raise FormatError(f"{spec.labels_file}: labels must be +1 or -1")
    return labels


def build_dataset(
    weights: GeneratorWeights,
    attributes: list[AttributeSpec] | tuple[AttributeSpec, ...],
    n: int,
    seed: int,
    jobs: int = 1,
) -> Dataset:
    """Generate n samples and label them with every attribute.

    Samples are drawn from per-index seeds and assembled in index order, so
    the result does not depend on jobs.
    """
    arch = weights.arch

    def render(index: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[int]]:
        z = sample_latent(arch.d_z, seed, index)
        w, s, image = generate(weights, z)
        labels = [a.label(image) if a.kind == "planted" else 0 for a in attributes]
        return z.values, w.values, s.values, labels

    if jobs > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(render, range(n)))
    else:
        rows = [render(i) for i in range(n)]

    z = np.array([r[0] for r in rows]).reshape(n, arch.d_z)
    w = np.array([r[1] for r in rows]).reshape(n, arch.d_w)
    s = np.array([r[2] for r in rows]).reshape(n, arch.layout.total)
    labels = np.array([r[3] for r in rows], dtype=np.int8).reshape(n, len(attributes))
    for column, spec in enumerate(attributes):
        if spec.kind == "external":
            labels[:, column] = _external_labels(spec, n)

    logger.info("generated %d samples with %d attributes", n, len(attributes))
    return Dataset(z, w, s, labels, tuple(attributes), seed)


def write_dataset(directory: str | Path, dataset: Dataset, meta: dict[str, Any]) -> None:
    """Write dataset.siv and the dataset.json header."""
    directory = Path(directory)
    tensors = {}
    if dataset.size:
        tensors = {"z": dataset.z, "w": dataset.w, "s": dataset.s, "labels": dataset.labels}
    write_tensors(directory / TENSOR_FILE, tensors)
    header = {
        "kind": "dataset",
        "n": dataset.size,
        "seed": dataset.seed,
        "attributes": [a.to_dict() for a in dataset.attributes],
        "dims": {"z": dataset.z.shape[1], "w": dataset.w.shape[1], "s": dataset.s.shape[1]},
        **meta,
    }
    write_json(directory / HEADER_FILE, header)
    logger.info("wrote dataset of %d samples to %s", dataset.size, directory)


def read_dataset(directory: str | Path) -> tuple[Dataset, dict[str, Any]]:
    directory = Path(directory)
    header = read_json(directory / HEADER_FILE)
    if header.get("kind") != "dataset":
        raise FormatError(f"{directory}: not a dataset directory")
    tensors = read_tensors(directory / TENSOR_FILE)
    try:
        attributes = tuple(AttributeSpec.from_dict(a) for a in header["attributes"])
        n = int(header["n"])
        dims = header["dims"]
        if n:
            z, w, s = tensors["z"], tensors["w"], tensors["s"]
            labels = tensors["labels"].astype(np.int8)
        else:
            z, w, s = (np.zeros((0, int(dims[k]))) for k in ("z", "w", "s"))
            labels = np.zeros((0, len(attributes)), dtype=np.int8)
    except (KeyError, TypeError) as e:
        raise FormatError(f"{directory}: malformed dataset: {e}") from e
    if z.shape[0] != n or labels.shape != (n, len(attributes)):
        raise FormatError(f"{directory}: tensor sizes disagree with the header")
    return (
        Dataset(
            z.astype(np.float64),
            w.astype(np.float64),
            s.astype(np.float64),
            labels,
            attributes,
            int(header["seed"]),
        ),
        header,
    )
