"""Sparse linear attribute classifiers and the edit directions they define.

A hyperplane is trained per attribute and space (Z, W or S) with an
L1-regularized hinge loss on standardized features. The coordinates the
penalty keeps are then refitted to a minimum-L1 hard-margin separator
whenever the training split is separable on them. The oriented unit
normal of the result is the edit direction.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from style_intervention.domain.stylegen.arch import StyleLayout
from style_intervention.domain.stylegen.codes import Image
from style_intervention.domain.stylegen.partition import quadrant_mask

logger = logging.getLogger(__name__)

SPACES = ("Z", "W", "S")
ATTRIBUTE_KINDS = ("planted", "external")
SOLVERS = ("lp", "subgradient")
# Relative size below which a simplex value is a degenerate zero.
ZERO_TOLERANCE = 1e-10


class DirectionError(ValueError):
    """Exception raised when a direction cannot be trained or applied."""


@dataclass(frozen=True)
class AttributeSpec:
    """A binary attribute and how to label an image with it.

    Planted attributes threshold the mean of one image channel over a
    quadrant. External attributes take labels from a JSON file of +1/-1
    values indexed by sample.

    Attributes:
        name: Attribute name.
        kind: "planted" or "external".
        region: Quadrant name (planted only).
        channel: Image channel averaged (planted only).
        threshold: Positive if the regional mean exceeds this.
        labels_file: Path to the label list (external only).
    """

    name: str
    kind: str = "planted"
    region: str | None = None
    channel: int = 0
    threshold: float = 0.5
    labels_file: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ATTRIBUTE_KINDS:
            raise DirectionError(f"unknown attribute kind: {self.kind}")
        if self.kind == "planted" and self.region is None:
            raise DirectionError(f"planted attribute {self.name} needs a region")
        if self.kind == "external" and self.labels_file is None:
            raise DirectionError(f"external attribute {self.name} needs a labels file")

    def label(self, image: Image) -> int:
        """Return +1 or -1 for a planted attribute."""
        if self.kind != "planted":
            raise DirectionError(f"attribute {self.name} is labelled from {self.labels_file}")
        data = image.data
        mask = quadrant_mask(self.region, data.shape[-1])
        return 1 if float(data[self.channel][mask].mean()) > self.threshold else -1

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AttributeSpec:
        return cls(**data)


@dataclass(frozen=True)
class TrainingParams:
    """Hyperparameters of the sparse hinge-loss trainer.

    Attributes:
        l1_lambda: Weight of the L1 penalty on the standardized normal.
        hinge_c: Weight of the mean hinge loss.
        epochs: Full-batch steps of the subgradient solver.
        seed: Seeds the train/validation split.
        validation_fraction: Share of samples held out.
        solver: "lp" minimizes the penalized loss exactly as a linear
            program; "subgradient" runs proximal subgradient steps with
            step size 1/sqrt(t).
        refit: Refit the kept coordinates to a minimum-L1 hard-margin
            separator when the training split is separable on them.
    """

    l1_lambda: float = 0.05
    hinge_c: float = 1.0
    epochs: int = 200
    seed: int = 0
    validation_fraction: float = 0.2
    solver: str = "lp"
    refit: bool = True

    def __post_init__(self) -> None:
        if self.l1_lambda < 0 or self.hinge_c <= 0:
            raise DirectionError("l1_lambda must be >= 0 and hinge_c > 0")
        if self.epochs < 1:
            raise DirectionError("epochs must be positive")
        if self.solver not in SOLVERS:
            raise DirectionError(f"solver must be one of {SOLVERS}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise DirectionError("validation_fraction must be in [0, 1)")


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """Decision boundary n . x + b = 0 in one latent space.

    Attributes:
        space: "Z", "W" or "S".
        normal: Raw (unnormalized) normal vector.
        bias: Offset b.
        params: Hyperparameters the plane was trained with.
        unit_normal: normal / ||normal||, derived.
    """

    space: str
    normal: np.ndarray
    bias: float
    params: TrainingParams = TrainingParams()
    unit_normal: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.space not in SPACES:
            raise DirectionError(f"unknown space: {self.space}")
        normal = np.array(self.normal, dtype=np.float64)
        norm = float(np.linalg.norm(normal))
        if normal.ndim != 1 or normal.size == 0:
            raise DirectionError("normal must be a non-empty vector")
        if norm == 0.0 or not np.isfinite(norm):
            raise DirectionError(
                "every coordinate of the normal is zero; lower l1_lambda or train longer"
            )
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "unit_normal", normal / norm)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]


@dataclass(frozen=True)
class DirectionReport:
    """Quality of a trained hyperplane.

    validation_accuracy is None when the split leaves no validation samples.
    """

    space: str
    train_accuracy: float
    validation_accuracy: float | None
    sparsity: float
    n_train: int
    n_validation: int
    nonzero_per_layer: tuple[int, ...] | None = None

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        if self.nonzero_per_layer is not None:
            data["nonzero_per_layer"] = list(self.nonzero_per_layer)
        return data


def split_indices(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle split; the validation part has floor(fraction * n) items."""
    order = np.random.default_rng(seed).permutation(n)
    n_val = int(np.floor(fraction * n))
    return np.sort(order[n_val:]), np.sort(order[:n_val])


def soft_threshold(x: np.ndarray, threshold: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def sparsity(vector: np.ndarray) -> float:
    """Fraction of exactly-zero coordinates."""
    vector = np.asarray(vector)
    return float(np.count_nonzero(vector == 0) / vector.size)


def l1_mass_fraction(vector: np.ndarray, indices: Sequence[int] | np.ndarray) -> float:
    """Share of the L1 norm carried by the given coordinates."""
    magnitude = np.abs(np.asarray(vector, dtype=np.float64))
    total = magnitude.sum()
    if total == 0:
        raise DirectionError("L1 mass of a zero vector is undefined")
    return float(magnitude[np.asarray(indices, dtype=np.int64)].sum() / total)


def classify(plane: Hyperplane, x: np.ndarray) -> float:
    """Return the signed score n . x + b."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (plane.dim,):
        raise DirectionError(f"vector has shape {x.shape}, plane expects ({plane.dim},)")
    return float(plane.normal @ x + plane.bias)


def direction_in_space(plane: Hyperplane) -> np.ndarray:
    """Return the unit normal, pointing toward the positive class."""
    return plane.unit_normal.copy()


def accuracy(plane: Hyperplane, vectors: np.ndarray, labels: np.ndarray) -> float:
    scores = np.asarray(vectors, dtype=np.float64) @ plane.normal + plane.bias
    predictions = np.where(scores > 0, 1, -1)
    return float(np.mean(predictions == np.asarray(labels)))


def standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (standardized x, column means, column scales).

    Constant columns keep scale 1 so they standardize to zero.
    """
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    return (x - mean) / scale, mean, scale


def _subgradient(xs: np.ndarray, y: np.ndarray, params: TrainingParams) -> tuple[np.ndarray, float]:
    n_samples, dim = xs.shape
    normal = np.zeros(dim)
    bias = 0.0
    coef = params.hinge_c / n_samples
    for t in range(1, params.epochs + 1):
        step = 1.0 / np.sqrt(t)
        margins = y * (xs @ normal + bias)
        active = margins < 1.0
        grad_normal = -coef * (y[active] @ xs[active])
        grad_bias = -coef * float(y[active].sum())
        normal = soft_threshold(normal - step * grad_normal, params.l1_lambda * step)
        bias -= step * grad_bias
        if logger.isEnabledFor(logging.DEBUG) and (t % 100 == 0 or t == params.epochs):
            hinge = np.maximum(0.0, 1.0 - margins).mean()
            logger.debug(
                "epoch %d: hinge %.5f, |n|_1 %.5f, nonzero %d",
                t,
                hinge,
                np.abs(normal).sum(),
                np.count_nonzero(normal),
            )
    return normal, bias


def _split_normal(solution: np.ndarray, dim: int) -> np.ndarray:
    # The normal is carried as positive and negative parts n = p - q.
    normal = solution[:dim] - solution[dim : 2 * dim]
    peak = np.abs(normal).max(initial=0.0)
    normal[np.abs(normal) <= ZERO_TOLERANCE * peak] = 0.0
    return normal


def _margin_matrix(xs: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Rows of -y_i * [x_i, -x_i, 1] so that A @ (p, q, b) <= -1 means margin >= 1.
    yx = y[:, None] * xs
    return np.hstack([-yx, yx, -y[:, None]])


def _lp_hinge(xs: np.ndarray, y: np.ndarray, params: TrainingParams) -> tuple[np.ndarray, float]:
    n_samples, dim = xs.shape
    a_ub = sparse.hstack(
        [sparse.csr_matrix(_margin_matrix(xs, y)), -sparse.identity(n_samples, format="csr")],
        format="csr",
    )
    cost = np.concatenate(
        [np.full(2 * dim, params.l1_lambda), [0.0], np.full(n_samples, params.hinge_c / n_samples)]
    )
    bounds = [(0.0, None)] * (2 * dim) + [(None, None)] + [(0.0, None)] * n_samples
    result = linprog(cost, A_ub=a_ub, b_ub=-np.ones(n_samples), bounds=bounds, method="highs-ds")
    if result.status != 0:
        raise DirectionError(f"hinge-loss program did not solve: {result.message}")
    logger.debug("penalized fit: objective %.6f, %d iterations", result.fun, result.nit)
    return _split_normal(result.x, dim), float(result.x[2 * dim])


def _lp_separator(xs: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Minimum-L1 normal with every margin >= 1, or None if none exists."""
    n_samples, dim = xs.shape
    cost = np.concatenate([np.ones(2 * dim), [0.0]])
    bounds = [(0.0, None)] * (2 * dim) + [(None, None)]
    result = linprog(
        cost,
        A_ub=_margin_matrix(xs, y),
        b_ub=-np.ones(n_samples),
        bounds=bounds,
        method="highs-ds",
    )
    if result.status != 0:
        return None
    return _split_normal(result.x, dim), float(result.x[2 * dim])


def _fit(x: np.ndarray, y: np.ndarray, params: TrainingParams) -> tuple[np.ndarray, float]:
    xs, mean, scale = standardize(x)
    if params.solver == "lp":
        normal, bias = _lp_hinge(xs, y, params)
    else:
        normal, bias = _subgradient(xs, y, params)

    support = np.flatnonzero(normal)
    if params.refit and support.size:
        refitted = _lp_separator(xs[:, support], y)
        if refitted is None:
            logger.info(
                "training split is not separable on the %d kept coordinates; no refit",
                support.size,
            )
        else:
            normal = np.zeros_like(normal)
            normal[support], bias = refitted

    # Undo the standardization: n . (x - mean) / scale + b.
    raw = normal / scale
    return raw, bias - float(raw @ mean)


def train_hyperplane(
    vectors: np.ndarray,
    labels: np.ndarray,
    space: str = "S",
    params: TrainingParams | None = None,
    layout: StyleLayout | None = None,
) -> tuple[Hyperplane, DirectionReport]:
    """Train a sparse linear classifier and report its quality.

    Args:
        vectors: [N, d] samples in the given space.
        labels: N values in {+1, -1}.
        space: Which latent space the vectors live in.
        params: Trainer hyperparameters.
        layout: Style layout, used to count nonzeros per layer in S.

    Returns:
        (hyperplane, report).

    Raises:
        DirectionError: If the inputs are malformed or the training split
            lacks one of the classes.
    """
    params = params or TrainingParams()
    x = np.asarray(vectors, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise DirectionError(f"vectors must be [N, d] with d > 0, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise DirectionError(f"expected {x.shape[0]} labels, got shape {y.shape}")
    if not np.isin(y, (1.0, -1.0)).all():
        raise DirectionError("labels must be +1 or -1")

    train_idx, val_idx = split_indices(x.shape[0], params.validation_fraction, params.seed)
    y_train = y[train_idx]
    if not ((y_train > 0).any() and (y_train < 0).any()):
        raise DirectionError("the training split contains a single class")

    normal, bias = _fit(x[train_idx], y_train, params)
    plane = Hyperplane(space, normal, bias, params)

    nonzero_per_layer = None
    if space == "S" and layout is not None and layout.total == plane.dim:
        nonzero_per_layer = tuple(
            int(np.count_nonzero(normal[layout.slice(i)])) for i in range(layout.n_layers)
        )
    report = DirectionReport(
        space=space,
        train_accuracy=accuracy(plane, x[train_idx], y_train),
        validation_accuracy=accuracy(plane, x[val_idx], y[val_idx]) if val_idx.size else None,
        sparsity=sparsity(normal),
        n_train=int(train_idx.size),
        n_validation=int(val_idx.size),
        nonzero_per_layer=nonzero_per_layer,
    )
    logger.info(
        "trained %s hyperplane: train acc %.4f, sparsity %.3f",
        space,
        report.train_accuracy,
        report.sparsity,
    )
    return plane, report
