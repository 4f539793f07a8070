"""Style intervention: blend a latent-space edit with an attribute direction in S.

The merged displacement is

    delta_s_m(L) = (1 - L) * delta_s_z + L * delta_s_n

with per-coordinate coefficients L in [0, 1]. L is optimized so the edited
image keeps pixels outside the concept mask, the displacement points along
the attribute direction, and the overall intervention stays small. Layers
are optimized one at a time from coarse to fine with projected Adam.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from style_intervention.domain.directions import DirectionError, Hyperplane, classify
from style_intervention.domain.numgrad import Tape, Tensor
from style_intervention.domain.stylegen.arch import StyleLayout
from style_intervention.domain.stylegen.codes import Image, LatentVector, Mask, StyleCode
from style_intervention.domain.stylegen.network import forward, map_latent, style_from_w, synthesize
from style_intervention.domain.stylegen.partition import ChannelPartition
from style_intervention.domain.stylegen.weights import GeneratorWeights

logger = logging.getLogger(__name__)

MODES = ("layerwise", "joint")
GRANULARITIES = ("channel", "layer")
DEFAULT_BETA = 3.0
DEFAULT_TOLERANCE = 1e-3


class InterventionError(ValueError):
    """Exception raised when an intervention cannot proceed.

    Attributes:
        layer: Layer being optimized when the failure happened, if any.
        step: Optimizer step within that layer, if any.
    """

    def __init__(self, message: str, layer: int | None = None, step: int | None = None):
        self.layer = layer
        self.step = step
        where = ""
        if layer is not None or step is not None:
            where = f" (layer {layer}, step {step})"
        super().__init__(f"{message}{where}")


@dataclass(frozen=True)
class LossWeights:
    lambda_attr: float = 1e-2
    lambda_norm: float = 1e-6

    def __post_init__(self) -> None:
        if self.lambda_attr < 0 or self.lambda_norm < 0:
            raise InterventionError("loss weights must be nonnegative")


@dataclass(frozen=True)
class Schedule:
    """Optimizer settings.

    Attributes:
        steps: Adam steps per layer (joint mode runs layers x steps in total).
        learning_rate: Adam step size.
        beta1: First-moment decay.
        beta2: Second-moment decay.
        epsilon: Adam denominator offset.
        mode: "layerwise" (coarse to fine, one layer at a time) or "joint".
        granularity: "channel" (one coefficient per style coordinate) or
            "layer" (one scalar per layer broadcast over its channels).
        direction_scale: Length given to delta_s_n before merging. None
            means the length of delta_s_z.
    """

    steps: int = 200
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    mode: str = "layerwise"
    granularity: str = "channel"
    direction_scale: float | None = None

    def __post_init__(self) -> None:
        if self.steps < 0:
            raise InterventionError("steps must be nonnegative")
        if self.learning_rate <= 0:
            raise InterventionError("learning_rate must be positive")
        if self.mode not in MODES:
            raise InterventionError(f"mode must be one of {MODES}, got {self.mode}")
        if self.granularity not in GRANULARITIES:
            raise InterventionError(
                f"granularity must be one of {GRANULARITIES}, got {self.granularity}"
            )
        if self.direction_scale is not None and self.direction_scale < 0:
            raise InterventionError("direction_scale must be nonnegative")


@dataclass(frozen=True, eq=False)
class InterventionCoeffs:
    """Per-coordinate intervention degrees, laid out like the style code."""

    values: np.ndarray
    layout: StyleLayout

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.layout.total,):
            raise InterventionError(
                f"coefficients have shape {values.shape}, layout needs ({self.layout.total},)"
            )
        if not ((values >= 0.0) & (values <= 1.0)).all():
            raise InterventionError("coefficients must lie in [0, 1]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, layout: StyleLayout) -> InterventionCoeffs:
        return cls(np.zeros(layout.total), layout)

    @classmethod
    def full(cls, layout: StyleLayout, value: float) -> InterventionCoeffs:
        return cls(np.full(layout.total, value), layout)

    def layer(self, index: int) -> np.ndarray:
        return self.values[self.layout.slice(index)]


@dataclass(frozen=True)
class LossBreakdown:
    pix: float
    attr: float
    norm: float
    total: float


@dataclass(frozen=True)
class TrajectoryPoint:
    """Loss before one optimizer update.

    layer is None in joint mode. masked_mse is None when the mask covers
    every pixel.
    """

    layer: int | None
    step: int
    loss: LossBreakdown
    masked_mse: float | None


@dataclass(frozen=True, eq=False)
class LayerSnapshot:
    """State after a layer (or the joint run) finished optimizing."""

    layer: int | None
    loss: LossBreakdown
    masked_mse: float | None
    image: Image


@dataclass(frozen=True, eq=False)
class InterventionResult:
    coeffs: InterventionCoeffs
    trajectory: list[TrajectoryPoint]
    snapshots: list[LayerSnapshot]
    image: Image
    z_edit_image: Image
    delta_s_m: np.ndarray
    delta_s_n_scaled: np.ndarray
    loss_weights: LossWeights = field(default_factory=LossWeights)
    schedule: Schedule = field(default_factory=Schedule)


@dataclass(frozen=True)
class EditVerification:
    """Whether an edited style code satisfies the ideal-edit conditions.

    Attributes:
        score_before: Classifier score of the original code.
        score_after: Classifier score of the edited code.
        sign_flip: score_before * score_after < 0.
        max_offconcept_change: Largest |change| outside the partition, or
            None when no partition was given.
        preserved: max_offconcept_change <= tolerance, or None when skipped.
        tolerance: Threshold used for preserved.
    """

    score_before: float
    score_after: float
    sign_flip: bool
    max_offconcept_change: float | None
    preserved: bool | None
    tolerance: float

    @property
    def preservation_skipped(self) -> bool:
        return self.preserved is None


def _as_vector(values: np.ndarray | StyleCode, layout: StyleLayout, name: str) -> np.ndarray:
    data = values.values if isinstance(values, StyleCode) else np.asarray(values, np.float64)
    if data.shape != (layout.total,):
        raise InterventionError(f"{name} has shape {data.shape}, layout needs ({layout.total},)")
    return data.astype(np.float64)


def _require_space(plane: Hyperplane, space: str) -> None:
    if plane.space != space:
        raise DirectionError(f"expected a hyperplane trained in {space}, got {plane.space}")


def _style_of(weights: GeneratorWeights, z: LatentVector) -> StyleCode:
    return style_from_w(weights, map_latent(weights, z))


def z_edit(
    weights: GeneratorWeights, plane_z: Hyperplane, z: LatentVector, beta: float = DEFAULT_BETA
) -> tuple[LatentVector, np.ndarray]:
    """Move z by beta along the Z-space direction.

    Returns:
        (z', delta_s_z) where delta_s_z = style(z') - style(z).
    """
    _require_space(plane_z, "Z")
    if plane_z.dim != z.dim:
        raise DirectionError(f"plane has {plane_z.dim} dims, latent has {z.dim}")
    edited = LatentVector(z.values + beta * plane_z.unit_normal)
    if beta == 0:
        return edited, np.zeros(weights.arch.layout.total)
    return edited, _style_of(weights, edited).values - _style_of(weights, z).values


def w_edit(
    weights: GeneratorWeights, plane_w: Hyperplane, w: LatentVector, beta: float = DEFAULT_BETA
) -> tuple[LatentVector, np.ndarray]:
    """Move w by beta along the W-space direction; returns (w', delta_s_w)."""
    _require_space(plane_w, "W")
    if plane_w.dim != w.dim:
        raise DirectionError(f"plane has {plane_w.dim} dims, w has {w.dim}")
    edited = LatentVector(w.values + beta * plane_w.unit_normal)
    if beta == 0:
        return edited, np.zeros(weights.arch.layout.total)
    return edited, style_from_w(weights, edited).values - style_from_w(weights, w).values


def style_edit(plane_s: Hyperplane, s: StyleCode, beta: float = DEFAULT_BETA) -> StyleCode:
    """Move s directly by beta along the S-space direction."""
    _require_space(plane_s, "S")
    if plane_s.dim != s.layout.total:
        raise DirectionError(f"plane has {plane_s.dim} dims, style code has {s.layout.total}")
    return s.shifted(beta * plane_s.unit_normal)


def edit_sign(plane: Hyperplane, x: np.ndarray) -> float:
    """Direction sign that moves x toward the opposite class."""
    return -1.0 if classify(plane, x) > 0 else 1.0


def scale_direction(
    delta_s_n: np.ndarray, delta_s_z: np.ndarray, scale: float | None = None
) -> np.ndarray:
    """Give delta_s_n the length of delta_s_z, or an explicit length."""
    direction = np.asarray(delta_s_n, dtype=np.float64)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        return np.zeros_like(direction)
    target = float(np.linalg.norm(delta_s_z)) if scale is None else float(scale)
    return direction * (target / norm)


def merge_displacement(
    coeffs: InterventionCoeffs, delta_s_z: np.ndarray, delta_s_n_scaled: np.ndarray
) -> np.ndarray:
    """Return (1 - L) * delta_s_z + L * delta_s_n_scaled coordinate-wise."""
    layout = coeffs.layout
    dz = _as_vector(delta_s_z, layout, "delta_s_z")
    dn = _as_vector(delta_s_n_scaled, layout, "delta_s_n")
    lam = coeffs.values
    return (1.0 - lam) * dz + lam * dn


def _keep(mask: Mask, image_dims: tuple[int, ...]) -> np.ndarray:
    m = mask.numpy()
    if m.shape != image_dims[1:]:
        raise InterventionError(f"mask dims {m.shape} do not match image {image_dims[1:]}")
    return 1.0 - m


def loss_pix(original: Image, edited: Image, mask: Mask) -> float:
    """L2 norm of the pixel change outside the mask, over all channels."""
    if original.dims != edited.dims:
        raise InterventionError(f"image dims differ: {original.dims} vs {edited.dims}")
    keep = _keep(mask, original.dims)
    return float(np.linalg.norm(keep[None] * (edited.numpy() - original.numpy())))


def loss_attr(delta_s_n: np.ndarray, delta_s_m: np.ndarray) -> float:
    """Negative cosine similarity between the direction and the displacement."""
    a = np.asarray(delta_s_n, dtype=np.float64)
    b = np.asarray(delta_s_m, dtype=np.float64)
    if a.shape != b.shape:
        raise InterventionError(f"vector shapes differ: {a.shape} vs {b.shape}")
    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    if norm_a == 0 or norm_b == 0:
        raise InterventionError("cosine similarity of a zero vector is undefined")
    return float(np.clip(-(a @ b) / (norm_a * norm_b), -1.0, 1.0))


def loss_norm(coeffs: InterventionCoeffs) -> float:
    return float(np.linalg.norm(coeffs.values))


def _combine(pix: float, attr: float, norm: float, weights: LossWeights) -> LossBreakdown:
    total = pix + weights.lambda_attr * attr + weights.lambda_norm * norm
    return LossBreakdown(pix, attr, norm, total)


def _attr_or_zero(dn: np.ndarray, dm: np.ndarray) -> float:
    if not np.linalg.norm(dn) or not np.linalg.norm(dm):
        return 0.0
    return loss_attr(dn, dm)


def total_loss(
    weights: GeneratorWeights,
    s: StyleCode,
    delta_s_z: np.ndarray,
    delta_s_n_scaled: np.ndarray,
    coeffs: InterventionCoeffs,
    mask: Mask,
    loss_weights: LossWeights | None = None,
) -> LossBreakdown:
    """Evaluate pix + lambda_attr * attr + lambda_norm * norm at coeffs.

    The attribute term is taken as 0 when either vector is zero.
    """
    loss_weights = loss_weights or LossWeights()
    dm = merge_displacement(coeffs, delta_s_z, delta_s_n_scaled)
    original = synthesize(weights, s)
    edited = synthesize(weights, s.shifted(dm))
    return _combine(
        loss_pix(original, edited, mask),
        _attr_or_zero(np.asarray(delta_s_n_scaled, np.float64), dm),
        loss_norm(coeffs),
        loss_weights,
    )


class _Objective:
    """Loss and gradient with respect to every coefficient."""

    def __init__(
        self,
        weights: GeneratorWeights,
        s: np.ndarray,
        dz: np.ndarray,
        dn: np.ndarray,
        mask: Mask,
        loss_weights: LossWeights,
    ):
        self.weights = weights
        self.s = s
        self.dz = dz
        self.dn = dn
        self.loss_weights = loss_weights
        self.original = forward(weights, Tensor(s)).numpy()
        self.keep = _keep(mask, self.original.shape)[None]
        self.inside = mask.numpy() > 0.5
        self.dn_norm = float(np.linalg.norm(dn))

    def image(self, lam: np.ndarray) -> Image:
        dm = (1.0 - lam) * self.dz + lam * self.dn
        return forward(self.weights, Tensor(self.s + dm))

    def masked_mse(self, image: Image) -> float | None:
        outside = ~self.inside
        if not outside.any():
            return None
        diff = image.numpy() - self.original
        return float(np.mean((diff**2)[:, outside]))

    def evaluate(self, lam: np.ndarray) -> tuple[LossBreakdown, np.ndarray, Image]:
        dm = (1.0 - lam) * self.dz + lam * self.dn
        tape = Tape()
        style = tape.watch(Tensor(self.s + dm))
        image = forward(self.weights, style)

        residual = self.keep * (image.numpy() - self.original)
        pix = float(np.linalg.norm(residual))
        seed = self.keep * residual / pix if pix > 0 else np.zeros_like(residual)
        grad_s = tape.gradient(image, [style], seed=seed)[0].numpy()

        attr = 0.0
        dm_norm = float(np.linalg.norm(dm))
        if self.dn_norm > 0 and dm_norm > 0:
            unit_n = self.dn / self.dn_norm
            unit_m = dm / dm_norm
            cos = float(unit_n @ unit_m)
            attr = -cos
            grad_s = grad_s + self.loss_weights.lambda_attr * (-(unit_n - cos * unit_m) / dm_norm)

        norm = float(np.linalg.norm(lam))
        grad = grad_s * (self.dn - self.dz)
        if norm > 0:
            grad = grad + self.loss_weights.lambda_norm * lam / norm
        return _combine(pix, attr, norm, self.loss_weights), grad, image


def coefficient_gradient(
    weights: GeneratorWeights,
    s: StyleCode,
    delta_s_z: np.ndarray,
    delta_s_n_scaled: np.ndarray,
    coeffs: InterventionCoeffs,
    mask: Mask,
    loss_weights: LossWeights | None = None,
) -> tuple[LossBreakdown, np.ndarray]:
    """Total loss and its gradient with respect to every coefficient."""
    layout = coeffs.layout
    objective = _Objective(
        weights,
        _as_vector(s, layout, "s"),
        _as_vector(delta_s_z, layout, "delta_s_z"),
        _as_vector(delta_s_n_scaled, layout, "delta_s_n"),
        mask,
        loss_weights or LossWeights(),
    )
    loss, grad, _ = objective.evaluate(coeffs.values.copy())
    return loss, grad


class _Adam:
    def __init__(self, size: int, schedule: Schedule):
        self.schedule = schedule
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        sc = self.schedule
        self.t += 1
        self.m = sc.beta1 * self.m + (1 - sc.beta1) * grad
        self.v = sc.beta2 * self.v + (1 - sc.beta2) * grad * grad
        m_hat = self.m / (1 - sc.beta1**self.t)
        v_hat = self.v / (1 - sc.beta2**self.t)
        return np.clip(params - sc.learning_rate * m_hat / (np.sqrt(v_hat) + sc.epsilon), 0.0, 1.0)


def _blocks(layout: StyleLayout, schedule: Schedule) -> list[tuple[int | None, list[slice], int]]:
    slices = [layout.slice(i) for i in range(layout.n_layers)]
    if schedule.mode == "joint":
        return [(None, slices, schedule.steps * layout.n_layers)]
    return [(i, [sl], schedule.steps) for i, sl in enumerate(slices)]


def optimize(
    weights: GeneratorWeights,
    s: StyleCode,
    delta_s_z: np.ndarray,
    delta_s_n: np.ndarray,
    mask: Mask,
    loss_weights: LossWeights | None = None,
    schedule: Schedule | None = None,
) -> InterventionResult:
    """Find the intervention coefficients for one edit.

    Args:
        weights: Generator parameters.
        s: Style code of the input sample.
        delta_s_z: Style displacement of the latent-space edit.
        delta_s_n: Attribute direction in S (any length; rescaled per
            schedule.direction_scale).
        mask: Concept mask, 1 where the edit is allowed to change pixels.
        loss_weights: Balance of the attribute and norm terms.
        schedule: Optimizer settings.

    Returns:
        InterventionResult with the optimized coefficients, the per-step
        trajectory and per-layer snapshots.

    Raises:
        InterventionError: On layout mismatch or a non-finite loss or gradient.
    """
    loss_weights = loss_weights or LossWeights()
    schedule = schedule or Schedule()
    layout = weights.arch.layout
    s_vec = _as_vector(s, layout, "s")
    dz = _as_vector(delta_s_z, layout, "delta_s_z")
    dn = scale_direction(_as_vector(delta_s_n, layout, "delta_s_n"), dz, schedule.direction_scale)
    objective = _Objective(weights, s_vec, dz, dn, mask, loss_weights)

    lam = np.zeros(layout.total)
    trajectory: list[TrajectoryPoint] = []
    snapshots: list[LayerSnapshot] = []
    z_edit_image = objective.image(lam)

    for layer, slices, steps in _blocks(layout, schedule):
        index = np.concatenate([np.arange(sl.start, sl.stop) for sl in slices])
        per_layer = schedule.granularity == "layer"
        adam = _Adam(len(slices) if per_layer else index.size, schedule)
        for step in range(steps):
            loss, grad, image = objective.evaluate(lam)
            if not np.isfinite(loss.total):
                raise InterventionError("loss is not finite", layer, step)
            if not np.isfinite(grad).all():
                raise InterventionError("gradient is not finite", layer, step)
            trajectory.append(TrajectoryPoint(layer, step, loss, objective.masked_mse(image)))
            if per_layer:
                params = np.array([lam[sl][0] for sl in slices])
                block_grad = np.array([grad[sl].sum() for sl in slices])
                params = adam.step(params, block_grad)
                for value, sl in zip(params, slices):
                    lam[sl] = value
            else:
                lam[index] = adam.step(lam[index], grad[index])
            logger.debug("layer %s step %d: total %.6g", layer, step, loss.total)

        loss, _, image = objective.evaluate(lam)
        snapshot = LayerSnapshot(layer, loss, objective.masked_mse(image), image)
        snapshots.append(snapshot)
        logger.info(
            "layer %s done: total %.6g, outside-mask MSE %s", layer, loss.total, snapshot.masked_mse
        )

    coeffs = InterventionCoeffs(lam, layout)
    return InterventionResult(
        coeffs=coeffs,
        trajectory=trajectory,
        snapshots=snapshots,
        image=objective.image(lam),
        z_edit_image=z_edit_image,
        delta_s_m=merge_displacement(coeffs, dz, dn),
        delta_s_n_scaled=dn,
        loss_weights=loss_weights,
        schedule=schedule,
    )


def interpolate(
    weights: GeneratorWeights,
    s: StyleCode,
    delta_s_z: np.ndarray,
    delta_s_n_scaled: np.ndarray,
    coeffs: InterventionCoeffs,
    t: float,
) -> Image:
    """Render s + (1 - L) * delta_s_z + t * L * delta_s_n_scaled."""
    if t < 0:
        raise InterventionError(f"interpolation coefficient must be >= 0, got {t}")
    layout = coeffs.layout
    s_vec = _as_vector(s, layout, "s")
    dz = _as_vector(delta_s_z, layout, "delta_s_z")
    dn = _as_vector(delta_s_n_scaled, layout, "delta_s_n")
    lam = coeffs.values
    return forward(weights, Tensor(s_vec + ((1.0 - lam) * dz + (t * lam) * dn)))


def verify_edit(
    plane_s: Hyperplane,
    s: StyleCode | np.ndarray,
    s_hat: StyleCode | np.ndarray,
    partition: ChannelPartition | None = None,
    layout: StyleLayout | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> EditVerification:
    """Check the sign flip and off-concept preservation of an edit.

    Args:
        plane_s: Attribute hyperplane in S.
        s: Original style code.
        s_hat: Edited style code.
        partition: Concept partition; without it the preservation check
            is skipped.
        layout: Style layout; taken from s when s is a StyleCode.
        tolerance: Bound on off-concept coordinate changes.
    """
    _require_space(plane_s, "S")
    before = s.values if isinstance(s, StyleCode) else np.asarray(s, np.float64)
    after = s_hat.values if isinstance(s_hat, StyleCode) else np.asarray(s_hat, np.float64)
    if before.shape != after.shape:
        raise InterventionError(f"style codes differ in shape: {before.shape} vs {after.shape}")
    score_before = classify(plane_s, before)
    score_after = classify(plane_s, after)

    max_change = preserved = None
    if partition is not None:
        layout = layout or (s.layout if isinstance(s, StyleCode) else None)
        if layout is None:
            raise InterventionError("a layout is required to locate the partition")
        complement = partition.complement_indices(layout)
        max_change = float(np.abs(after - before)[complement].max(initial=0.0))
        preserved = max_change <= tolerance

    return EditVerification(
        score_before=score_before,
        score_after=score_after,
        sign_flip=score_before * score_after < 0,
        max_offconcept_change=max_change,
        preserved=preserved,
        tolerance=tolerance,
    )
