"""Pipeline use cases behind the CLI subcommands.

Each run_* function reads its inputs, calls the domain layer, writes its
outputs and returns a JSON-ready summary. Reports embed the resolved
configuration, the tool version and checksums of the files they read.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from style_intervention import __version__
from style_intervention.domain.directions import (
    SPACES,
    AttributeSpec,
    DirectionError,
    Hyperplane,
    direction_in_space,
    l1_mass_fraction,
    train_hyperplane,
)
from style_intervention.domain.dissect import dissect_generator
from style_intervention.domain.intervene import (
    InterventionCoeffs,
    InterventionResult,
    edit_sign,
    interpolate,
    optimize,
    style_edit,
    verify_edit,
    z_edit,
)
from style_intervention.domain.metrics import metrics_row, region_mse_or_none
from style_intervention.domain.stylegen.arch import ArchSpec, StyleLayout
from style_intervention.domain.stylegen.codes import (
    Image,
    LatentVector,
    Mask,
    StyleCode,
    mask_from_array,
)
from style_intervention.domain.stylegen.network import generate, synthesize
from style_intervention.domain.stylegen.partition import (
    QUADRANTS,
    ChannelPartition,
    quadrant_mask,
)
from style_intervention.domain.stylegen.planted import build_planted_generator
from style_intervention.domain.stylegen.weights import GeneratorWeights, build_random_generator
from style_intervention.service.config import RunConfig
from style_intervention.service.dataset import (
    HEADER_FILE,
    TENSOR_FILE,
    build_dataset,
    read_dataset,
    sample_latent,
    write_dataset,
)
from style_intervention.service.storage import (
    FormatError,
    InputFileError,
    encode_tensors,
    load_plane,
    load_weights,
    read_json,
    read_tensors,
    save_plane,
    save_weights,
    sha256_file,
    write_image,
    write_json,
    write_tensors,
    write_text,
)

logger = logging.getLogger(__name__)

GOLDEN_SEED = 7
TRAJECTORY_COLUMNS = ("layer", "step", "pix", "attr", "norm", "total", "masked_mse")
MONOTONE_SLACK = 0.05
# Optimizer settings without a published value; reports list them.
RECONSTRUCTED_SETTINGS = ("schedule.steps", "schedule.learning_rate")


class ValidationError(ValueError):
    """Exception raised when inputs are well-formed but inconsistent, or a
    requested acceptance check fails."""


def _tool() -> dict[str, str]:
    return {"name": "style-intervention", "version": __version__}


def _input(path: str | Path) -> dict[str, str]:
    return {"path": str(path), "sha256": sha256_file(path)}


def build_weights(
    config: RunConfig,
) -> tuple[GeneratorWeights, list[ChannelPartition], list[AttributeSpec]]:
    """Build the configured backend's weights, partitions and attributes."""
    if config.backend == "planted":
        arch = ArchSpec.from_dict({**_planted_defaults(), **(config.arch or {})})
        return build_planted_generator(config.seed, arch)
    arch = ArchSpec.from_dict(config.arch) if config.arch else ArchSpec()
    return build_random_generator(config.seed, arch), [], []


def _planted_defaults() -> dict[str, Any]:
    return {"kernel": 1, "upsample": "nearest", "center": False}


def run_gen_weights(config: RunConfig, out: str | Path) -> dict[str, Any]:
    weights, partitions, attributes = build_weights(config)
    save_weights(out, weights, config.seed, partitions, attributes)
    return {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": {},
        "weights": _input(out),
        "backend": weights.backend,
        "seed": config.seed,
        "style_dim": weights.arch.layout.total,
        "partitions": [p.concept for p in partitions],
        "attributes": [a.name for a in attributes],
    }


def run_sample(weights_path: str | Path, out_dir: str | Path, config: RunConfig) -> dict[str, Any]:
    """Sample config.dataset_size labelled codes from the stored weights."""
    n, seed = config.dataset_size, config.seed
    weights, _, attributes = load_weights(weights_path)
    dataset = build_dataset(weights, attributes, n, seed, jobs=config.jobs)
    inputs = {"weights": _input(weights_path)}
    write_dataset(out_dir, dataset, {"tool": _tool(), **inputs})
    balance = {
        a.name: float(np.mean(dataset.labels[:, i] > 0)) if n else None
        for i, a in enumerate(attributes)
    }
    return {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": inputs,
        "n": n,
        "seed": seed,
        "out": str(out_dir),
        "positive_rate": balance,
    }


def _generator_of(header: dict[str, Any]) -> tuple[StyleLayout | None, list[ChannelPartition]]:
    # Style layout and partitions of the weights a dataset was sampled from.
    weights_ref = header.get("weights", {}).get("path")
    if not weights_ref:
        return None, []
    try:
        weights, partitions, _ = load_weights(weights_ref)
    except (InputFileError, FormatError):
        logger.warning("weights %s of the dataset are unavailable", weights_ref)
        return None, []
    return weights.arch.layout, partitions


def _dataset_inputs(dataset_dir: str | Path) -> dict[str, dict[str, str]]:
    directory = Path(dataset_dir)
    return {
        "dataset": _input(directory / TENSOR_FILE),
        "dataset_header": _input(directory / HEADER_FILE),
    }


def run_train_direction(
    dataset_dir: str | Path, out: str | Path, config: RunConfig
) -> dict[str, Any]:
    """Train the configured attribute's hyperplane in config.space."""
    attribute, space = config.attribute, config.space
    dataset, header = read_dataset(dataset_dir)
    if dataset.size == 0:
        raise ValidationError(f"{dataset_dir}: the dataset is empty")
    layout, partitions = _generator_of(header) if space == "S" else (None, [])
    plane, report = train_hyperplane(
        dataset.vectors(space),
        dataset.labels_for(attribute),
        space,
        config.training_params(),
        layout,
    )
    summary = {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": _dataset_inputs(dataset_dir),
        "attribute": attribute,
        "space": space,
        "dataset": str(dataset_dir),
        "report": report.to_dict(),
    }
    spec = _find_attribute(dataset.attributes, attribute)
    concept = {p.concept: p for p in partitions}.get(spec.region if spec else None)
    if layout is not None and concept is not None:
        summary["l1_mass_on_concept"] = l1_mass_fraction(plane.normal, concept.indices(layout))
    save_plane(out, plane, attribute, {"training": summary})
    summary["direction"] = _input(out)
    return summary


def run_compare_spaces(dataset_dir: str | Path, config: RunConfig) -> dict[str, Any]:
    """Train one hyperplane per space on the same split and tabulate them."""
    dataset, header = read_dataset(dataset_dir)
    if dataset.size == 0:
        raise ValidationError(f"{dataset_dir}: the dataset is empty")
    labels = dataset.labels_for(config.attribute)
    layout, _ = _generator_of(header)
    table = {}
    for space in SPACES:
        _, report = train_hyperplane(
            dataset.vectors(space),
            labels,
            space=space,
            params=config.training_params(),
            layout=layout if space == "S" else None,
        )
        table[space] = {
            "train_accuracy": report.train_accuracy,
            "validation_accuracy": report.validation_accuracy,
            "sparsity": report.sparsity,
        }
    return {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": _dataset_inputs(dataset_dir),
        "attribute": config.attribute,
        "dataset": str(dataset_dir),
        "spaces": table,
    }


@dataclass(frozen=True, eq=False)
class EditCase:
    """One sample prepared for editing, oriented toward the opposite class."""

    index: int
    z: LatentVector
    s: StyleCode
    image: Image
    sign: float
    delta_s_z: np.ndarray
    delta_s_n: np.ndarray


def prepare_edit(
    weights: GeneratorWeights,
    plane_z: Hyperplane,
    plane_s: Hyperplane,
    seed: int,
    index: int,
    beta: float,
) -> EditCase:
    z = sample_latent(weights.arch.d_z, seed, index)
    _, s, image = generate(weights, z)
    if plane_s.dim != s.layout.total:
        raise ValidationError(
            f"S direction has {plane_s.dim} dims, generator style code has {s.layout.total}"
        )
    if plane_z.dim != z.dim:
        raise ValidationError(f"Z direction has {plane_z.dim} dims, generator latent has {z.dim}")
    sign = edit_sign(plane_s, s.values)
    _, delta_s_z = z_edit(weights, plane_z, z, sign * beta)
    return EditCase(index, z, s, image, sign, delta_s_z, sign * direction_in_space(plane_s))


def resolve_mask(
    spec: str | None,
    partitions: Sequence[ChannelPartition],
    attribute: AttributeSpec | None,
    size: int,
) -> tuple[Mask, ChannelPartition | None, str]:
    """Turn a --mask value into a mask and, when known, its partition.

    Accepts a partition concept, a quadrant name or a .siv file holding a
    "mask" tensor. Without a value the attribute's region is used.
    """
    if spec is None:
        if attribute is None or attribute.region is None:
            raise ValidationError("no --mask given and the attribute has no region")
        spec = attribute.region
    by_name = {p.concept: p for p in partitions}
    if spec in by_name:
        partition = by_name[spec]
        return partition.segmentation_mask(), partition, spec
    if spec in QUADRANTS:
        return mask_from_array(quadrant_mask(spec, size).astype(np.float64)), None, spec
    tensors = read_tensors(spec)
    if "mask" not in tensors:
        raise FormatError(f"{spec}: no tensor named 'mask'")
    mask = mask_from_array(tensors["mask"])
    if mask.dims != (size, size):
        raise ValidationError(f"mask is {mask.dims}, images are {size}x{size}")
    return mask, None, spec


def _find_attribute(attributes: Sequence[AttributeSpec], name: str | None) -> AttributeSpec | None:
    if name is None:
        return None
    for attribute in attributes:
        if attribute.name == name:
            return attribute
    return None


def _trajectory_csv(result: InterventionResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for point in result.trajectory:
        writer.writerow(
            [
                "" if point.layer is None else point.layer,
                point.step,
                repr(point.loss.pix),
                repr(point.loss.attr),
                repr(point.loss.norm),
                repr(point.loss.total),
                "" if point.masked_mse is None else repr(point.masked_mse),
            ]
        )
    return buffer.getvalue()


def monotone_refinement(original: Image, result: InterventionResult, mask: Mask) -> bool | None:
    """Whether the outside-mask error, from the latent edit through every
    layer, never rises by more than the slack and ends strictly lower.

    None when the mask leaves no outside region or nothing was optimized.
    """
    initial = region_mse_or_none(original, result.z_edit_image, mask, "outside")
    if initial is None or not result.snapshots:
        return None
    errors = [initial] + [snap.masked_mse for snap in result.snapshots]
    for previous, current in zip(errors, errors[1:]):
        if current > previous * (1 + MONOTONE_SLACK) + 1e-12:
            return False
    return errors[-1] < initial


def _intervene_case(
    weights: GeneratorWeights, case: EditCase, mask: Mask, config: RunConfig
) -> InterventionResult:
    return optimize(
        weights,
        case.s,
        case.delta_s_z,
        case.delta_s_n,
        mask,
        config.loss_weights,
        config.schedule,
    )


def run_intervention(
    weights_path: str | Path,
    dir_z_path: str | Path,
    dir_s_path: str | Path,
    sample_index: int,
    mask_spec: str | None,
    config: RunConfig,
    out_dir: str | Path,
) -> dict[str, Any]:
    """Edit one seeded sample and write the full result directory."""
    weights, partitions, attributes = load_weights(weights_path)
    plane_z, _ = load_plane(dir_z_path)
    plane_s, meta_s = load_plane(dir_s_path)
    if plane_z.space != "Z" or plane_s.space != "S":
        raise DirectionError(
            f"expected Z and S directions, got {plane_z.space} and {plane_s.space}"
        )
    attribute = _find_attribute(attributes, meta_s.get("attribute"))
    mask, partition, mask_name = resolve_mask(
        mask_spec, partitions, attribute, weights.arch.resolution
    )

    case = prepare_edit(weights, plane_z, plane_s, config.seed, sample_index, config.beta)
    result = _intervene_case(weights, case, mask, config)
    s_hat = case.s.shifted(result.delta_s_m)
    verification = verify_edit(plane_s, case.s, s_hat, partition)

    out = Path(out_dir)
    layout = weights.arch.layout
    write_tensors(out / "coeffs.siv", {"lambda": result.coeffs.values})
    write_tensors(
        out / "vectors.siv",
        {
            "z": case.z.values,
            "s": case.s.values,
            "delta_s_z": case.delta_s_z,
            "delta_s_n": result.delta_s_n_scaled,
            "delta_s_m": result.delta_s_m,
            "mask": mask.data,
        },
    )
    write_image(out / "input", case.image)
    write_image(out / "z_edit", result.z_edit_image)
    write_image(out / "final", result.image)
    for snap in result.snapshots:
        write_image(out / f"layer_{'joint' if snap.layer is None else snap.layer}", snap.image)
    write_text(out / "trajectory.csv", _trajectory_csv(result))

    report = {
        "tool": _tool(),
        "config": config.to_dict(),
        "reconstructed_settings": list(RECONSTRUCTED_SETTINGS),
        "inputs": {
            "weights": _input(weights_path),
            "dir_z": _input(dir_z_path),
            "dir_s": _input(dir_s_path),
        },
        "sample": {"index": sample_index, "seed": config.seed},
        "mask": mask_name,
        "edit_sign": case.sign,
        "direction_scale": float(np.linalg.norm(result.delta_s_n_scaled)),
        "metrics": {
            "z_edit": metrics_row(case.image, result.z_edit_image, mask).to_dict(),
            "final": metrics_row(case.image, result.image, mask).to_dict(),
        },
        "verification": {
            "score_before": verification.score_before,
            "score_after": verification.score_after,
            "sign_flip": verification.sign_flip,
            "max_offconcept_change": verification.max_offconcept_change,
            "preserved": verification.preserved,
            "preservation_skipped": verification.preservation_skipped,
            "tolerance": verification.tolerance,
        },
        "layers": [
            {
                "layer": snap.layer,
                "total": snap.loss.total,
                "pix": snap.loss.pix,
                "attr": snap.loss.attr,
                "norm": snap.loss.norm,
                "masked_mse": snap.masked_mse,
            }
            for snap in result.snapshots
        ],
        "nonzero_coefficients_per_layer": [
            int(np.count_nonzero(result.coeffs.layer(i))) for i in range(layout.n_layers)
        ],
    }
    write_json(out / "report.json", report)
    logger.info("intervention written to %s", out)
    return report


def run_interpolation(
    result_dir: str | Path,
    t_values: Sequence[float],
    out_dir: str | Path,
    config: RunConfig,
) -> dict[str, Any]:
    """Render the stored intervention at several scales of the direction term.

    Deltas are measured against the t = 0 rendering, which is always
    computed whether or not 0 is among t_values.
    """
    result_dir = Path(result_dir)
    source = read_json(result_dir / "report.json")
    weights_path = source["inputs"]["weights"]["path"]
    inputs = {
        "result_report": _input(result_dir / "report.json"),
        "coeffs": _input(result_dir / "coeffs.siv"),
        "vectors": _input(result_dir / "vectors.siv"),
        "weights": _input(weights_path),
    }
    weights, _, _ = load_weights(weights_path)
    layout = weights.arch.layout
    vectors = read_tensors(result_dir / "vectors.siv")
    coeffs = InterventionCoeffs(
        np.clip(read_tensors(result_dir / "coeffs.siv")["lambda"], 0.0, 1.0), layout
    )
    s = StyleCode(vectors["s"], layout)
    mask = mask_from_array(vectors["mask"])
    inside = mask.numpy() > 0.5

    out = Path(out_dir)
    frames = []
    reference = interpolate(
        weights, s, vectors["delta_s_z"], vectors["delta_s_n"], coeffs, 0.0
    ).numpy()
    for t in t_values:
        image = interpolate(weights, s, vectors["delta_s_z"], vectors["delta_s_n"], coeffs, t)
        delta = np.abs(image.numpy() - reference)
        write_image(out / f"interp_t{t:g}", image)
        frames.append(
            {
                "t": t,
                "max_outside_delta": float(delta[:, ~inside].max(initial=0.0)),
                "inside_mean": [float(c[inside].mean()) for c in image.numpy()]
                if inside.any()
                else None,
            }
        )
    report = {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": inputs,
        "result": str(result_dir),
        "reference_t": 0.0,
        "frames": frames,
    }
    write_json(out / "report.json", report)
    return report


def run_dissection(
    weights_path: str | Path,
    n_samples: int,
    mode: str,
    final_level_only: bool,
    top: int | None,
    out: str | Path | None,
    config: RunConfig,
) -> dict[str, Any]:
    """Rank style channels by IoU with each concept; seed, fraction and
    jobs come from the config."""
    seed, fraction = config.seed, config.fraction
    weights, partitions, _ = load_weights(weights_path)
    size = weights.arch.resolution
    concepts = partitions or [
        ChannelPartition(q, (), quadrant_mask(q, size)) for q in QUADRANTS
    ]
    samples = [sample_latent(weights.arch.d_z, seed, i) for i in range(n_samples)]
    report = dissect_generator(weights, samples, concepts, fraction, mode, config.jobs)
    summary = {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": {"weights": _input(weights_path)},
        "seed": seed,
        "mode": mode,
        **report.to_dict(top=top, final_level_only=final_level_only),
    }
    if out is not None:
        write_json(out, summary)
    return summary


def run_benchmark(
    weights_path: str | Path,
    dir_z_path: str | Path,
    dir_s_path: str | Path,
    n_samples: int,
    config: RunConfig,
    mask_spec: str | None = None,
) -> dict[str, Any]:
    """Compare latent, style-space and intervention edits on seeded samples."""
    weights, partitions, attributes = load_weights(weights_path)
    plane_z, _ = load_plane(dir_z_path)
    plane_s, meta_s = load_plane(dir_s_path)
    attribute = _find_attribute(attributes, meta_s.get("attribute"))
    mask, partition, mask_name = resolve_mask(
        mask_spec, partitions, attribute, weights.arch.resolution
    )

    methods: dict[str, list[dict[str, Any]]] = {"z_edit": [], "style_edit": [], "intervention": []}
    for index in range(n_samples):
        case = prepare_edit(weights, plane_z, plane_s, config.seed, index, config.beta)
        z_code = case.s.shifted(case.delta_s_z)
        s_code = style_edit(plane_s, case.s, case.sign * float(np.linalg.norm(case.delta_s_z)))
        result = _intervene_case(weights, case, mask, config)
        i_code = case.s.shifted(result.delta_s_m)
        for name, code, image in (
            ("z_edit", z_code, result.z_edit_image),
            ("style_edit", s_code, synthesize(weights, s_code)),
            ("intervention", i_code, result.image),
        ):
            row = metrics_row(case.image, image, mask).to_dict()
            check = verify_edit(plane_s, case.s, code, partition)
            row["sign_flip"] = check.sign_flip
            methods[name].append(row)
        methods["intervention"][-1]["monotone"] = monotone_refinement(case.image, result, mask)
        logger.info("benchmark sample %d/%d done", index + 1, n_samples)

    def mean(rows: list[dict[str, Any]], key: str) -> float | None:
        values = [r[key] for r in rows if r[key] is not None]
        return float(np.mean(values)) if values else None

    summary = {
        name: {
            "mse": mean(rows, "mse"),
            "ssim": mean(rows, "ssim"),
            "masked_mse_outside": mean(rows, "masked_mse_outside"),
            "flips": sum(r["sign_flip"] for r in rows),
        }
        for name, rows in methods.items()
    }
    z_outside = summary["z_edit"]["masked_mse_outside"]
    i_outside = summary["intervention"]["masked_mse_outside"]
    return {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": {
            "weights": _input(weights_path),
            "dir_z": _input(dir_z_path),
            "dir_s": _input(dir_s_path),
        },
        "mask": mask_name,
        "samples": n_samples,
        "methods": summary,
        "outside_mse_ratio": i_outside / z_outside if z_outside else None,
        "monotone_samples": sum(1 for r in methods["intervention"] if r["monotone"]),
        "per_sample": methods,
    }


def benchmark_failures(report: dict[str, Any]) -> list[str]:
    """Acceptance thresholds the benchmark report misses."""
    n = report["samples"]
    failures = []
    if report["methods"]["z_edit"]["flips"] < 0.9 * n:
        failures.append(f"latent edit flipped {report['methods']['z_edit']['flips']}/{n} samples")
    if report["methods"]["intervention"]["flips"] < 0.95 * n:
        failures.append(
            f"intervention flipped {report['methods']['intervention']['flips']}/{n} samples"
        )
    ratio = report["outside_mse_ratio"]
    if ratio is None or ratio > 0.05:
        failures.append(f"outside-mask MSE ratio {ratio} exceeds 0.05")
    rows = report["per_sample"]["intervention"]
    if any(r["sign_flip"] and r["monotone"] is False for r in rows):
        failures.append(f"only {report['monotone_samples']}/{n} runs refined monotonically")
    return failures


def golden_record(seed: int = GOLDEN_SEED) -> dict[str, Any]:
    """Regression data for the random backend at a fixed seed."""
    weights = build_random_generator(seed)
    z = sample_latent(weights.arch.d_z, seed, 0)
    w, s, image = generate(weights, z)
    return {
        "seed": seed,
        "weights_sha256": hashlib.sha256(encode_tensors(weights.named_arrays())).hexdigest(),
        "w": [float(v) for v in w.values],
        "s": [float(v) for v in s.values],
        "image_mean": float(image.numpy().mean()),
    }


def run_freeze_golden(out: str | Path, config: RunConfig) -> dict[str, Any]:
    record = golden_record(config.seed)
    write_json(out, record)
    return {
        "tool": _tool(),
        "config": config.to_dict(),
        "inputs": {},
        "golden": _input(out),
        "seed": config.seed,
        "weights_sha256": record["weights_sha256"],
    }
