"""Output formatters for command summaries."""

import json
from typing import Any

from style_intervention.domain.directions import SPACES


def format_json(summary: dict[str, Any]) -> str:
    """Format a command summary as JSON.

    Args:
        summary: JSON-ready summary returned by a pipeline function.

    Returns:
        Indented JSON with sorted keys, identical across re-runs.
    """
    return json.dumps(summary, indent=2, sort_keys=True)


def _value(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def format_human(summary: dict[str, Any]) -> str:
    """Format the scalar fields of a summary as 'key: value' lines.

    Nested objects are skipped except for the input file paths.
    """
    lines = []
    for key, value in summary.items():
        if key == "tool":
            lines.append(f"{value['name']} {value['version']}")
        elif isinstance(value, dict) and "path" in value:
            lines.append(f"{key}: {value['path']}")
        elif isinstance(value, (str, int, float, bool)) or value is None:
            lines.append(f"{key}: {_value(value)}")
        elif isinstance(value, list) and all(isinstance(v, (str, int, float)) for v in value):
            lines.append(f"{key}: {', '.join(_value(v) for v in value)}")
    return "\n".join(lines)


def format_training(summary: dict[str, Any]) -> str:
    """Format a train-direction summary."""
    report = summary["report"]
    lines = [
        f"Direction: {summary['attribute']} in {summary['space']}",
        f"Train accuracy: {_value(report['train_accuracy'])}",
        f"Validation accuracy: {_value(report['validation_accuracy'])}",
        f"Sparsity: {_value(report['sparsity'])}",
    ]
    if "l1_mass_on_concept" in summary:
        lines.append(f"L1 mass on concept: {_value(summary['l1_mass_on_concept'])}")
    if report.get("nonzero_per_layer") is not None:
        lines.append(f"Nonzero per layer: {report['nonzero_per_layer']}")
    lines.append(f"Written to: {summary['direction']['path']}")
    return "\n".join(lines)


def format_spaces_table(summary: dict[str, Any]) -> str:
    """Format compare-spaces output with one column per space.

    Accuracies and sparsity are shown as percentages.
    """
    table = summary["spaces"]
    rows = (
        ("Train", "train_accuracy"),
        ("Validate", "validation_accuracy"),
        ("Sparsity", "sparsity"),
    )
    lines = [f"Separability of {summary['attribute']}", ""]
    lines.append(f"{'':<10}" + "".join(f"{space:>10}" for space in SPACES))
    lines.append("─" * (10 + 10 * len(SPACES)))
    for label, key in rows:
        cells = []
        for space in SPACES:
            value = table[space][key]
            cells.append(f"{'-':>10}" if value is None else f"{100 * value:>9.1f}%")
        lines.append(f"{label:<10}" + "".join(cells))
    return "\n".join(lines)


def format_benchmark_table(summary: dict[str, Any]) -> str:
    """Format benchmark output with one row per edit method."""
    n = summary["samples"]
    lines = [f"Benchmark over {n} samples (mask: {summary['mask']})", ""]
    lines.append(f"{'Method':<14}{'MSE':>12}{'SSIM':>10}{'Outside MSE':>14}{'Flips':>8}")
    lines.append("─" * 58)
    for name, row in summary["methods"].items():
        mse = "-" if row["mse"] is None else f"{row['mse']:.3e}"
        ssim = "-" if row["ssim"] is None else f"{row['ssim']:.4f}"
        outside = "-" if row["masked_mse_outside"] is None else f"{row['masked_mse_outside']:.3e}"
        lines.append(f"{name:<14}{mse:>12}{ssim:>10}{outside:>14}{row['flips']:>5}/{n}")
    lines.append("")
    lines.append(f"Outside-mask MSE ratio: {_value(summary['outside_mse_ratio'])}")
    lines.append(f"Monotone refinements: {summary['monotone_samples']}/{n}")
    failures = summary.get("failures")
    if failures:
        lines.append("")
        lines.append("Failed checks:")
        lines.extend(f"  - {failure}" for failure in failures)
    return "\n".join(lines)


def format_dissection(summary: dict[str, Any]) -> str:
    """Format the unit rankings of a dissection, best first."""
    lines = [f"Dissection over {summary['n_samples']} samples (top {summary['fraction']:g})"]
    for concept, units in summary["rankings"].items():
        lines.append("")
        lines.append(f"{concept}:")
        for unit in units:
            lines.append(
                f"  layer {unit['layer']:>2} channel {unit['channel']:>3}  IoU {unit['iou']:.3f}"
            )
    return "\n".join(lines)


def format_intervention(summary: dict[str, Any]) -> str:
    """Format the metrics and verification of an intervention run."""
    check = summary["verification"]
    lines = [
        f"Sample {summary['sample']['index']} (seed {summary['sample']['seed']}),"
        f" mask {summary['mask']}",
        "",
        f"{'Image':<8}{'MSE':>12}{'SSIM':>10}{'Outside MSE':>14}{'Inside MSE':>14}",
    ]
    for name, row in summary["metrics"].items():
        cells = [row["mse"], row["ssim"], row["masked_mse_outside"], row["masked_mse_inside"]]
        lines.append(
            f"{name:<8}"
            + "".join(
                f"{'-' if v is None else format(v, '.3e'):>{w}}"
                for v, w in zip(cells, (12, 10, 14, 14))
            )
        )
    lines.append("")
    lines.append(
        f"Score: {check['score_before']:.4f} -> {check['score_after']:.4f}"
        f" (flipped: {'yes' if check['sign_flip'] else 'no'})"
    )
    if not check["preservation_skipped"]:
        lines.append(f"Off-concept change: {check['max_offconcept_change']:.3e}")
    return "\n".join(lines)
