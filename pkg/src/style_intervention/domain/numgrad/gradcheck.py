"""Finite-difference verification of tape gradients."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from style_intervention.domain.numgrad.tape import Tape
from style_intervention.domain.numgrad.tensor import Tensor, float64_mode

logger = logging.getLogger(__name__)

DEFAULT_CHECKS = 100
DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4


@dataclass(frozen=True)
class GradientCheckReport:
    """Outcome of a gradient check.

    Attributes:
        checks: Number of coordinates compared.
        skipped: Probes rejected because a perturbation crossed a kink.
        max_relative_error: Worst |analytic - numeric| / max(1e-8, |numeric|).
        worst_index: Coordinate with the worst error, or None if none was compared.
        tolerance: Threshold the check was judged against.
    """

    checks: int
    skipped: int
    max_relative_error: float
    worst_index: tuple[int, ...] | None
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.checks > 0 and self.max_relative_error < self.tolerance


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1e-8, abs(numeric))


def check_gradient(
    fn: Callable[[Tensor], Tensor],
    point: np.ndarray,
    checks: int = DEFAULT_CHECKS,
    step: float = DEFAULT_STEP,
    tolerance: float = DEFAULT_TOLERANCE,
    seed: int = 0,
) -> GradientCheckReport:
    """Compare the tape gradient of fn against central differences.

    The output is reduced to a scalar through a fixed random projection.
    Probes whose perturbations change the branch pattern of any piecewise
    op (leaky ReLU sign, clamp range) are redrawn, since the derivative is
    not defined across a kink.

    Args:
        fn: Function of one tracked tensor, built from numgrad ops.
        point: Where to evaluate, any shape.
        checks: Number of coordinates to compare.
        step: Central-difference step.
        tolerance: Relative error bound for passed.
        seed: Seeds the projection and the coordinate choice.

    Returns:
        A GradientCheckReport.
    """
    rng = np.random.default_rng(seed)
    base = np.asarray(point, dtype=np.float64)

    with float64_mode():
        tape = Tape()
        x = tape.watch(Tensor(base))
        out = fn(x)
        projection = rng.normal(size=out.dims)
        reference = tape.signature()
        analytic = tape.gradient(out, [x], seed=projection)[0].data

        def evaluate(values: np.ndarray) -> tuple[float, tuple[bytes, ...]]:
            local_tape = Tape()
            result = fn(local_tape.watch(Tensor(values)))
            return float((projection * result.data).sum()), local_tape.signature()

        done = skipped = 0
        worst, worst_index = 0.0, None
        max_attempts = checks * 20
        while done < checks and done + skipped < max_attempts:
            index = tuple(int(rng.integers(d)) for d in base.shape)
            plus, minus = base.copy(), base.copy()
            plus[index] += step
            minus[index] -= step
            f_plus, sig_plus = evaluate(plus)
            f_minus, sig_minus = evaluate(minus)
            if sig_plus != reference or sig_minus != reference:
                skipped += 1
                continue
            numeric = (f_plus - f_minus) / (2 * step)
            error = relative_error(float(analytic[index]), numeric)
            if error >= worst:
                worst, worst_index = error, index
            done += 1

    logger.debug("gradient check: %d checks, %d skipped, worst %.3g", done, skipped, worst)
    return GradientCheckReport(done, skipped, worst, worst_index, tolerance)
