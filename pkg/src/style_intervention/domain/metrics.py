"""Image comparison metrics: MSE, region-restricted MSE and SSIM."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import correlate2d

from style_intervention.domain.stylegen.codes import Image, Mask

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 1.0
REGIONS = ("inside", "outside")


class MetricError(ValueError):
    """Exception raised for incompatible or degenerate metric inputs."""


def _pair(a: Image, b: Image) -> tuple[np.ndarray, np.ndarray]:
    x, y = a.numpy(), b.numpy()
    if x.shape != y.shape:
        raise MetricError(f"image dims differ: {x.shape} vs {y.shape}")
    if x.ndim != 3:
        raise MetricError(f"images must be [C, H, W], got {x.shape}")
    return x, y


def mse(a: Image, b: Image) -> float:
    """Mean squared error over all channels and pixels."""
    x, y = _pair(a, b)
    return float(np.mean((x - y) ** 2))


def masked_mse(a: Image, b: Image, mask: Mask, region: str = "outside") -> float:
    """MSE restricted to the pixels inside or outside a binary mask.

    Raises:
        MetricError: If the selected region is empty or dims disagree.
    """
    if region not in REGIONS:
        raise MetricError(f"region must be one of {REGIONS}, got {region}")
    x, y = _pair(a, b)
    m = mask.numpy()
    if m.shape != x.shape[1:]:
        raise MetricError(f"mask dims {m.shape} do not match image {x.shape[1:]}")
    select = m > 0.5 if region == "inside" else m <= 0.5
    if not select.any():
        raise MetricError(f"the {region} region of the mask is empty")
    return float(np.mean(((x - y) ** 2)[:, select]))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    y, x = np.ogrid[-half : half + 1, -half : half + 1]
    window = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return window / window.sum()


def _ssim_channel(x: np.ndarray, y: np.ndarray, window: np.ndarray) -> float:
    c1 = (SSIM_K1 * DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * DYNAMIC_RANGE) ** 2

    def blur(v: np.ndarray) -> np.ndarray:
        return correlate2d(v, window, mode="valid")

    mu_x, mu_y = blur(x), blur(y)
    mu_xy = mu_x * mu_y
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_xy
    ssim_map = ((2 * mu_xy + c1) * (2 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def ssim(a: Image, b: Image) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Computed per channel over valid window positions, then averaged.
    """
    x, y = _pair(a, b)
    if min(x.shape[1:]) < SSIM_WINDOW:
        raise MetricError(f"SSIM needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    window = gaussian_window()
    return float(np.mean([_ssim_channel(x[c], y[c], window) for c in range(x.shape[0])]))


@dataclass(frozen=True)
class MetricsRow:
    """One line of the metrics table comparing an edit to its original."""

    mse: float
    masked_mse_outside: float | None
    masked_mse_inside: float | None
    ssim: float

    def to_dict(self) -> dict[str, float | None]:
        return asdict(self)


def region_mse_or_none(a: Image, b: Image, mask: Mask | None, region: str) -> float | None:
    """masked_mse, or None when there is no mask or the region is empty."""
    if mask is None:
        return None
    inside = mask.numpy() > 0.5
    if not (inside.any() if region == "inside" else (~inside).any()):
        return None
    return masked_mse(a, b, mask, region)


def metrics_row(original: Image, edited: Image, mask: Mask | None = None) -> MetricsRow:
    """Compute every metric for one (original, edited) pair."""
    return MetricsRow(
        mse=mse(original, edited),
        masked_mse_outside=region_mse_or_none(original, edited, mask, "outside"),
        masked_mse_inside=region_mse_or_none(original, edited, mask, "inside"),
        ssim=ssim(original, edited),
    )
