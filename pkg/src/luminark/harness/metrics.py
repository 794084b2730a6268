"""Fidelity and accuracy metrics for the evaluation harness.

PSNR and L2-to-nearest-template are desk-scale fidelity proxies; they are not
comparable to FID numbers.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from scipy.stats import norm

from ..core.image import ImageBuffer, as_pixels
from ..errors import LayoutError


def psnr(reference: ImageBuffer, candidate: ImageBuffer) -> float:
    """10 * log10(255^2 / MSE) on the 8-bit quantized images; ``inf`` when identical."""
    if reference.shape != candidate.shape:
        raise LayoutError(f"PSNR needs equal shapes, got {reference.shape} and {candidate.shape}")
    a = reference.to_uint8().astype(np.float64)
    b = candidate.to_uint8().astype(np.float64)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def l2_to_nearest(image: ImageBuffer | np.ndarray, templates: Sequence[ImageBuffer] | np.ndarray) -> float:
    """Root-mean-square pixel distance to the closest template."""
    x = as_pixels(image)
    stack = templates if isinstance(templates, np.ndarray) else np.stack([as_pixels(t) for t in templates])
    if stack.shape[1:] != x.shape:
        raise LayoutError(f"Template shape {stack.shape[1:]} does not match image shape {x.shape}")
    diffs = (stack - x[None]).reshape(stack.shape[0], -1)
    return float(np.sqrt((diffs * diffs).mean(axis=1)).min())


def wilson_interval(successes: float, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    ``successes`` may be fractional when each trial is itself a rate in [0, 1]
    (a key's false-positive fraction over several images). With fewer than two
    trials the interval is the vacuous [0, 1].
    """
    if trials < 2:
        return (0.0, 1.0)
    if not 0 <= successes <= trials:
        raise ValueError(f"successes={successes} outside 0..{trials}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def balanced_accuracy(true_positive_rate: float, true_negative_rate: float) -> float:
    return 0.5 * (true_positive_rate + true_negative_rate)


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (0 for a single value); non-finite values skipped."""
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return (math.nan, math.nan)
    arr = np.asarray(finite, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return (float(arr.mean()), std)
