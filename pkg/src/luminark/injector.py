"""Image-space watermark injection.

Two paths share the penalty machinery:

* ``inject_posthoc_gd`` descends the hinge penalty directly on an image.
* ``inject_hard_projection`` shifts every violated patch onto its constraint in
  one move (the projection baseline). ``project_state`` is the array-level
  version also used step by step inside the sampler.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core.image import ImageBuffer, as_pixels
from .core.keys import ChannelWeights, PatchLayout, WatermarkKey
from .core.patterns import bits_from_luminances, match_rate, satisfied_mask
from .errors import ParameterError
from .harness.metrics import psnr
from .penalty import gradient_field, penalty_value, violation_terms

logger = logging.getLogger(__name__)

DEFAULT_LUMINANCE_STEP = 0.005
DEFAULT_MAX_ITERATIONS = 200
# added to the projection target so c = -1 patches land strictly below tau
PROJECTION_EPSILON = 1e-9


def default_step_size(
    layout: PatchLayout, weights: ChannelWeights, delta_luminance: float = DEFAULT_LUMINANCE_STEP
) -> float:
    """Step size that moves a violated patch's luminance by ``delta_luminance``.

    One step changes l by eta * |w|^2 / k^2, since the gradient on a violated
    patch is -c * w_ch / k^2 on each of its k^2 pixels.
    """
    k2 = layout.patch_size * layout.patch_size
    return delta_luminance * k2 / weights.squared_norm


@dataclass(frozen=True)
class InjectionConfig:
    step_size: float | None = None
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    margin: float = 0.0
    target_match_rate: float = 1.0
    clamp: bool = True

    def __post_init__(self):
        if self.step_size is not None and not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ParameterError(f"step_size must be positive, got {self.step_size}")
        if self.max_iterations < 0:
            raise ParameterError(f"max_iterations must be nonnegative, got {self.max_iterations}")
        if not math.isfinite(self.margin) or self.margin < 0:
            raise ParameterError(f"margin must be nonnegative, got {self.margin}")
        if not 0.0 < self.target_match_rate <= 1.0:
            raise ParameterError(f"target_match_rate must lie in (0, 1], got {self.target_match_rate}")

    def resolved_step_size(self, key: WatermarkKey) -> float:
        if self.step_size is not None:
            return self.step_size
        return default_step_size(key.layout, key.weights)


@dataclass(frozen=True, eq=False)
class InjectionResult:
    image: ImageBuffer
    iterations_used: int
    final_match_rate: float
    psnr_db: float
    success: bool
    step_size: float = 0.0
    final_penalty: float = 0.0
    satisfied_fraction: float = 0.0
    target_match_rate: float = 1.0
    margin: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "iterations_used": self.iterations_used,
            "final_match_rate": self.final_match_rate,
            "psnr_db": self.psnr_db,
            "success": self.success,
            "step_size": self.step_size,
            "final_penalty": self.final_penalty,
            "satisfied_fraction": self.satisfied_fraction,
            "target_match_rate": self.target_match_rate,
            "margin": self.margin,
        }


def inject_posthoc_gd(image: ImageBuffer, key: WatermarkKey, cfg: InjectionConfig | None = None) -> InjectionResult:
    """Descend x <- clamp(x - eta * grad Penalty(x, margin)) until enough patches hold.

    A patch counts once it matches the key with luminance slack >= margin. The
    loop stops when that fraction reaches ``target_match_rate`` or after
    ``max_iterations``; failure is reported in the result, never raised.
    """
    cfg = cfg or InjectionConfig()
    key.layout.check_shape(image.height, image.width)
    eta = cfg.resolved_step_size(key)
    x = np.array(image.pixels, dtype=np.float64, copy=True)

    iterations = 0
    satisfied = satisfied_mask(x, key, cfg.margin)
    fraction = int(np.count_nonzero(satisfied)) / key.num_patches
    while fraction < cfg.target_match_rate and iterations < cfg.max_iterations:
        # hinge subgradient on every unsatisfied patch, including c = -1 patches sitting exactly on tau
        before = x.copy()
        x -= eta * gradient_field(~satisfied, key)
        if cfg.clamp:
            np.clip(x, 0.0, 1.0, out=x)
        iterations += 1
        satisfied = satisfied_mask(x, key, cfg.margin)
        fraction = int(np.count_nonzero(satisfied)) / key.num_patches
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"gd iteration {iterations}: satisfied={fraction:.4f}")
        if np.array_equal(x, before):
            logger.debug("gd stalled: every unsatisfied patch is pinned at the clamp bounds")
            break

    out = ImageBuffer(x)
    success = fraction >= cfg.target_match_rate
    result = InjectionResult(
        image=out,
        iterations_used=iterations,
        final_match_rate=match_rate(out, key),
        psnr_db=psnr(image, out),
        success=success,
        step_size=eta,
        final_penalty=penalty_value(out, key, cfg.margin),
        satisfied_fraction=fraction,
        target_match_rate=cfg.target_match_rate,
        margin=cfg.margin,
    )
    if success:
        logger.info(f"Injection converged in {iterations} iterations (PSNR {result.psnr_db:.2f} dB)")
    else:
        logger.warning(
            f"Injection did not converge after {iterations} iterations "
            f"(satisfied {fraction:.4f} < target {cfg.target_match_rate:.4f})"
        )
    return result


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    """Projected pixels plus which patches were moved and which hit the [0, 1] box."""

    pixels: np.ndarray
    projected: list[int] = field(default_factory=list)
    clamp_bound: list[int] = field(default_factory=list)

    @property
    def image(self) -> ImageBuffer:
        return ImageBuffer(self.pixels)


def project_state(
    pixels: ImageBuffer | np.ndarray,
    key: WatermarkKey,
    margin: float = 0.0,
    percentage: float = 1.0,
    clamp: bool = True,
) -> ProjectionResult:
    """Shift violated patches uniformly so each lands on its constraint (plus margin).

    Each selected patch i gets c_i * (hinge_i + eps) / (w_r + w_g + w_b) added to
    every channel of every pixel. ``percentage`` enforces only that fraction of
    the violated patches, largest violations first.
    """
    if not 0.0 < percentage <= 1.0:
        raise ParameterError(f"percentage must lie in (0, 1], got {percentage}")
    x = np.array(as_pixels(pixels), dtype=np.float64, copy=True)
    vt = violation_terms(x, key, margin)
    mismatched = bits_from_luminances(vt.luminance, key.tau) != key.c
    candidates = np.flatnonzero(vt.violated | mismatched)
    if candidates.size:
        order = candidates[np.argsort(-vt.terms[candidates], kind="stable")]
        count = math.ceil(percentage * candidates.size)
        chosen = np.sort(order[:count])
    else:
        chosen = candidates

    layout = key.layout
    k = layout.patch_size
    shifts = np.zeros(layout.num_patches, dtype=np.float64)
    shifts[chosen] = vt.c[chosen] * (np.maximum(vt.terms[chosen], 0.0) + PROJECTION_EPSILON) / key.weights.total
    per_pixel = np.repeat(np.repeat(shifts.reshape(layout.rows, layout.cols), k, axis=0), k, axis=1)
    x += per_pixel[:, :, None]

    clamp_bound: list[int] = []
    if clamp:
        outside = (x < 0.0) | (x > 1.0)
        touched = outside.reshape(layout.rows, k, layout.cols, k, 3).any(axis=(1, 3, 4)).reshape(-1)
        moved = np.zeros(layout.num_patches, dtype=bool)
        moved[chosen] = True
        clamp_bound = [int(i) for i in np.flatnonzero(touched & moved)]
        np.clip(x, 0.0, 1.0, out=x)

    return ProjectionResult(pixels=x, projected=[int(i) for i in chosen], clamp_bound=clamp_bound)


def inject_hard_projection(
    image: ImageBuffer, key: WatermarkKey, margin: float = 0.0, percentage: float = 1.0
) -> ProjectionResult:
    """Post-hoc projection baseline: project every violated patch, then clamp to [0, 1]."""
    key.layout.check_shape(image.height, image.width)
    result = project_state(image, key, margin=margin, percentage=percentage, clamp=True)
    if result.clamp_bound:
        logger.warning(f"{len(result.clamp_bound)} projected patches hit the [0, 1] bound; they may stay violated")
    logger.debug(f"Projected {len(result.projected)} of {key.num_patches} patches")
    return result
