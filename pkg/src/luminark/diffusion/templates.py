"""Procedural low-frequency templates for desk-scale priors."""

from __future__ import annotations

import logging

import numpy as np
from scipy.ndimage import gaussian_filter

from ..core.image import ImageBuffer
from ..errors import ParameterError
from .prior import MixturePrior

logger = logging.getLogger(__name__)

TEMPLATE_LOW = 0.15
TEMPLATE_HIGH = 0.85
# spread used by the toy priors so guidance is not erased at the last steps
TOY_TEMPLATE_STD = 0.05


def procedural_field(
    seed: int, height: int, width: int, channels: int = 3, smoothness: float | None = None
) -> np.ndarray:
    """Smooth random field in [TEMPLATE_LOW, TEMPLATE_HIGH], deterministic per seed.

    White noise is blurred with a periodic Gaussian of width ``smoothness``
    (default: one eighth of the shorter side) and min-max rescaled.
    """
    if height < 1 or width < 1 or channels < 1:
        raise ParameterError(f"Invalid field shape ({height}, {width}, {channels})")
    if smoothness is None:
        smoothness = min(height, width) / 8.0
    if smoothness <= 0:
        raise ParameterError(f"smoothness must be positive, got {smoothness}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((height, width, channels))
    field = gaussian_filter(noise, sigma=(smoothness, smoothness, 0.0), mode="wrap")
    lo, hi = float(field.min()), float(field.max())
    if hi - lo < 1e-12:
        return np.full_like(field, 0.5 * (TEMPLATE_LOW + TEMPLATE_HIGH))
    return TEMPLATE_LOW + (field - lo) * ((TEMPLATE_HIGH - TEMPLATE_LOW) / (hi - lo))


def procedural_template(seed: int, height: int, width: int, smoothness: float | None = None) -> ImageBuffer:
    return ImageBuffer(procedural_field(seed, height, width, 3, smoothness))


def generate_templates(count: int, height: int, width: int, seed: int = 0) -> list[ImageBuffer]:
    if count < 1:
        raise ParameterError(f"count must be positive, got {count}")
    return [procedural_template(seed + j, height, width) for j in range(count)]


def build_toy_prior(
    count: int, height: int, width: int, seed: int = 0, template_std: float = TOY_TEMPLATE_STD
) -> MixturePrior:
    """Equal-weight prior over ``count`` procedural image templates."""
    templates = generate_templates(count, height, width, seed)
    logger.debug(f"Built toy prior: {count} templates at {width}x{height}, std={template_std}")
    return MixturePrior.from_templates(templates, template_std=template_std)


def build_toy_latent_prior(
    count: int, latent_shape: tuple[int, int, int], seed: int = 0, template_std: float = TOY_TEMPLATE_STD
) -> MixturePrior:
    h, w, channels = latent_shape
    fields = [procedural_field(seed + j, h, w, channels) for j in range(count)]
    return MixturePrior.from_templates(fields, template_std=template_std)
