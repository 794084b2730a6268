"""Mixture-of-templates prior with an exact posterior-mean denoiser."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import softmax

from ..core.image import ImageBuffer, as_pixels, load_png
from ..errors import LayoutError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MixturePrior:
    """Mixture of isotropic Gaussians N(mu_j, s0^2 I) with weights pi_j.

    With ``template_std`` s0 = 0 every component is a point mass on its
    template. Templates may have any shape (image or latent), all equal.
    """

    templates: np.ndarray
    weights: np.ndarray
    template_std: float = 0.0

    def __post_init__(self):
        templates = np.array(self.templates, dtype=np.float64, copy=True)
        if templates.ndim < 2 or templates.shape[0] < 1:
            raise ParameterError("A prior needs at least one template")
        weights = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if weights.shape[0] != templates.shape[0]:
            raise ParameterError(f"{weights.shape[0]} weights for {templates.shape[0]} templates")
        if not np.all(weights > 0) or not np.all(np.isfinite(weights)):
            raise ParameterError("Mixture weights must be positive")
        weights = weights / weights.sum()
        if not self.template_std >= 0:
            raise ParameterError(f"template_std must be nonnegative, got {self.template_std}")
        templates.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "templates", templates)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "template_std", float(self.template_std))

    @classmethod
    def from_templates(
        cls,
        templates: Sequence[ImageBuffer | np.ndarray],
        weights: Sequence[float] | None = None,
        template_std: float = 0.0,
    ) -> MixturePrior:
        stack = np.stack([as_pixels(t) if isinstance(t, ImageBuffer) else np.asarray(t) for t in templates])
        w = np.ones(stack.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(templates=stack, weights=w, template_std=template_std)

    @classmethod
    def from_directory(cls, directory: str | Path, template_std: float = 0.0) -> MixturePrior:
        """Equal-weight prior over every PNG in ``directory`` (sorted by name)."""
        paths = sorted(Path(directory).glob("*.png"))
        if not paths:
            raise ParameterError(f"No PNG templates found in {directory}")
        images = [load_png(p) for p in paths]
        shapes = {im.shape for im in images}
        if len(shapes) != 1:
            raise LayoutError(f"Templates in {directory} have differing shapes: {sorted(shapes)}")
        logger.info(f"Loaded {len(images)} templates from {directory}")
        return cls.from_templates(images, template_std=template_std)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.templates.shape[1:])

    @property
    def count(self) -> int:
        return int(self.templates.shape[0])

    def responsibilities(self, x: np.ndarray, sigma: float) -> np.ndarray:
        """Posterior component probabilities given the noisy state ``x``."""
        variance = sigma * sigma + self.template_std * self.template_std
        flat = self.templates.reshape(self.count, -1)
        diff = flat - np.asarray(x, dtype=np.float64).reshape(1, -1)
        sq = np.einsum("ij,ij->i", diff, diff)
        return softmax(np.log(self.weights) - sq / (2.0 * variance))

    def denoise(self, x: np.ndarray, sigma: float) -> np.ndarray:
        """E[x0 | x_t = x] at noise level ``sigma``."""
        return analytic_denoiser(x, sigma, self)

    def image_templates(self) -> list[ImageBuffer]:
        return [ImageBuffer(t) for t in self.templates]


def analytic_denoiser(x: np.ndarray, sigma: float, prior: MixturePrior) -> np.ndarray:
    """Exact posterior mean under the mixture prior.

    D(x) = sum_j r_j(x) * (s0^2 x + sigma^2 mu_j) / (s0^2 + sigma^2), with
    r = softmax(log pi_j - |x - mu_j|^2 / (2 (sigma^2 + s0^2))). For s0 = 0
    this is the responsibility-weighted average of the templates.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != prior.shape:
        raise LayoutError(f"State shape {x.shape} does not match prior shape {prior.shape}")
    r = prior.responsibilities(x, sigma)
    mean_template = np.tensordot(r, prior.templates, axes=(0, 0))
    s0_sq = prior.template_std * prior.template_std
    if s0_sq == 0.0:
        return mean_template
    sigma_sq = sigma * sigma
    return (s0_sq * x + sigma_sq * mean_template) / (s0_sq + sigma_sq)
