"""Hinge penalty over patch-luminance constraints and its closed-form gradient.

    Penalty(x) = sum_i max(0, c_i * (tau_i - l(p_i)) + margin)

l is linear in the pixels, so the gradient is piecewise constant: on a
violated patch every pixel of channel ch gets -c_i * w_ch / k^2. At the kink
(term exactly 0) the zero branch of the max is used.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core.image import ImageBuffer, as_pixels
from .core.keys import WatermarkKey
from .core.patterns import bits_from_luminances, key_luminances
from .errors import ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PenaltyEval:
    value: float
    gradient: np.ndarray
    violated: np.ndarray

    @property
    def num_violated(self) -> int:
        return int(np.count_nonzero(self.violated))


@dataclass(frozen=True, eq=False)
class ViolationTerms:
    """Per-patch view of the constraints (used by ``inspect``)."""

    luminance: np.ndarray
    tau: np.ndarray
    c: np.ndarray
    terms: np.ndarray

    @property
    def violated(self) -> np.ndarray:
        return self.terms > 0.0

    @property
    def slack(self) -> np.ndarray:
        """c_i * (l_i - tau_i): positive when the patch sits on the key's side."""
        return self.c * (self.luminance - self.tau)


def _check_margin(margin: float) -> None:
    if not math.isfinite(margin) or margin < 0:
        raise ParameterError(f"Margin must be a finite nonnegative number, got {margin}")


def violation_terms(image: ImageBuffer | np.ndarray, key: WatermarkKey, margin: float = 0.0) -> ViolationTerms:
    """Hinge arguments c_i * (tau_i - l_i) + margin for every patch."""
    _check_margin(margin)
    lum = key_luminances(image, key)
    c = key.c.astype(np.float64)
    return ViolationTerms(luminance=lum, tau=key.tau, c=c, terms=c * (key.tau - lum) + margin)


def gradient_field(violated: np.ndarray, key: WatermarkKey) -> np.ndarray:
    """Dense H x W x 3 gradient for a given violation mask."""
    layout = key.layout
    k = layout.patch_size
    per_patch = np.where(violated, -key.c.astype(np.float64) / (k * k), 0.0).reshape(layout.rows, layout.cols)
    per_pixel = np.repeat(np.repeat(per_patch, k, axis=0), k, axis=1)
    return per_pixel[:, :, None] * key.weights.as_array()[None, None, :]


def penalty(image: ImageBuffer | np.ndarray, key: WatermarkKey, margin: float = 0.0) -> PenaltyEval:
    """Penalty value, analytic gradient and violation mask.

    The scalar is summed with ``math.fsum`` in patch order, so it does not depend
    on how the per-patch terms were evaluated.
    """
    vt = violation_terms(image, key, margin)
    violated = vt.violated
    value = math.fsum(np.maximum(vt.terms, 0.0).tolist())
    return PenaltyEval(value=value, gradient=gradient_field(violated, key), violated=violated)


def penalty_value(image: ImageBuffer | np.ndarray, key: WatermarkKey, margin: float = 0.0) -> float:
    vt = violation_terms(image, key, margin)
    return math.fsum(np.maximum(vt.terms, 0.0).tolist())


def surrogate_gap(image: ImageBuffer | np.ndarray, key: WatermarkKey) -> tuple[float, int]:
    """(penalty at margin 0, number of patches whose bit disagrees with the key).

    The count is exactly N * (1 - match_rate). It can exceed the number of
    positive hinge terms by the patches with c = -1 and l == tau, which sit on
    the kink yet read as bit +1.
    """
    vt = violation_terms(image, key, 0.0)
    value = math.fsum(np.maximum(vt.terms, 0.0).tolist())
    mismatches = int(np.count_nonzero(bits_from_luminances(vt.luminance, key.tau) != key.c))
    return value, mismatches


def penalty_gradient(pixels: np.ndarray, key: WatermarkKey, margin: float = 0.0) -> np.ndarray:
    """Gradient only, for the sampler inner loop."""
    vt = violation_terms(as_pixels(pixels), key, margin)
    return gradient_field(vt.violated, key)
