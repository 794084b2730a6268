"""EDM rho-spaced noise levels for the Euler sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ParameterError

DEFAULT_STEPS = 32
DEFAULT_SIGMA_MIN = 0.002
DEFAULT_SIGMA_MAX = 80.0
DEFAULT_RHO = 7.0


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """T noise levels from sigma_max down to sigma_min, then a terminal 0.

    ``sigmas`` has T + 1 entries; Euler step t goes from sigmas[t] to
    sigmas[t + 1], so the last step lands on the clean estimate.
    """

    steps: int
    sigma_min: float
    sigma_max: float
    rho: float
    sigmas: np.ndarray

    @property
    def levels(self) -> np.ndarray:
        """The T positive noise levels (terminal 0 excluded)."""
        return self.sigmas[:-1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "steps": self.steps,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "rho": self.rho,
            "sigmas": [float(s) for s in self.sigmas],
        }


def build_schedule(
    steps: int = DEFAULT_STEPS,
    sigma_min: float = DEFAULT_SIGMA_MIN,
    sigma_max: float = DEFAULT_SIGMA_MAX,
    rho: float = DEFAULT_RHO,
) -> NoiseSchedule:
    """sigma_i = (sigma_max^(1/rho) + i/(T-1) * (sigma_min^(1/rho) - sigma_max^(1/rho)))^rho, i = 0..T-1.

    ``sigmas`` holds T + 1 entries: the T levels ending exactly at sigma_min,
    then a terminal 0. The trailing zero is intentional; the last Euler step
    goes from sigma_min to 0 and so lands on the denoised image.
    """
    if steps < 2:
        raise ParameterError(f"Need at least 2 steps, got {steps}")
    if not (0.0 < sigma_min < sigma_max and math.isfinite(sigma_max)):
        raise ParameterError(f"Need 0 < sigma_min < sigma_max, got ({sigma_min}, {sigma_max})")
    if not (rho > 0 and math.isfinite(rho)):
        raise ParameterError(f"rho must be positive, got {rho}")
    ramp = np.arange(steps, dtype=np.float64) / (steps - 1)
    max_inv_rho = sigma_max ** (1.0 / rho)
    min_inv_rho = sigma_min ** (1.0 / rho)
    levels = (max_inv_rho + ramp * (min_inv_rho - max_inv_rho)) ** rho
    levels[0] = sigma_max
    levels[-1] = sigma_min
    sigmas = np.append(levels, 0.0)
    sigmas.setflags(write=False)
    return NoiseSchedule(steps=steps, sigma_min=sigma_min, sigma_max=sigma_max, rho=rho, sigmas=sigmas)
