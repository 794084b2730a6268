"""Base interface for image attacks.

Every attack works on the 8-bit RGB representation (H x W x 3 ``uint8``) and
returns an array of the same shape and dtype. Each attack module declares a
module-level ``ATTACK_INFO`` dict (name, class, description, parameters) that
the registry reads during discovery.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..errors import LayoutError


class AttackKind(str, Enum):
    SCALING = "scaling"
    CROPPING = "cropping"
    JPEG = "jpeg"
    MEDIAN_FILTER = "median_filter"
    GAUSSIAN_BLUR = "gaussian_blur"
    COLOR_JITTER = "color_jitter"
    COLOR_QUANTIZATION = "color_quantization"
    GAUSSIAN_NOISE = "gaussian_noise"
    UNSHARP_MASK = "unsharp_mask"
    HORIZONTAL_FLIP = "horizontal_flip"


@dataclass(frozen=True)
class AttackSpec:
    """Which attack to run, optional parameter overrides, and the seed for stochastic kinds."""

    kind: AttackKind
    parameters: dict[str, Any] = field(default_factory=dict)
    rng_seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))


class BaseAttack(ABC):
    """Abstract base class for all attacks."""

    @abstractmethod
    def get_name(self) -> str:
        """Return the attack kind this class implements, e.g. ``"jpeg"``."""
        pass

    @abstractmethod
    def get_description(self) -> str:
        pass

    @abstractmethod
    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        """Attack an H x W x 3 uint8 RGB array.

        Deterministic attacks ignore ``seed``.
        """
        pass

    def get_parameters(self) -> dict[str, Any]:
        """Effective parameter values, for reports."""
        return {}

    def is_stochastic(self) -> bool:
        return False

    def apply(self, pixels: np.ndarray, seed: int | None = None) -> np.ndarray:
        """Validate the input, run ``transform`` and check the output keeps the input's shape."""
        arr = np.asarray(pixels)
        if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 3 or arr.size == 0:
            raise LayoutError(f"Attacks take nonempty H x W x 3 uint8 arrays, got {arr.dtype} {arr.shape}")
        out = self.transform(np.ascontiguousarray(arr), seed)
        if out.shape != arr.shape:
            raise LayoutError(f"Attack '{self.get_name()}' changed the shape {arr.shape} -> {out.shape}")
        return out.astype(np.uint8, copy=False)


def seed_generator(seed: int | None) -> np.random.Generator:
    """numpy Generator for a stochastic attack; ``None`` draws fresh OS entropy."""
    return np.random.default_rng(seed)
