"""Random HSV scaling followed by a contrast change.

Hue, saturation and value are each multiplied by (1 + U(-f, f)) and clipped
(hue at 179, the others at 255), then Pillow's contrast enhancer applies a
fourth factor. Scaling hue is not a rotation of the color wheel; it is kept
as-is so results line up with the usual robustness battery.
"""

from __future__ import annotations

from typing import Any

import cv2
import numpy as np
from PIL import Image, ImageEnhance

from .base import BaseAttack, seed_generator

ATTACK_INFO: dict[str, Any] = {
    "name": "color_jitter",
    "class": "ColorJitterAttack",
    "description": "Random hue/saturation/brightness and contrast jitter with factor 0.1.",
    "parameters": {"factor": 0.1},
}

HUE_MAX = 179


class ColorJitterAttack(BaseAttack):
    def __init__(self, factor: float = 0.1):
        self.factor = float(factor)

    def get_name(self) -> str:
        return "color_jitter"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"factor": self.factor}

    def is_stochastic(self) -> bool:
        return True

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        hue, sat, val, contrast = 1.0 + seed_generator(seed).uniform(-self.factor, self.factor, size=4)
        hsv = cv2.cvtColor(pixels, cv2.COLOR_RGB2HSV).astype(np.float32)
        hsv[:, :, 0] *= hue
        hsv[:, :, 1] *= sat
        hsv[:, :, 2] *= val
        np.clip(hsv[:, :, 0], 0, HUE_MAX, out=hsv[:, :, 0])
        np.clip(hsv[:, :, 1:], 0, 255, out=hsv[:, :, 1:])
        jittered = cv2.cvtColor(hsv.astype(np.uint8), cv2.COLOR_HSV2RGB)
        enhanced = ImageEnhance.Contrast(Image.fromarray(jittered)).enhance(float(contrast))
        return np.asarray(enhanced, dtype=np.uint8).copy()
