"""Downscale to a fixed size and bilinearly scale back."""

from __future__ import annotations

from typing import Any

import cv2
import numpy as np

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "scaling",
    "class": "ScalingAttack",
    "description": "Bilinear downscale to 96x96, then back to the original size.",
    "parameters": {"size": 96},
}


class ScalingAttack(BaseAttack):
    def __init__(self, size: int = 96):
        self.size = int(size)

    def get_name(self) -> str:
        return "scaling"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"size": self.size}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        original_size = (pixels.shape[1], pixels.shape[0])
        downscaled = cv2.resize(pixels, (self.size, self.size), interpolation=cv2.INTER_LINEAR)
        return cv2.resize(downscaled, original_size, interpolation=cv2.INTER_LINEAR)
