"""Crop a thin border and resize back."""

from __future__ import annotations

from typing import Any

import cv2
import numpy as np

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "cropping",
    "class": "CroppingAttack",
    "description": "Crop a 2-pixel border, then bilinear resize back to the original size.",
    "parameters": {"border": 2},
}


class CroppingAttack(BaseAttack):
    def __init__(self, border: int = 2):
        self.border = int(border)

    def get_name(self) -> str:
        return "cropping"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"border": self.border}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        b = self.border
        height, width = pixels.shape[:2]
        # images too small to lose the border are returned unchanged
        if b <= 0 or height <= 2 * b or width <= 2 * b:
            return pixels.copy()
        cropped = np.ascontiguousarray(pixels[b:-b, b:-b])
        return cv2.resize(cropped, (width, height), interpolation=cv2.INTER_LINEAR)
