"""Sharpening with Pillow's unsharp mask."""

from __future__ import annotations

from typing import Any

import numpy as np
from PIL import Image, ImageFilter

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "unsharp_mask",
    "class": "UnsharpMaskAttack",
    "description": "Unsharp mask with radius 5 and strength 300% (default threshold).",
    "parameters": {"radius": 5, "percent": 300},
}


class UnsharpMaskAttack(BaseAttack):
    def __init__(self, radius: float = 5, percent: int = 300):
        self.radius = radius
        self.percent = int(percent)

    def get_name(self) -> str:
        return "unsharp_mask"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"radius": self.radius, "percent": self.percent}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        sharpened = Image.fromarray(pixels).filter(ImageFilter.UnsharpMask(radius=self.radius, percent=self.percent))
        return np.asarray(sharpened, dtype=np.uint8).copy()
