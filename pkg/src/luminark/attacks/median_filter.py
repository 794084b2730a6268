"""Median filtering."""

from __future__ import annotations

from typing import Any

import cv2
import numpy as np

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "median_filter",
    "class": "MedianFilterAttack",
    "description": "Median filter with an 11x11 kernel.",
    "parameters": {"kernel": 11},
}


class MedianFilterAttack(BaseAttack):
    def __init__(self, kernel: int = 11):
        self.kernel = int(kernel)

    def get_name(self) -> str:
        return "median_filter"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"kernel": self.kernel}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        return cv2.medianBlur(pixels, self.kernel)
