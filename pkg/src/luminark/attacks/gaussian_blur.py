"""Gaussian smoothing."""

from __future__ import annotations

from typing import Any

import cv2
import numpy as np

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "gaussian_blur",
    "class": "GaussianBlurAttack",
    "description": "Gaussian blur with a 9x9 kernel and sigma 15 (reflective borders).",
    "parameters": {"kernel": 9, "sigma": 15.0},
}


class GaussianBlurAttack(BaseAttack):
    def __init__(self, kernel: int = 9, sigma: float = 15.0):
        self.kernel = int(kernel)
        self.sigma = float(sigma)

    def get_name(self) -> str:
        return "gaussian_blur"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"kernel": self.kernel, "sigma": self.sigma}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        return cv2.GaussianBlur(pixels, (self.kernel, self.kernel), self.sigma)
