"""k-means color quantization in CIELAB."""

from __future__ import annotations

from typing import Any

import cv2
import numpy as np

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "color_quantization",
    "class": "ColorQuantizationAttack",
    "description": "Reduce to 64 colors with k-means in CIELAB (20 iterations, eps 1.0, 10 attempts).",
    "parameters": {"colors": 64, "max_iter": 20, "epsilon": 1.0, "attempts": 10},
}


class ColorQuantizationAttack(BaseAttack):
    def __init__(self, colors: int = 64, max_iter: int = 20, epsilon: float = 1.0, attempts: int = 10):
        self.colors = int(colors)
        self.max_iter = int(max_iter)
        self.epsilon = float(epsilon)
        self.attempts = int(attempts)

    def get_name(self) -> str:
        return "color_quantization"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"colors": self.colors, "max_iter": self.max_iter, "epsilon": self.epsilon, "attempts": self.attempts}

    def is_stochastic(self) -> bool:
        return True

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        lab = cv2.cvtColor(pixels, cv2.COLOR_RGB2LAB)
        data = np.float32(lab.reshape(-1, 3))
        colors = min(self.colors, data.shape[0])
        if seed is not None:
            # OpenCV's k-means draws its random centers from the global cv RNG
            cv2.setRNGSeed(int(seed) & 0x7FFFFFFF)
        criteria = (cv2.TERM_CRITERIA_EPS + cv2.TERM_CRITERIA_MAX_ITER, self.max_iter, self.epsilon)
        _, labels, centers = cv2.kmeans(data, colors, None, criteria, self.attempts, cv2.KMEANS_RANDOM_CENTERS)
        palette = np.clip(centers, 0, 255).astype(np.uint8)
        quantized = palette[labels.reshape(-1)].reshape(lab.shape)
        return cv2.cvtColor(quantized, cv2.COLOR_LAB2RGB)
