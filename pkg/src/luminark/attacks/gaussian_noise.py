"""Additive Gaussian noise on the 8-bit scale."""

from __future__ import annotations

from typing import Any

import numpy as np

from .base import BaseAttack, seed_generator

ATTACK_INFO: dict[str, Any] = {
    "name": "gaussian_noise",
    "class": "GaussianNoiseAttack",
    "description": "Add N(0, 25^2) noise per component on the 0-255 scale, then clip.",
    "parameters": {"std": 25.0},
}


class GaussianNoiseAttack(BaseAttack):
    def __init__(self, std: float = 25.0):
        self.std = float(std)

    def get_name(self) -> str:
        return "gaussian_noise"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"std": self.std}

    def is_stochastic(self) -> bool:
        return True

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        noise = seed_generator(seed).normal(0.0, self.std, pixels.shape)
        noisy = np.clip(pixels.astype(np.float32) + noise, 0, 255)
        return noisy.astype(np.uint8)
