"""Mirror the image left to right."""

from __future__ import annotations

from typing import Any

import numpy as np

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "horizontal_flip",
    "class": "HorizontalFlipAttack",
    "description": "Horizontal mirror; undone at detection time by flip-OR.",
    "parameters": {},
}


class HorizontalFlipAttack(BaseAttack):
    def get_name(self) -> str:
        return "horizontal_flip"

    def get_description(self) -> str:
        return "Horizontal mirror; undone at detection time by flip-OR."

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        return np.ascontiguousarray(pixels[:, ::-1, :])
