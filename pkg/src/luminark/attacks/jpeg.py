"""JPEG encode/decode round trip through Pillow."""

from __future__ import annotations

import io
from typing import Any

import numpy as np
from PIL import Image

from .base import BaseAttack

ATTACK_INFO: dict[str, Any] = {
    "name": "jpeg",
    "class": "JpegAttack",
    "description": "Baseline JPEG compression at quality 50 (Pillow defaults, 4:2:0 chroma).",
    "parameters": {"quality": 50},
}


class JpegAttack(BaseAttack):
    def __init__(self, quality: int = 50):
        self.quality = int(quality)

    def get_name(self) -> str:
        return "jpeg"

    def get_description(self) -> str:
        return ATTACK_INFO["description"]

    def get_parameters(self) -> dict[str, Any]:
        return {"quality": self.quality}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        buffer = io.BytesIO()
        Image.fromarray(pixels).save(buffer, format="JPEG", quality=self.quality)
        buffer.seek(0)
        with Image.open(buffer) as decoded:
            return np.asarray(decoded.convert("RGB"), dtype=np.uint8).copy()
