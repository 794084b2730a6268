"""Normalized RGB image buffers and their 8-bit/PNG conversions."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from ..errors import LayoutError
from ..utils.fileio import atomic_write_bytes

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """H x W x 3 float64 image, channel order R, G, B, nominal range [0, 1].

    The pixel array is copied on construction and marked read-only.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise LayoutError(f"Expected an H x W x 3 array, got shape {arr.shape}")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise LayoutError("Image must be nonempty")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.height, self.width, 3)

    @classmethod
    def from_uint8(cls, array: np.ndarray) -> ImageBuffer:
        arr = np.asarray(array)
        if arr.dtype != np.uint8:
            raise LayoutError(f"Expected uint8 pixels, got {arr.dtype}")
        return cls(arr.astype(np.float64) / 255.0)

    @classmethod
    def filled(cls, height: int, width: int, rgb: tuple[float, float, float]) -> ImageBuffer:
        arr = np.empty((height, width, 3), dtype=np.float64)
        arr[...] = np.asarray(rgb, dtype=np.float64)
        return cls(arr)

    def to_uint8(self) -> np.ndarray:
        """Quantize: round(v * 255) clamped to [0, 255]."""
        return np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)

    def clamped(self) -> ImageBuffer:
        return ImageBuffer(np.clip(self.pixels, 0.0, 1.0))

    def quantized(self) -> ImageBuffer:
        """The image as it would be published (8-bit round trip)."""
        return ImageBuffer.from_uint8(self.to_uint8())

    def flip_horizontal(self) -> ImageBuffer:
        return ImageBuffer(self.pixels[:, ::-1, :])

    def equals(self, other: ImageBuffer) -> bool:
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))


def as_pixels(image: ImageBuffer | np.ndarray) -> np.ndarray:
    """Pixel array of an ImageBuffer, or the array itself (raw sampler states)."""
    if isinstance(image, ImageBuffer):
        return image.pixels
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise LayoutError(f"Expected an H x W x 3 array, got shape {arr.shape}")
    return arr


def load_png(path: str | Path) -> ImageBuffer:
    """Load any Pillow-readable image as 8-bit RGB."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.uint8)
    logger.debug(f"Loaded {path} ({arr.shape[1]}x{arr.shape[0]})")
    return ImageBuffer.from_uint8(arr)


def encode_png(image: ImageBuffer) -> bytes:
    buffer = io.BytesIO()
    Image.fromarray(image.to_uint8()).save(buffer, format="PNG")
    return buffer.getvalue()


def save_png(image: ImageBuffer, path: str | Path) -> Path:
    """Write an 8-bit RGB PNG atomically."""
    return atomic_write_bytes(path, encode_png(image))


def nearest_grid_size(size: int, patch_size: int) -> int:
    """Closest positive multiple of ``patch_size`` to ``size`` (ties round up)."""
    lower = (size // patch_size) * patch_size
    upper = lower + patch_size
    if lower == 0 or size - lower >= upper - size:
        return upper
    return lower


def resize_to_grid(image: ImageBuffer, patch_size: int) -> ImageBuffer:
    """Bilinear resize to the nearest size divisible by ``patch_size``.

    Resampling happens on the 8-bit representation (half-pixel centers, no
    antialiasing prefilter). Already-divisible images are returned unchanged.
    """
    height = nearest_grid_size(image.height, patch_size)
    width = nearest_grid_size(image.width, patch_size)
    if (height, width) == (image.height, image.width):
        return image
    logger.info(f"Resizing {image.width}x{image.height} to {width}x{height} to fit a {patch_size}px grid")
    resized = cv2.resize(image.to_uint8(), (width, height), interpolation=cv2.INTER_LINEAR)
    return ImageBuffer.from_uint8(resized)
