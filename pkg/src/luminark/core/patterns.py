"""Patch statistics: partitioning, luminance, binary patterns and match rates.

All functions accept an ``ImageBuffer`` or a raw H x W x 3 array (the sampler
works on unclamped states). Only patch means matter, so everything below is
invariant to permuting pixels inside a patch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LayoutError
from .image import ImageBuffer, as_pixels
from .keys import ChannelWeights, PatchLayout, WatermarkKey


@dataclass(frozen=True, eq=False)
class BinaryPattern:
    """o(x): one bit in {-1, +1} per patch, row-major."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.array(self.bits, dtype=np.int8, copy=True).reshape(-1)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return int(self.bits.shape[0])


def _grid(image: ImageBuffer | np.ndarray, layout: PatchLayout) -> np.ndarray:
    """View of the pixels as (rows, k, cols, k, 3)."""
    pixels = as_pixels(image)
    layout.check_shape(pixels.shape[0], pixels.shape[1])
    k = layout.patch_size
    return pixels.reshape(layout.rows, k, layout.cols, k, 3)


def partition(image: ImageBuffer | np.ndarray, layout: PatchLayout) -> list[np.ndarray]:
    """Row-major list of k x k x 3 patch views (no copies)."""
    pixels = as_pixels(image)
    layout.check_shape(pixels.shape[0], pixels.shape[1])
    patches = []
    for index in range(layout.num_patches):
        rows, cols = layout.patch_bounds(index)
        patches.append(pixels[rows, cols, :])
    return patches


def reassemble(patches: list[np.ndarray], layout: PatchLayout) -> ImageBuffer:
    """Inverse of ``partition``."""
    if len(patches) != layout.num_patches:
        raise LayoutError(f"Expected {layout.num_patches} patches, got {len(patches)}")
    out = np.empty((layout.height, layout.width, 3), dtype=np.float64)
    k = layout.patch_size
    for index, patch in enumerate(patches):
        if np.shape(patch) != (k, k, 3):
            raise LayoutError(f"Patch {index} has shape {np.shape(patch)}, expected {(k, k, 3)}")
        rows, cols = layout.patch_bounds(index)
        out[rows, cols, :] = patch
    return ImageBuffer(out)


def luminance(patch: np.ndarray, weights: ChannelWeights) -> float:
    """w_r * mean(R) + w_g * mean(G) + w_b * mean(B) over the patch."""
    arr = np.asarray(patch, dtype=np.float64)
    if arr.size == 0:
        raise LayoutError("Cannot take the luminance of an empty patch")
    means = arr.reshape(-1, 3).mean(axis=0)
    return float(means @ weights.as_array())


def channel_means(image: ImageBuffer | np.ndarray, layout: PatchLayout) -> np.ndarray:
    """Per-patch channel means, shape (N, 3), row-major."""
    return _grid(image, layout).mean(axis=(1, 3)).reshape(-1, 3)


def patch_luminances(image: ImageBuffer | np.ndarray, layout: PatchLayout, weights: ChannelWeights) -> np.ndarray:
    """Luminance of every patch, shape (N,), row-major."""
    return channel_means(image, layout) @ weights.as_array()


def key_luminances(image: ImageBuffer | np.ndarray, key: WatermarkKey) -> np.ndarray:
    return patch_luminances(image, key.layout, key.weights)


def bits_from_luminances(lum: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """sgn(l - tau) with sgn(0) = +1."""
    return np.where(lum >= tau, 1, -1).astype(np.int8)


def binary_pattern(image: ImageBuffer | np.ndarray, key: WatermarkKey) -> BinaryPattern:
    return BinaryPattern(bits_from_luminances(key_luminances(image, key), key.tau))


def match_mask(image: ImageBuffer | np.ndarray, key: WatermarkKey) -> np.ndarray:
    """Boolean vector: patch bit equals key bit."""
    return bits_from_luminances(key_luminances(image, key), key.tau) == key.c


def match_count(image: ImageBuffer | np.ndarray, key: WatermarkKey) -> int:
    return int(np.count_nonzero(match_mask(image, key)))


def match_rate(image: ImageBuffer | np.ndarray, key: WatermarkKey) -> float:
    """Fraction of patches whose bit matches the key, in [0, 1]."""
    return match_count(image, key) / key.num_patches


def satisfied_mask(image: ImageBuffer | np.ndarray, key: WatermarkKey, margin: float = 0.0) -> np.ndarray:
    """Boolean vector: patch matches the key with luminance slack at least ``margin``."""
    lum = key_luminances(image, key)
    matched = bits_from_luminances(lum, key.tau) == key.c
    if margin > 0:
        matched &= key.c * (lum - key.tau) >= margin
    return matched


def satisfied_fraction(image: ImageBuffer | np.ndarray, key: WatermarkKey, margin: float = 0.0) -> float:
    """Fraction of patches in ``satisfied_mask``; at margin 0 this equals ``match_rate``."""
    return int(np.count_nonzero(satisfied_mask(image, key, margin))) / key.num_patches
