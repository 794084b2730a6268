from .image import ImageBuffer, load_png, resize_to_grid, save_png
from .keys import ChannelWeights, PatchLayout, WatermarkKey, WeightVariant, generate_key, load_key, save_key
from .patterns import (
    BinaryPattern,
    binary_pattern,
    luminance,
    match_count,
    match_rate,
    partition,
    patch_luminances,
    reassemble,
)
from .rng import SplitMix64, derive_seed

__all__ = [
    "BinaryPattern",
    "ChannelWeights",
    "ImageBuffer",
    "PatchLayout",
    "SplitMix64",
    "WatermarkKey",
    "WeightVariant",
    "binary_pattern",
    "derive_seed",
    "generate_key",
    "load_key",
    "load_png",
    "luminance",
    "match_count",
    "match_rate",
    "partition",
    "patch_luminances",
    "reassemble",
    "resize_to_grid",
    "save_key",
    "save_png",
]
