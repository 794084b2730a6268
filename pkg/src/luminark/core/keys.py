"""Watermark keys: patch layout, channel weights, the secret (c, tau) pair, and key files."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import IntervalError, LayoutError, WatermarkKeyError
from ..utils.fileio import atomic_write_text
from .rng import SplitMix64, splitmix64_block, to_unit_float

logger = logging.getLogger(__name__)

KEY_FILE_VERSION = 1
DEFAULT_TAU_LOW = 0.4
DEFAULT_TAU_HIGH = 0.6


@dataclass(frozen=True)
class PatchLayout:
    """Grid of non-overlapping k x k patches, indexed row-major from the top-left."""

    height: int
    width: int
    patch_size: int

    def __post_init__(self):
        if self.patch_size <= 0 or self.height <= 0 or self.width <= 0:
            raise LayoutError(
                f"Layout dimensions must be positive (height={self.height}, width={self.width}, "
                f"patch_size={self.patch_size})"
            )
        if self.height % self.patch_size or self.width % self.patch_size:
            raise LayoutError(
                f"Image size {self.width}x{self.height} is not divisible by patch size {self.patch_size}"
            )

    @property
    def rows(self) -> int:
        return self.height // self.patch_size

    @property
    def cols(self) -> int:
        return self.width // self.patch_size

    @property
    def num_patches(self) -> int:
        return self.rows * self.cols

    def patch_bounds(self, index: int) -> tuple[slice, slice]:
        """Row and column slices of patch ``index`` (0-based, row-major)."""
        if not 0 <= index < self.num_patches:
            raise IndexError(f"Patch index {index} outside 0..{self.num_patches - 1}")
        r, c = divmod(index, self.cols)
        k = self.patch_size
        return slice(r * k, (r + 1) * k), slice(c * k, (c + 1) * k)

    def check_shape(self, height: int, width: int) -> None:
        if (height, width) != (self.height, self.width):
            raise LayoutError(
                f"Image is {width}x{height} but the layout expects {self.width}x{self.height}"
            )


class WeightVariant(str, Enum):
    LUMINANCE = "luminance"
    R = "R"
    G = "G"
    B = "B"
    AVERAGE = "average"
    RANDOM = "random"


@dataclass(frozen=True)
class ChannelWeights:
    w_r: float
    w_g: float
    w_b: float

    def __post_init__(self):
        values = (self.w_r, self.w_g, self.w_b)
        if not all(math.isfinite(v) and v >= 0 for v in values):
            raise WatermarkKeyError(f"Channel weights must be finite and nonnegative, got {values}")
        if not any(v > 0 for v in values):
            raise WatermarkKeyError("Channel weights must not all be zero")

    @classmethod
    def luminance(cls) -> ChannelWeights:
        return cls(0.299, 0.587, 0.114)

    @classmethod
    def random(cls, seed: int) -> ChannelWeights:
        """Uniform point on the 2-simplex: three Exponential(1) draws, normalized."""
        e = SplitMix64(seed).exponential(3)
        total = float(e.sum())
        return cls(float(e[0] / total), float(e[1] / total), float(e[2] / total))

    @classmethod
    def preset(cls, variant: WeightVariant | str, seed: int = 0) -> ChannelWeights:
        v = WeightVariant(variant)
        if v is WeightVariant.LUMINANCE:
            return cls.luminance()
        if v is WeightVariant.R:
            return cls(1.0, 0.0, 0.0)
        if v is WeightVariant.G:
            return cls(0.0, 1.0, 0.0)
        if v is WeightVariant.B:
            return cls(0.0, 0.0, 1.0)
        if v is WeightVariant.AVERAGE:
            return cls(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
        return cls.random(seed)

    def as_array(self) -> np.ndarray:
        return np.array([self.w_r, self.w_g, self.w_b], dtype=np.float64)

    @property
    def total(self) -> float:
        return self.w_r + self.w_g + self.w_b

    @property
    def squared_norm(self) -> float:
        return self.w_r * self.w_r + self.w_g * self.w_g + self.w_b * self.w_b


@dataclass(frozen=True, eq=False)
class WatermarkKey:
    """The provider secret W = (c, tau) with its layout and weights.

    ``seed`` is provenance metadata only; it is not a security primitive.
    """

    layout: PatchLayout
    c: np.ndarray
    tau: np.ndarray
    weights: ChannelWeights
    seed: int = 0

    def __post_init__(self):
        c_raw = np.asarray(self.c).reshape(-1)
        tau = np.array(self.tau, dtype=np.float64, copy=True).reshape(-1)
        n = self.layout.num_patches
        if c_raw.shape[0] != n or tau.shape[0] != n:
            raise WatermarkKeyError(f"Key has {c_raw.shape[0]} signs and {tau.shape[0]} thresholds for {n} patches")
        if not np.all((c_raw == 1) | (c_raw == -1)):
            raise WatermarkKeyError("Key signs must all be -1 or +1")
        c = c_raw.astype(np.int8)
        if not np.all((tau > 0.0) & (tau < 1.0)):
            raise WatermarkKeyError("Key thresholds must lie strictly inside (0, 1)")
        if not 0 <= int(self.seed) <= 0xFFFFFFFFFFFFFFFF:
            raise WatermarkKeyError(f"Seed {self.seed} is not a 64-bit unsigned integer")
        c.setflags(write=False)
        tau.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def num_patches(self) -> int:
        return self.layout.num_patches

    def equals(self, other: WatermarkKey) -> bool:
        return (
            self.layout == other.layout
            and self.weights == other.weights
            and self.seed == other.seed
            and bool(np.array_equal(self.c, other.c))
            and bool(np.array_equal(self.tau, other.tau))
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": KEY_FILE_VERSION,
            "seed": self.seed,
            "height": self.layout.height,
            "width": self.layout.width,
            "patch_size": self.layout.patch_size,
            "weights": [self.weights.w_r, self.weights.w_g, self.weights.w_b],
            "c": [int(v) for v in self.c],
            # json writes the shortest repr, which reads back to the same double
            "tau": [float(t) for t in self.tau],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> WatermarkKey:
        if not isinstance(data, dict):
            raise WatermarkKeyError("Key document must be a JSON object")
        version = data.get("version")
        if version != KEY_FILE_VERSION:
            raise WatermarkKeyError(f"Unsupported key file version: {version!r}")
        try:
            layout = PatchLayout(int(data["height"]), int(data["width"]), int(data["patch_size"]))
            w = [float(v) for v in data["weights"]]
            if len(w) != 3:
                raise WatermarkKeyError("Key weights must have three components")
            c = [int(v) for v in data["c"]]
            tau = [float(v) for v in data["tau"]]
            seed = int(data.get("seed", 0))
        except (KeyError, TypeError) as e:
            raise WatermarkKeyError(f"Malformed key document: {e}") from e
        except LayoutError as e:
            raise WatermarkKeyError(f"Invalid key layout: {e}") from e
        except ValueError as e:
            if isinstance(e, WatermarkKeyError):
                raise
            raise WatermarkKeyError(f"Malformed key document: {e}") from e
        return cls(layout=layout, c=np.array(c), tau=np.array(tau), weights=ChannelWeights(*w), seed=seed)


def draw_key_arrays(
    seeds: int | np.ndarray, n: int, tau_low: float = DEFAULT_TAU_LOW, tau_high: float = DEFAULT_TAU_HIGH
) -> tuple[np.ndarray, np.ndarray]:
    """(c, tau) for one seed (shape (n,)) or a batch of seeds (shape (len(seeds), n)).

    The first n outputs of each stream give the signs (c_i = +1 when the top bit
    is 0), the next n the thresholds (tau_i = low + (high - low) * u).
    """
    if not (0.0 < tau_low < tau_high < 1.0):
        raise IntervalError(f"Need 0 < tau_low < tau_high < 1, got [{tau_low}, {tau_high}]")
    block = splitmix64_block(seeds, 2 * n)
    sign_bits = block[..., :n] >> np.uint64(63)
    c = np.where(sign_bits == 0, 1, -1).astype(np.int8)
    tau = tau_low + (tau_high - tau_low) * to_unit_float(block[..., n:])
    return c, tau


def generate_key(
    seed: int,
    layout: PatchLayout,
    weights: ChannelWeights | None = None,
    tau_low: float = DEFAULT_TAU_LOW,
    tau_high: float = DEFAULT_TAU_HIGH,
) -> WatermarkKey:
    """Draw a key from the SplitMix64 stream seeded by ``seed`` (see ``draw_key_arrays``)."""
    n = layout.num_patches
    c, tau = draw_key_arrays(seed, n, tau_low, tau_high)
    key = WatermarkKey(layout=layout, c=c, tau=tau, weights=weights or ChannelWeights.luminance(), seed=seed)
    logger.debug(f"Generated key with {n} patches from seed {seed}")
    return key


def save_key(key: WatermarkKey, path: str | Path) -> Path:
    """Write the key as a JSON document (atomic)."""
    text = json.dumps(key.to_dict(), indent=2, sort_keys=True) + "\n"
    return atomic_write_text(path, text)


def load_key(path: str | Path) -> WatermarkKey:
    """Read and validate a key file."""
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as e:
        raise WatermarkKeyError(f"Cannot read key file {p}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise WatermarkKeyError(f"Key file {p} is not valid JSON: {e.msg}") from e
    return WatermarkKey.from_dict(data)
