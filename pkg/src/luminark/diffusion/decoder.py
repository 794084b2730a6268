"""Fixed linear latent-to-image decoders.

A decoder is separable: a row interpolation matrix (H x h), a column
interpolation matrix (W x w) and a channel mixing matrix (3 x C), so

    decode(z)[I, J, k] = sum_{i, j, c} R[I, i] * Cm[J, j] * M[k, c] * z[i, j, c]

and the adjoint is the same contraction with every matrix transposed.
Nothing here clamps; only the sampler's final emission does.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..core.keys import PatchLayout
from ..errors import LayoutError, ParameterError


class Interpolation(str, Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"


def interpolation_matrix(size_out: int, size_in: int, mode: Interpolation | str) -> np.ndarray:
    """(size_out, size_in) resampling matrix with half-pixel centers and clamped edges."""
    mode = Interpolation(mode)
    if size_in < 1 or size_out < 1:
        raise ParameterError(f"Invalid resample sizes {size_in} -> {size_out}")
    scale = size_in / size_out
    matrix = np.zeros((size_out, size_in), dtype=np.float64)
    rows = np.arange(size_out)
    if mode is Interpolation.NEAREST:
        src = np.minimum(np.floor((rows + 0.5) * scale).astype(np.int64), size_in - 1)
        matrix[rows, src] = 1.0
        return matrix
    pos = np.clip((rows + 0.5) * scale - 0.5, 0.0, size_in - 1)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, size_in - 1)
    frac = pos - lo
    np.add.at(matrix, (rows, lo), 1.0 - frac)
    np.add.at(matrix, (rows, hi), frac)
    return matrix


@dataclass(frozen=True, eq=False)
class LinearDecoder:
    row_matrix: np.ndarray
    col_matrix: np.ndarray
    mixing: np.ndarray
    is_identity: bool = False

    def __post_init__(self):
        for name in ("row_matrix", "col_matrix", "mixing"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True)
            if arr.ndim != 2:
                raise ParameterError(f"{name} must be two-dimensional, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.mixing.shape[0] != 3:
            raise ParameterError(f"Mixing matrix must have 3 rows, got {self.mixing.shape[0]}")

    @classmethod
    def identity(cls, layout: PatchLayout) -> LinearDecoder:
        return cls(
            row_matrix=np.eye(layout.height),
            col_matrix=np.eye(layout.width),
            mixing=np.eye(3),
            is_identity=True,
        )

    @classmethod
    def upsampling(
        cls,
        layout: PatchLayout,
        factor: int,
        mode: Interpolation | str = Interpolation.NEAREST,
        channels: int = 3,
        mixing: np.ndarray | None = None,
    ) -> LinearDecoder:
        """Decoder from an (H/f, W/f, channels) latent to the layout's image size."""
        if factor < 1 or layout.height % factor or layout.width % factor:
            raise LayoutError(f"Factor {factor} does not divide {layout.height}x{layout.width}")
        if mixing is None:
            if channels != 3:
                raise ParameterError("A mixing matrix is required when the latent does not have 3 channels")
            mixing = np.eye(3)
        h, w = layout.height // factor, layout.width // factor
        return cls(
            row_matrix=interpolation_matrix(layout.height, h, mode),
            col_matrix=interpolation_matrix(layout.width, w, mode),
            mixing=np.asarray(mixing, dtype=np.float64).reshape(3, channels),
        )

    @property
    def latent_shape(self) -> tuple[int, int, int]:
        return (self.row_matrix.shape[1], self.col_matrix.shape[1], self.mixing.shape[1])

    @property
    def output_shape(self) -> tuple[int, int, int]:
        return (self.row_matrix.shape[0], self.col_matrix.shape[0], 3)

    def check_layout(self, layout: PatchLayout) -> None:
        if self.output_shape[:2] != (layout.height, layout.width):
            raise LayoutError(
                f"Decoder emits {self.output_shape[0]}x{self.output_shape[1]} "
                f"but the key expects {layout.height}x{layout.width}"
            )

    def decode(self, z: np.ndarray) -> np.ndarray:
        if self.is_identity:
            return z
        z = np.asarray(z, dtype=np.float64)
        if z.shape != self.latent_shape:
            raise LayoutError(f"Latent shape {z.shape} does not match decoder input {self.latent_shape}")
        return np.einsum("Hh,hwc,Ww,kc->HWk", self.row_matrix, z, self.col_matrix, self.mixing, optimize=True)

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        """Transpose of ``decode`` applied to an image-space array (chain rule for gradients)."""
        if self.is_identity:
            return g
        g = np.asarray(g, dtype=np.float64)
        if g.shape != self.output_shape:
            raise LayoutError(f"Image shape {g.shape} does not match decoder output {self.output_shape}")
        return np.einsum("Hh,HWk,Ww,kc->hwc", self.row_matrix, g, self.col_matrix, self.mixing, optimize=True)
