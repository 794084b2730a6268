"""Render a watermark key as a patch grid.

Each cell is filled with the gray level of tau_i and carries a plus or minus
glyph for c_i. When an image is supplied the glyph is green for patches that
satisfy their constraint and red for violated ones; otherwise it is drawn in
whichever of black/white contrasts with the cell.
"""

from __future__ import annotations

import io
import logging
from pathlib import Path

from PIL import Image, ImageDraw

from .core.image import ImageBuffer
from .core.keys import WatermarkKey
from .errors import ParameterError
from .penalty import violation_terms
from .utils.fileio import atomic_write_bytes

logger = logging.getLogger(__name__)

SATISFIED_COLOR = (0, 170, 0)
VIOLATED_COLOR = (220, 0, 0)
GRID_COLOR = (96, 96, 96)
DEFAULT_CELL = 24


def render_key_grid(
    key: WatermarkKey, image: ImageBuffer | None = None, cell: int = DEFAULT_CELL, margin: float = 0.0
) -> Image.Image:
    if cell < 8:
        raise ParameterError(f"cell must be at least 8 pixels, got {cell}")
    layout = key.layout
    violated = None
    if image is not None:
        layout.check_shape(image.height, image.width)
        violated = violation_terms(image, key, margin).violated

    canvas = Image.new("RGB", (layout.cols * cell + 1, layout.rows * cell + 1), GRID_COLOR)
    draw = ImageDraw.Draw(canvas)
    arm = max(2, cell // 4)
    stroke = max(1, cell // 12)
    for i in range(layout.num_patches):
        r, c = divmod(i, layout.cols)
        x0, y0 = c * cell, r * cell
        gray = int(round(float(key.tau[i]) * 255))
        draw.rectangle([x0 + 1, y0 + 1, x0 + cell - 1, y0 + cell - 1], fill=(gray, gray, gray))

        if violated is None:
            color = (0, 0, 0) if gray >= 128 else (255, 255, 255)
        else:
            color = VIOLATED_COLOR if violated[i] else SATISFIED_COLOR
        cx, cy = x0 + cell // 2, y0 + cell // 2
        draw.line([cx - arm, cy, cx + arm, cy], fill=color, width=stroke)
        if key.c[i] > 0:
            draw.line([cx, cy - arm, cx, cy + arm], fill=color, width=stroke)
    return canvas


def save_key_grid(
    key: WatermarkKey,
    path: str | Path,
    image: ImageBuffer | None = None,
    cell: int = DEFAULT_CELL,
    margin: float = 0.0,
) -> Path:
    canvas = render_key_grid(key, image, cell, margin)
    buffer = io.BytesIO()
    canvas.save(buffer, format="PNG")
    logger.debug(f"Rendered {key.layout.rows}x{key.layout.cols} key grid at {cell}px per cell")
    return atomic_write_bytes(path, buffer.getvalue())
