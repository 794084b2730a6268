import numpy as np
import pytest

from luminark.core.image import ImageBuffer
from luminark.core.keys import ChannelWeights, PatchLayout, WatermarkKey
from luminark.errors import LayoutError, ParameterError
from luminark.visualize import SATISFIED_COLOR, VIOLATED_COLOR, render_key_grid, save_key_grid


def _key():
    layout = PatchLayout(16, 32, 8)
    return WatermarkKey(
        layout=layout,
        c=np.array([1, -1, 1, -1, 1, 1, -1, -1]),
        tau=np.array([0.45, 0.5, 0.55, 0.6, 0.4, 0.42, 0.58, 0.5]),
        weights=ChannelWeights.luminance(),
    )


def test_grid_size_and_tau_shading():
    canvas = render_key_grid(_key(), cell=10)
    assert canvas.size == (41, 21)
    pixels = np.asarray(canvas)
    gray = round(0.45 * 255)
    assert tuple(pixels[2, 2]) == (gray, gray, gray)


def test_glyph_colors_follow_constraint_status():
    key = _key()
    image = ImageBuffer.filled(16, 32, (0.7, 0.7, 0.7))
    pixels = np.asarray(render_key_grid(key, image, cell=12))
    # patch 0 wants luminance above 0.45: satisfied; patch 1 wants below 0.5: violated
    assert tuple(pixels[6, 6]) == SATISFIED_COLOR
    assert tuple(pixels[6, 12 + 6]) == VIOLATED_COLOR


def test_minus_glyph_has_no_vertical_stroke():
    pixels = np.asarray(render_key_grid(_key(), cell=24))
    center = 12
    # patch 0 is c=+1: the vertical arm is drawn above the center
    assert tuple(pixels[center - 4, center]) != tuple(pixels[2, 2])
    # patch 1 is c=-1: only the horizontal arm
    assert tuple(pixels[center - 4, 24 + center]) == tuple(pixels[2, 26])


def test_render_validation():
    with pytest.raises(ParameterError):
        render_key_grid(_key(), cell=4)
    with pytest.raises(LayoutError):
        render_key_grid(_key(), ImageBuffer.filled(16, 16, (0.5, 0.5, 0.5)))


def test_save_key_grid(tmp_path):
    path = save_key_grid(_key(), tmp_path / "grid.png")
    assert path.read_bytes().startswith(b"\x89PNG")
