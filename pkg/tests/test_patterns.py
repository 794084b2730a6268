import numpy as np
import pytest

from luminark.core.image import ImageBuffer
from luminark.core.keys import ChannelWeights, PatchLayout, WatermarkKey, generate_key
from luminark.core.patterns import (
    binary_pattern,
    luminance,
    match_count,
    match_rate,
    partition,
    patch_luminances,
    reassemble,
    satisfied_fraction,
)
from luminark.errors import LayoutError

RED_ONLY = ChannelWeights(1.0, 0.0, 0.0)


def _matching_image(key: WatermarkKey, offset: float) -> ImageBuffer:
    """Uniform patches whose red channel sits ``offset`` on the key's side of tau."""
    layout = key.layout
    k = layout.patch_size
    values = (key.tau + offset * key.c).reshape(layout.rows, layout.cols)
    red = np.repeat(np.repeat(values, k, axis=0), k, axis=1)
    pixels = np.zeros((layout.height, layout.width, 3))
    pixels[:, :, 0] = red
    return ImageBuffer(pixels)


def test_partition_then_reassemble_is_identity():
    layout = PatchLayout(24, 16, 8)
    image = ImageBuffer(np.random.default_rng(0).random((24, 16, 3)))
    patches = partition(image, layout)
    assert len(patches) == 6
    assert reassemble(patches, layout).equals(image)


def test_reassemble_validates_patches():
    layout = PatchLayout(16, 16, 8)
    with pytest.raises(LayoutError):
        reassemble([np.zeros((8, 8, 3))] * 3, layout)
    with pytest.raises(LayoutError):
        reassemble([np.zeros((4, 4, 3))] * 4, layout)


def test_luminance_of_uniform_patch():
    patch = np.broadcast_to(np.array([0.2, 0.4, 0.6]), (8, 8, 3))
    assert luminance(patch, ChannelWeights.luminance()) == pytest.approx(0.299 * 0.2 + 0.587 * 0.4 + 0.114 * 0.6)


def test_vectorised_luminances_agree_with_per_patch():
    layout = PatchLayout(32, 32, 8)
    weights = ChannelWeights.random(1)
    image = ImageBuffer(np.random.default_rng(3).random((32, 32, 3)))
    expected = [luminance(p, weights) for p in partition(image, layout)]
    np.testing.assert_allclose(patch_luminances(image, layout, weights), expected, rtol=0, atol=1e-12)


def test_luminance_ignores_pixel_order_within_patch():
    layout = PatchLayout(8, 8, 8)
    pixels = np.random.default_rng(4).random((8, 8, 3))
    shuffled = pixels.reshape(64, 3)[np.random.default_rng(5).permutation(64)].reshape(8, 8, 3)
    weights = ChannelWeights.luminance()
    a = patch_luminances(pixels, layout, weights)[0]
    b = patch_luminances(shuffled, layout, weights)[0]
    assert a == pytest.approx(b, abs=1e-12)


def test_sign_of_zero_is_positive():
    layout = PatchLayout(8, 8, 8)
    key = WatermarkKey(layout=layout, c=np.array([-1]), tau=np.array([0.5]), weights=RED_ONLY)
    image = ImageBuffer.filled(8, 8, (0.5, 0.0, 0.0))
    assert binary_pattern(image, key).bits.tolist() == [1]
    assert match_rate(image, key) == 0.0


def test_match_rate_extremes():
    key = generate_key(11, PatchLayout(32, 32, 8), RED_ONLY)
    assert match_rate(_matching_image(key, 0.05), key) == 1.0
    assert match_count(_matching_image(key, -0.05), key) == 0


def test_satisfied_fraction_respects_margin():
    key = generate_key(12, PatchLayout(32, 32, 8), RED_ONLY)
    image = _matching_image(key, 0.005)
    assert satisfied_fraction(image, key, 0.0) == 1.0
    assert satisfied_fraction(image, key, 0.01) == 0.0
