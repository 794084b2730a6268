import numpy as np
import pytest

from luminark.core.image import ImageBuffer
from luminark.core.keys import ChannelWeights, PatchLayout, WatermarkKey, generate_key
from luminark.errors import ParameterError
from luminark.penalty import penalty, penalty_gradient, penalty_value, surrogate_gap, violation_terms


def _random_case(seed: int):
    rng = np.random.default_rng(seed)
    key = generate_key(seed, PatchLayout(16, 16, 8), ChannelWeights.random(seed))
    image = 0.2 + 0.6 * rng.random((16, 16, 3))
    return key, image


def test_gradient_matches_central_differences():
    h = 1e-5
    checked = 0
    for seed in range(40):
        margin = 0.01
        key, image = _random_case(seed)
        if np.min(np.abs(violation_terms(image, key, margin).terms)) < 1e-4:
            continue
        grad = penalty(image, key, margin).gradient
        rng = np.random.default_rng(1000 + seed)
        for _ in range(25):
            idx = (rng.integers(16), rng.integers(16), rng.integers(3))
            plus = image.copy()
            minus = image.copy()
            plus[idx] += h
            minus[idx] -= h
            numeric = (penalty_value(plus, key, margin) - penalty_value(minus, key, margin)) / (2 * h)
            assert abs(numeric - grad[idx]) <= 1e-6
            checked += 1
    assert checked > 0


def test_gradient_sign_on_violated_patch():
    layout = PatchLayout(8, 8, 8)
    key = WatermarkKey(layout=layout, c=np.array([1]), tau=np.array([0.5]), weights=ChannelWeights.luminance())
    image = ImageBuffer.filled(8, 8, (0.3, 0.3, 0.3))
    result = penalty(image, key)
    assert result.num_violated == 1
    assert result.value == pytest.approx(0.2)
    assert np.all(result.gradient < 0)
    assert result.gradient[0, 0, 1] == pytest.approx(-0.587 / 64)


def test_zero_penalty_when_satisfied():
    layout = PatchLayout(8, 8, 8)
    key = WatermarkKey(layout=layout, c=np.array([-1]), tau=np.array([0.5]), weights=ChannelWeights(1.0, 0.0, 0.0))
    image = ImageBuffer.filled(8, 8, (0.4, 0.9, 0.9))
    assert penalty_value(image, key) == 0.0
    assert penalty_value(image, key, margin=0.2) == pytest.approx(0.1)
    assert not np.any(penalty_gradient(image.pixels, key))


def test_kink_uses_zero_branch():
    layout = PatchLayout(8, 8, 8)
    key = WatermarkKey(layout=layout, c=np.array([-1]), tau=np.array([0.5]), weights=ChannelWeights(1.0, 0.0, 0.0))
    image = ImageBuffer.filled(8, 8, (0.5, 0.0, 0.0))
    result = penalty(image, key)
    assert result.value == 0.0
    assert result.num_violated == 0
    assert not np.any(result.gradient)
    # the patch reads as +1 although its hinge term is zero
    assert surrogate_gap(image, key) == (0.0, 1)


def test_slack_and_terms():
    layout = PatchLayout(16, 8, 8)
    key = WatermarkKey(
        layout=layout, c=np.array([1, -1]), tau=np.array([0.5, 0.5]), weights=ChannelWeights(1.0, 0.0, 0.0)
    )
    pixels = np.zeros((16, 8, 3))
    pixels[:8, :, 0] = 0.6
    pixels[8:, :, 0] = 0.6
    vt = violation_terms(pixels, key, 0.0)
    np.testing.assert_allclose(vt.slack, [0.1, -0.1])
    assert vt.violated.tolist() == [False, True]


@pytest.mark.parametrize("margin", [-0.01, float("nan"), float("inf")])
def test_invalid_margin(margin):
    key = generate_key(1, PatchLayout(8, 8, 8))
    with pytest.raises(ParameterError):
        penalty_value(ImageBuffer.filled(8, 8, (0.5, 0.5, 0.5)), key, margin)
