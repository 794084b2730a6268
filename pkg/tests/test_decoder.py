import numpy as np
import pytest

from luminark.core.keys import ChannelWeights, PatchLayout, generate_key
from luminark.diffusion.decoder import LinearDecoder, interpolation_matrix
from luminark.errors import LayoutError
from luminark.penalty import penalty_gradient, penalty_value, violation_terms


@pytest.mark.parametrize("mode", ["nearest", "bilinear"])
def test_interpolation_rows_sum_to_one(mode):
    matrix = interpolation_matrix(16, 5, mode)
    assert matrix.shape == (16, 5)
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0)
    assert np.all(matrix >= 0)


def test_nearest_upsampling_repeats_pixels():
    decoder = LinearDecoder.upsampling(PatchLayout(8, 8, 4), 2, "nearest")
    assert decoder.latent_shape == (4, 4, 3)
    z = np.random.default_rng(0).random((4, 4, 3))
    expected = np.repeat(np.repeat(z, 2, axis=0), 2, axis=1)
    np.testing.assert_allclose(decoder.decode(z), expected, atol=1e-15)


def test_nearest_adjoint_sums_blocks():
    decoder = LinearDecoder.upsampling(PatchLayout(8, 8, 4), 2, "nearest")
    g = np.random.default_rng(1).random((8, 8, 3))
    expected = g.reshape(4, 2, 4, 2, 3).sum(axis=(1, 3))
    np.testing.assert_allclose(decoder.adjoint(g), expected, atol=1e-12)


def test_adjoint_identity_for_bilinear_with_mixing():
    rng = np.random.default_rng(2)
    mixing = rng.random((3, 4))
    decoder = LinearDecoder.upsampling(PatchLayout(16, 12, 4), 4, "bilinear", channels=4, mixing=mixing)
    z = rng.standard_normal(decoder.latent_shape)
    g = rng.standard_normal(decoder.output_shape)
    lhs = float(np.sum(decoder.decode(z) * g))
    rhs = float(np.sum(z * decoder.adjoint(g)))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_identity_decoder_passes_arrays_through():
    decoder = LinearDecoder.identity(PatchLayout(8, 8, 4))
    z = np.zeros((8, 8, 3))
    assert decoder.decode(z) is z
    assert decoder.adjoint(z) is z


@pytest.mark.parametrize("mode", ["nearest", "bilinear"])
def test_latent_chain_rule_matches_finite_differences(mode):
    layout = PatchLayout(16, 16, 8)
    key = generate_key(3, layout, ChannelWeights.random(3))
    decoder = LinearDecoder.upsampling(layout, 2, mode)
    rng = np.random.default_rng(4)
    h = 1e-5
    checked = 0
    for _ in range(20):
        z = 0.2 + 0.6 * rng.random(decoder.latent_shape)
        image = decoder.decode(z)
        if np.min(np.abs(violation_terms(image, key, 0.01).terms)) < 1e-4:
            continue
        grad = decoder.adjoint(penalty_gradient(image, key, 0.01))
        for _ in range(10):
            idx = tuple(int(rng.integers(s)) for s in decoder.latent_shape)
            plus, minus = z.copy(), z.copy()
            plus[idx] += h
            minus[idx] -= h
            numeric = (
                penalty_value(decoder.decode(plus), key, 0.01) - penalty_value(decoder.decode(minus), key, 0.01)
            ) / (2 * h)
            assert abs(numeric - grad[idx]) <= 1e-6
            checked += 1
    assert checked > 0


def test_decoder_layout_errors():
    with pytest.raises(LayoutError):
        LinearDecoder.upsampling(PatchLayout(12, 12, 4), 5)
    decoder = LinearDecoder.upsampling(PatchLayout(8, 8, 4), 2)
    with pytest.raises(LayoutError):
        decoder.check_layout(PatchLayout(16, 16, 4))
    with pytest.raises(LayoutError):
        decoder.decode(np.zeros((8, 8, 3)))
