import numpy as np
import pytest

from luminark.certify import calibrate_threshold, detect
from luminark.core.keys import ChannelWeights, PatchLayout, generate_key
from luminark.diffusion.decoder import LinearDecoder
from luminark.diffusion.prior import MixturePrior
from luminark.diffusion.sampler import (
    default_guidance_scale,
    guided_pass,
    initial_state,
    sample_guided,
    sample_guided_latent,
    sample_hard_stepwise,
    sample_unguided,
)
from luminark.diffusion.schedule import build_schedule
from luminark.diffusion.templates import build_toy_latent_prior, build_toy_prior
from luminark.errors import LayoutError, ParameterError

LAYOUT = PatchLayout(32, 32, 8)


@pytest.fixture(scope="module")
def prior():
    return build_toy_prior(4, 32, 32, seed=0)


@pytest.fixture(scope="module")
def schedule():
    return build_schedule(16)


def test_initial_state_is_seeded_gaussian(schedule):
    a = initial_state(5, schedule, (32, 32, 3))
    assert np.array_equal(a, initial_state(5, schedule, (32, 32, 3)))
    assert a.std() == pytest.approx(80.0, rel=0.05)


@pytest.mark.parametrize("seed", range(5))
def test_zero_scale_is_bitwise_unguided(seed, prior, schedule):
    key = generate_key(seed, LAYOUT)
    unguided = guided_pass(seed, schedule, prior).state
    zero = guided_pass(seed, schedule, prior, key=key, scale=0.0).state
    assert np.array_equal(unguided, zero)

    threshold = calibrate_threshold(key.num_patches, 0.05)
    trace = sample_guided(seed, schedule, prior, key, 0.0, threshold, max_retries=1)
    assert trace.image.equals(sample_unguided(seed, schedule, prior))


def test_masked_steps_skip_guidance(prior, schedule):
    key = generate_key(1, LAYOUT)
    masked = guided_pass(3, schedule, prior, key=key, scale=50.0, step_mask=[False] * schedule.steps).state
    assert np.array_equal(masked, guided_pass(3, schedule, prior).state)


def test_single_template_sample_lands_on_template(schedule):
    template = build_toy_prior(1, 32, 32, seed=9).templates[0]
    prior = MixturePrior.from_templates([template])
    image = sample_unguided(11, schedule, prior)
    np.testing.assert_allclose(image.pixels, template, atol=1e-3)


def test_guided_samples_pass_detection(prior, schedule):
    key = generate_key(42, LAYOUT)
    threshold = calibrate_threshold(key.num_patches, 0.05)
    trace = sample_guided(7, schedule, prior, key, None, threshold, margin=0.01, max_retries=8)
    assert trace.success is True
    assert trace.match_rate >= threshold.t_match
    assert detect(trace.image, key, threshold).decision is True
    assert 1 <= trace.retries <= 8
    assert trace.attempts[0].seed == 7
    data = trace.to_dict()
    assert data["sampler"] == "guided"
    assert data["accepted_seed"] == trace.accepted_seed
    assert len(data["schedule"]["sigmas"]) == schedule.steps + 1


def test_retry_cap_exhaustion_is_reported(prior, schedule, caplog):
    key = generate_key(43, LAYOUT)
    threshold = calibrate_threshold(key.num_patches, 1e-4)
    assert threshold.t_match == 1.0
    trace = sample_guided(20, schedule, prior, key, 0.0, threshold, max_retries=3)
    assert trace.success is False
    assert trace.retries == 3
    assert [a.seed for a in trace.attempts] == [20, 21, 22]
    assert "exhausted 3 retries" in caplog.text


def test_identity_latent_trace_is_bitwise_pixel_trace(prior, schedule):
    key = generate_key(44, LAYOUT)
    threshold = calibrate_threshold(key.num_patches, 0.05)
    pixel = sample_guided(2, schedule, prior, key, None, threshold, margin=0.01, max_retries=4)
    latent = sample_guided_latent(
        2, schedule, prior, LinearDecoder.identity(LAYOUT), key, None, threshold, margin=0.01, max_retries=4
    )
    assert latent.image.equals(pixel.image)
    assert latent.retries == pixel.retries
    assert latent.guidance_scale == pixel.guidance_scale
    assert latent.sampler == "latent"


@pytest.mark.parametrize("layout", [LAYOUT, PatchLayout(512, 512, 64)])
def test_identity_decoder_default_scale_equals_pixel_scale(layout):
    key = generate_key(46, layout)
    assert default_guidance_scale(key, LinearDecoder.identity(layout), rate=8.0) == default_guidance_scale(
        key, rate=8.0
    )


def test_latent_sampling_through_upsampler(schedule):
    decoder = LinearDecoder.upsampling(LAYOUT, 2, "bilinear")
    latent_prior = build_toy_latent_prior(4, decoder.latent_shape, seed=0)
    key = generate_key(45, LAYOUT)
    threshold = calibrate_threshold(key.num_patches, 0.05)
    trace = sample_guided_latent(3, schedule, latent_prior, decoder, key, None, threshold, margin=0.01, max_retries=8)
    assert trace.image.shape == (32, 32, 3)
    assert trace.latent is not None and trace.latent.shape == decoder.latent_shape
    assert trace.success is True


def test_record_states(prior, schedule):
    result = guided_pass(1, schedule, prior, record_states=True)
    assert len(result.states) == schedule.steps
    assert np.array_equal(result.states[-1], result.state)


def test_default_scale_tracks_decoder_gain():
    key = generate_key(1, LAYOUT, ChannelWeights.luminance())
    norm = key.weights.squared_norm
    assert default_guidance_scale(key, rate=8.0) == pytest.approx(8.0 * 64 / norm)
    decoder = LinearDecoder.upsampling(LAYOUT, 2, "nearest")
    assert default_guidance_scale(key, decoder, rate=8.0) == pytest.approx(8.0 * 64 / (4 * norm))
    with pytest.raises(ParameterError):
        default_guidance_scale(key, rate=0.0)


def test_sampler_validation(prior, schedule):
    key = generate_key(1, LAYOUT)
    with pytest.raises(LayoutError):
        sample_guided(0, schedule, prior, key, 1.0, calibrate_threshold(8, 0.05))
    with pytest.raises(ParameterError):
        sample_guided(0, schedule, prior, key, -1.0, calibrate_threshold(16, 0.05))
    with pytest.raises(ParameterError):
        guided_pass(0, schedule, prior, key=key, scale=1.0, scale_schedule=[1.0])
    with pytest.raises(LayoutError):
        sample_guided(0, schedule, prior, generate_key(1, PatchLayout(16, 16, 8)), 1.0, calibrate_threshold(4, 0.1))


def test_hard_stepwise_sample_is_detected(prior, schedule):
    key = generate_key(46, LAYOUT)
    image = sample_hard_stepwise(5, schedule, prior, key, margin=0.01)
    assert image.shape == (32, 32, 3)
    assert detect(image, key, calibrate_threshold(key.num_patches, 0.05)).decision is True
