from .decoder import Interpolation, LinearDecoder, interpolation_matrix
from .prior import MixturePrior, analytic_denoiser
from .sampler import (
    GUIDANCE_LUMINANCE_RATE,
    SampleTrace,
    default_guidance_scale,
    guided_pass,
    sample_guided,
    sample_guided_latent,
    sample_hard_stepwise,
    sample_unguided,
)
from .schedule import NoiseSchedule, build_schedule
from .templates import build_toy_latent_prior, build_toy_prior, generate_templates, procedural_template

__all__ = [
    "GUIDANCE_LUMINANCE_RATE",
    "Interpolation",
    "LinearDecoder",
    "MixturePrior",
    "NoiseSchedule",
    "SampleTrace",
    "analytic_denoiser",
    "build_schedule",
    "build_toy_latent_prior",
    "build_toy_prior",
    "default_guidance_scale",
    "generate_templates",
    "guided_pass",
    "interpolation_matrix",
    "procedural_template",
    "sample_guided",
    "sample_guided_latent",
    "sample_hard_stepwise",
    "sample_unguided",
]
