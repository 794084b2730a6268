"""Euler ODE sampling with watermark guidance.

Every sampler runs the same pass: start from sigma_max * N(0, I) drawn from a
SplitMix64 stream, then for t = 0..T-1

    x <- x - [(x - D(x, sigma_t)) / sigma_t + s_t * grad Penalty(DEC(x))] * (sigma_t - sigma_{t+1})

where the guidance term is skipped entirely when s_t is 0 or the step is
masked out, so an unguided pass and a zero-scale guided pass perform the same
floating-point operations. Guided sampling restarts with seed + r until the
emitted image reaches the calibrated match threshold or the retry cap is hit.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .. import config
from ..certify import CalibratedThreshold
from ..core.image import ImageBuffer
from ..core.keys import WatermarkKey
from ..core.patterns import match_rate, patch_luminances
from ..core.rng import MASK64, SplitMix64
from ..errors import LayoutError, ParameterError
from ..injector import inject_hard_projection, project_state
from ..penalty import penalty_gradient
from .decoder import LinearDecoder
from .prior import MixturePrior
from .schedule import NoiseSchedule

logger = logging.getLogger(__name__)

DEFAULT_MAX_RETRIES = 64
# patch-luminance change per unit of sigma that guidance applies to a violated patch
GUIDANCE_LUMINANCE_RATE = 8.0


@dataclass(frozen=True, eq=False)
class PassResult:
    """One sampler pass: final (unclamped) state plus optional per-step states."""

    state: np.ndarray
    states: list[np.ndarray] = field(default_factory=list)


@dataclass(frozen=True)
class AttemptRecord:
    seed: int
    match_rate: float


@dataclass(frozen=True, eq=False)
class SampleTrace:
    seed: int
    schedule: NoiseSchedule
    guidance_scale: float
    retries: int
    image: ImageBuffer
    match_rate: float
    success: bool
    t_match: float
    margin: float = 0.0
    attempts: list[AttemptRecord] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    latent: np.ndarray | None = None
    sampler: str = "guided"

    def __post_init__(self):
        if self.retries < 1:
            raise ParameterError(f"retries must be at least 1, got {self.retries}")

    @property
    def accepted_seed(self) -> int:
        return self.attempts[-1].seed if self.attempts else self.seed

    def to_dict(self) -> dict[str, Any]:
        return {
            "sampler": self.sampler,
            "seed": self.seed,
            "accepted_seed": self.accepted_seed,
            "guidance_scale": self.guidance_scale,
            "margin": self.margin,
            "retries": self.retries,
            "success": self.success,
            "match_rate": self.match_rate,
            "t_match": self.t_match,
            "attempts": [{"seed": a.seed, "match_rate": a.match_rate} for a in self.attempts],
            "schedule": self.schedule.to_dict(),
        }


def initial_state(seed: int, schedule: NoiseSchedule, shape: tuple[int, ...]) -> np.ndarray:
    """x_T ~ N(0, sigma_max^2 I) from the SplitMix64 stream of ``seed``."""
    count = int(np.prod(shape))
    return schedule.sigmas[0] * SplitMix64(seed).normal(count).reshape(shape)


def _check_step_vector(values: Sequence[Any] | None, schedule: NoiseSchedule, name: str) -> None:
    if values is not None and len(values) != schedule.steps:
        raise ParameterError(f"{name} has {len(values)} entries for a {schedule.steps}-step schedule")


def guided_pass(
    seed: int,
    schedule: NoiseSchedule,
    prior: MixturePrior,
    key: WatermarkKey | None = None,
    scale: float = 0.0,
    decoder: LinearDecoder | None = None,
    margin: float = 0.0,
    step_mask: Sequence[bool] | None = None,
    scale_schedule: Sequence[float] | None = None,
    record_states: bool = False,
) -> PassResult:
    """One full Euler pass (no retries).

    ``scale_schedule`` replaces the constant ``scale`` with a per-step s_t and
    ``step_mask`` restricts guidance to the selected steps.
    """
    _check_step_vector(step_mask, schedule, "step_mask")
    _check_step_vector(scale_schedule, schedule, "scale_schedule")
    x = initial_state(seed, schedule, prior.shape)
    sigmas = schedule.sigmas
    states: list[np.ndarray] = []
    for t in range(schedule.steps):
        sigma, sigma_next = float(sigmas[t]), float(sigmas[t + 1])
        direction = (x - prior.denoise(x, sigma)) / sigma
        s_t = scale_schedule[t] if scale_schedule is not None else scale
        if key is not None and s_t != 0.0 and (step_mask is None or step_mask[t]):
            image = decoder.decode(x) if decoder is not None else x
            grad = penalty_gradient(image, key, margin)
            if decoder is not None:
                grad = decoder.adjoint(grad)
            direction = direction + s_t * grad
        x = x - direction * (sigma - sigma_next)
        if record_states:
            states.append(x.copy())
    return PassResult(state=x, states=states)


def _emit(state: np.ndarray, decoder: LinearDecoder | None) -> ImageBuffer:
    image = decoder.decode(state) if decoder is not None else state
    return ImageBuffer(np.clip(image, 0.0, 1.0))


def sample_unguided(seed: int, schedule: NoiseSchedule, prior: MixturePrior) -> ImageBuffer:
    return _emit(guided_pass(seed, schedule, prior).state, None)


def default_guidance_scale(
    key: WatermarkKey, decoder: LinearDecoder | None = None, rate: float | None = None
) -> float:
    """Scale s at which guidance moves a violated patch's luminance by ``rate`` per unit sigma.

    The gain of one unit of guidance is measured by pushing the all-violated
    gradient through the decoder and its adjoint; for pixel-space sampling it
    is |w|^2 / k^2.
    """
    if rate is None:
        rate = float(config.get_setting("guidance_rate", GUIDANCE_LUMINANCE_RATE))
    if not (math.isfinite(rate) and rate > 0):
        raise ParameterError(f"guidance rate must be positive, got {rate}")
    layout = key.layout
    k = layout.patch_size
    # materialized: the pixel and identity-decoder paths must reduce identical arrays
    push = np.array(np.broadcast_to(key.weights.as_array() / (k * k), (layout.height, layout.width, 3)))
    if decoder is not None:
        decoder.check_layout(layout)
        push = decoder.decode(decoder.adjoint(push))
    gain = float(np.mean(patch_luminances(push, layout, key.weights)))
    if not gain > 0:
        raise ParameterError("Decoder does not let guidance change patch luminance")
    return rate / gain


def _resolve_retries(max_retries: int | None) -> int:
    if max_retries is None:
        max_retries = int(config.get_setting("max_retries", DEFAULT_MAX_RETRIES))
    if max_retries < 1:
        raise ParameterError(f"max_retries must be at least 1, got {max_retries}")
    return max_retries


def _retry_loop(
    seed: int,
    schedule: NoiseSchedule,
    prior: MixturePrior,
    key: WatermarkKey,
    scale: float,
    threshold: CalibratedThreshold,
    decoder: LinearDecoder | None,
    margin: float,
    step_mask: Sequence[bool] | None,
    scale_schedule: Sequence[float] | None,
    record_states: bool,
    max_retries: int | None,
    sampler: str,
) -> SampleTrace:
    if not (math.isfinite(scale) and scale >= 0):
        raise ParameterError(f"Guidance scale must be nonnegative, got {scale}")
    if threshold.n != key.num_patches:
        raise LayoutError(f"Threshold was calibrated for N={threshold.n} but the key has {key.num_patches} patches")
    cap = _resolve_retries(max_retries)
    attempts: list[AttemptRecord] = []
    for r in range(cap):
        attempt_seed = (seed + r) & MASK64
        result = guided_pass(
            attempt_seed,
            schedule,
            prior,
            key=key,
            scale=scale,
            decoder=decoder,
            margin=margin,
            step_mask=step_mask,
            scale_schedule=scale_schedule,
            record_states=record_states,
        )
        image = _emit(result.state, decoder)
        rate = match_rate(image, key)
        attempts.append(AttemptRecord(seed=attempt_seed, match_rate=rate))
        logger.debug(f"{sampler} attempt {r + 1} (seed {attempt_seed}): match rate {rate:.4f}")
        success = rate >= threshold.t_match
        if success or r == cap - 1:
            break

    if success:
        logger.info(f"{sampler} sample accepted after {len(attempts)} attempt(s), match rate {rate:.4f}")
    else:
        best = max(a.match_rate for a in attempts)
        logger.warning(f"{sampler} sampling exhausted {cap} retries; best match rate {best:.4f}")
    return SampleTrace(
        seed=seed,
        schedule=schedule,
        guidance_scale=scale,
        retries=len(attempts),
        image=image,
        match_rate=rate,
        success=success,
        t_match=threshold.t_match,
        margin=margin,
        attempts=attempts,
        states=result.states,
        latent=result.state if decoder is not None else None,
        sampler=sampler,
    )


def sample_guided(
    seed: int,
    schedule: NoiseSchedule,
    prior: MixturePrior,
    key: WatermarkKey,
    scale: float | None,
    threshold: CalibratedThreshold,
    margin: float = 0.0,
    step_mask: Sequence[bool] | None = None,
    scale_schedule: Sequence[float] | None = None,
    record_states: bool = False,
    max_retries: int | None = None,
) -> SampleTrace:
    """Guided sampling with restarts until the match rate reaches ``threshold``.

    ``scale=None`` uses ``default_guidance_scale(key)``. Exhausting the retry
    cap returns a trace with ``success=False`` (the last attempt's image).
    """
    key.layout.check_shape(*prior.shape[:2])
    if scale is None:
        scale = default_guidance_scale(key)
    return _retry_loop(
        seed,
        schedule,
        prior,
        key,
        float(scale),
        threshold,
        decoder=None,
        margin=margin,
        step_mask=step_mask,
        scale_schedule=scale_schedule,
        record_states=record_states,
        max_retries=max_retries,
        sampler="guided",
    )


def sample_guided_latent(
    seed: int,
    schedule: NoiseSchedule,
    prior: MixturePrior,
    decoder: LinearDecoder,
    key: WatermarkKey,
    scale: float | None,
    threshold: CalibratedThreshold,
    margin: float = 0.0,
    step_mask: Sequence[bool] | None = None,
    scale_schedule: Sequence[float] | None = None,
    record_states: bool = False,
    max_retries: int | None = None,
) -> SampleTrace:
    """Guided sampling in a latent space; the penalty is taken on DEC(z) and pulled back by the adjoint."""
    decoder.check_layout(key.layout)
    if prior.shape != decoder.latent_shape:
        raise LayoutError(f"Prior shape {prior.shape} does not match decoder input {decoder.latent_shape}")
    if scale is None:
        scale = default_guidance_scale(key, decoder)
    return _retry_loop(
        seed,
        schedule,
        prior,
        key,
        float(scale),
        threshold,
        decoder=decoder,
        margin=margin,
        step_mask=step_mask,
        scale_schedule=scale_schedule,
        record_states=record_states,
        max_retries=max_retries,
        sampler="latent",
    )


def sample_hard_stepwise(
    seed: int,
    schedule: NoiseSchedule,
    prior: MixturePrior,
    key: WatermarkKey,
    margin: float = 0.0,
    percentage: float = 1.0,
) -> ImageBuffer:
    """Unguided Euler pass that projects the state onto the constraints after every step.

    Intermediate states are not clamped; the emitted image is clamped and
    projected once more so clamping cannot undo the last projection.
    """
    key.layout.check_shape(*prior.shape[:2])
    x = initial_state(seed, schedule, prior.shape)
    sigmas = schedule.sigmas
    for t in range(schedule.steps):
        sigma, sigma_next = float(sigmas[t]), float(sigmas[t + 1])
        x = x - ((x - prior.denoise(x, sigma)) / sigma) * (sigma - sigma_next)
        x = project_state(x, key, margin=margin, percentage=percentage, clamp=False).pixels
    final = inject_hard_projection(_emit(x, None), key, margin=margin, percentage=percentage)
    logger.debug(f"hard step-wise sample (seed {seed}): match rate {match_rate(final.image, key):.4f}")
    return final.image
