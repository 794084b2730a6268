"""Applying attacks to ImageBuffers, singly or as the full robustness battery."""

from __future__ import annotations

import logging

from ..core.image import ImageBuffer
from ..core.rng import derive_seed
from ..managers.attack_registry import AttackRegistry, get_default_registry
from .base import AttackKind, AttackSpec

logger = logging.getLogger(__name__)

_BATTERY = (
    AttackKind.SCALING,
    AttackKind.CROPPING,
    AttackKind.JPEG,
    AttackKind.MEDIAN_FILTER,
    AttackKind.GAUSSIAN_BLUR,
    AttackKind.COLOR_JITTER,
    AttackKind.COLOR_QUANTIZATION,
    AttackKind.GAUSSIAN_NOISE,
    AttackKind.UNSHARP_MASK,
)


def battery_kinds() -> list[AttackKind]:
    """The nine transformations of the robustness battery (flip is handled by flip-OR)."""
    return list(_BATTERY)


def derive_attack_seed(seed: int, kind: AttackKind | str) -> int:
    """Per-kind child seed, fixed by the kind's position in ``AttackKind``."""
    index = list(AttackKind).index(AttackKind(kind))
    return derive_seed(seed, index)


def apply_attack(image: ImageBuffer, spec: AttackSpec, registry: AttackRegistry | None = None) -> ImageBuffer:
    """Run ``spec`` on the 8-bit form of ``image``; the result has the same dimensions."""
    attack = (registry or get_default_registry()).create(spec.kind.value, **spec.parameters)
    seed = spec.rng_seed if attack.is_stochastic() else None
    out = attack.apply(image.to_uint8(), seed)
    logger.debug(f"Applied {spec.kind.value} to {image.width}x{image.height} image")
    return ImageBuffer.from_uint8(out)


def attack_battery(
    image: ImageBuffer, seed: int, kinds: list[AttackKind] | None = None, registry: AttackRegistry | None = None
) -> dict[str, ImageBuffer]:
    """Attacked copies of ``image`` keyed by kind, in battery order."""
    results: dict[str, ImageBuffer] = {}
    for kind in kinds if kinds is not None else battery_kinds():
        kind = AttackKind(kind)
        spec = AttackSpec(kind=kind, rng_seed=derive_attack_seed(seed, kind))
        results[kind.value] = apply_attack(image, spec, registry)
    return results
