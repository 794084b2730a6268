"""Exact binomial certification: p-values, threshold calibration and detection.

Under the null hypothesis (the image was not watermarked with this key) the
match count is Binomial(N, 1/2), so every p-value here is an exact tail of
that distribution.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Any

from scipy.special import xlogy

from .core.image import ImageBuffer
from .core.keys import WatermarkKey
from .core.patterns import match_count
from .errors import LayoutError, ParameterError, UnachievableFprError

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1


@lru_cache(maxsize=64)
def _tail_ladder(n: int) -> tuple[float, ...]:
    """p_k for k = 0..n, from exact big-integer tail sums.

    Each entry is one integer division, so it is the correctly rounded double
    of the exact rational value.
    """
    denominator = 1 << n
    ladder = [0.0] * (n + 1)
    tail = 0
    coefficient = 1  # C(n, n)
    for k in range(n, -1, -1):
        tail += coefficient
        ladder[k] = tail / denominator
        # C(n, k-1) = C(n, k) * k / (n - k + 1)
        coefficient = coefficient * k // (n - k + 1)
    return tuple(ladder)


def tail_probability(n: int, k: int) -> float:
    """P[Binomial(n, 1/2) >= k] = 2^-n * sum_{i=k}^{n} C(n, i)."""
    if n < 1:
        raise ParameterError(f"Patch count must be positive, got {n}")
    if not 0 <= k <= n:
        raise ParameterError(f"k={k} outside 0..{n}")
    return _tail_ladder(n)[k]


def p_value_ladder(n: int) -> list[tuple[int, float]]:
    """All (k, p_k) pairs for k = 0..n."""
    if n < 1:
        raise ParameterError(f"Patch count must be positive, got {n}")
    return list(enumerate(_tail_ladder(n)))


@dataclass(frozen=True)
class CalibratedThreshold:
    n: int
    target_fpr: float
    k_star: int
    t_match: float
    p_at_k_star: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.n,
            "target_fpr": self.target_fpr,
            "k_star": self.k_star,
            "t_match": self.t_match,
            "p_at_k_star": self.p_at_k_star,
            "schema_version": REPORT_SCHEMA_VERSION,
        }


def calibrate_threshold(n: int, target_fpr: float) -> CalibratedThreshold:
    """Smallest k whose tail probability is at most ``target_fpr``.

    Raises UnachievableFprError when even k = n fails (target below 2^-n).
    """
    if not 0.0 < target_fpr < 1.0:
        raise ParameterError(f"Target fpr must lie in (0, 1), got {target_fpr}")
    if n < 1:
        raise ParameterError(f"Patch count must be positive, got {n}")
    for k, p in enumerate(_tail_ladder(n)):
        if p <= target_fpr:
            threshold = CalibratedThreshold(n=n, target_fpr=target_fpr, k_star=k, t_match=k / n, p_at_k_star=p)
            logger.debug(f"Calibrated N={n} fpr={target_fpr:g}: k*={k} t_match={k / n:.6f} p={p:.3e}")
            return threshold
    raise UnachievableFprError(n, target_fpr)


class FlipCalibration(str, Enum):
    UNION = "union"
    PLAIN = "plain"


def calibrate_for_flip(
    n: int, target_fpr: float, mode: FlipCalibration | str = FlipCalibration.UNION
) -> CalibratedThreshold:
    """Per-branch threshold for flip-OR detection.

    ``union`` calibrates each branch at fpr/2 so the OR of both branches still
    meets ``target_fpr``; ``plain`` reuses ``target_fpr`` per branch, which can
    double the combined false-positive rate.
    """
    mode = FlipCalibration(mode)
    per_branch = target_fpr / 2.0 if mode is FlipCalibration.UNION else target_fpr
    return calibrate_threshold(n, per_branch)


@dataclass(frozen=True)
class DetectionReport:
    match_rate: float
    match_count: int
    threshold: CalibratedThreshold
    p_value: float
    decision: bool
    flip_used: bool = False
    flip_match_rate: float | None = None
    flip_match_count: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "match_rate": self.match_rate,
            "match_count": self.match_count,
            "t_match": self.threshold.t_match,
            "p_value": self.p_value,
            "decision": self.decision,
            "flip_used": self.flip_used,
            "flip_match_rate": self.flip_match_rate,
            "flip_match_count": self.flip_match_count,
        }


def _check_threshold(key: WatermarkKey, threshold: CalibratedThreshold) -> None:
    if threshold.n != key.num_patches:
        raise LayoutError(f"Threshold was calibrated for N={threshold.n} but the key has {key.num_patches} patches")


def detect(image: ImageBuffer, key: WatermarkKey, threshold: CalibratedThreshold) -> DetectionReport:
    """Decision is ``match_rate >= t_match``; the report carries the exact p-value."""
    _check_threshold(key, threshold)
    count = match_count(image, key)
    rate = count / key.num_patches
    return DetectionReport(
        match_rate=rate,
        match_count=count,
        threshold=threshold,
        p_value=tail_probability(key.num_patches, count),
        decision=rate >= threshold.t_match,
    )


def detect_with_flip(image: ImageBuffer, key: WatermarkKey, threshold: CalibratedThreshold) -> DetectionReport:
    """Test the image and its horizontal mirror; the decision is their OR.

    ``match_rate``/``p_value`` describe the unflipped image, the ``flip_*``
    fields the mirrored one.
    """
    plain = detect(image, key, threshold)
    mirrored = detect(image.flip_horizontal(), key, threshold)
    return DetectionReport(
        match_rate=plain.match_rate,
        match_count=plain.match_count,
        threshold=threshold,
        p_value=plain.p_value,
        decision=plain.decision or mirrored.decision,
        flip_used=True,
        flip_match_rate=mirrored.match_rate,
        flip_match_count=mirrored.match_count,
    )


def kl_divergence_from_half(epsilon: float) -> float:
    """D_KL(Bernoulli(1/2 + eps) || Bernoulli(1/2)) with 0 * ln 0 = 0."""
    return float(xlogy(0.5 + epsilon, 1.0 + 2.0 * epsilon) + xlogy(0.5 - epsilon, 1.0 - 2.0 * epsilon))


def kl_tail_bound(n: int, epsilon: float) -> float:
    """Chernoff-Hoeffding bound exp(-N * D_KL(eps)) on P[match rate >= 1/2 + eps]."""
    if n < 1:
        raise ParameterError(f"Patch count must be positive, got {n}")
    if not 0.0 <= epsilon <= 0.5:
        raise ParameterError(f"epsilon must lie in [0, 1/2], got {epsilon}")
    if epsilon == 0.5:
        return math.ldexp(1.0, -n)
    return math.exp(-n * kl_divergence_from_half(epsilon))


def verify_kl_bound(max_n: int = 64) -> dict[str, Any]:
    """Compare every exact tail with its bound for N = 1..max_n and k >= N/2."""
    checked = 0
    violations: list[dict[str, Any]] = []
    worst_ratio = 0.0
    for n in range(1, max_n + 1):
        ladder = _tail_ladder(n)
        for k in range(math.ceil(n / 2), n + 1):
            eps = k / n - 0.5
            bound = kl_tail_bound(n, eps)
            exact = ladder[k]
            checked += 1
            worst_ratio = max(worst_ratio, exact / bound)
            if exact > bound * (1.0 + 1e-12):
                violations.append({"N": n, "k": k, "exact": exact, "bound": bound})
    return {"max_n": max_n, "checked": checked, "violations": violations, "max_exact_to_bound": worst_ratio}

