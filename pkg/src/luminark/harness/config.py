"""Experiment configuration documents for ``luminark eval``."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .. import config as settings
from ..attacks.base import AttackKind
from ..attacks.battery import battery_kinds
from ..certify import FlipCalibration
from ..core.keys import PatchLayout, WeightVariant
from ..core.rng import MASK64
from ..errors import ParameterError

logger = logging.getLogger(__name__)

STUDIES = ("fpr", "robustness", "ablation")
INJECTION_MODES = ("guided", "posthoc", "projection", "hard_stepwise")
ABLATION_METHODS = ("guided", "hard_stepwise", "projection")


def _default_fpr() -> float:
    return float(settings.get_setting("fpr", 0.01))


def _default_margin() -> float:
    return float(settings.get_setting("margin", 0.0))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to replay a study; embedded verbatim in every report."""

    trials: int = 200
    seed: int = 0
    height: int = 64
    width: int = 64
    patch_size: int = 8
    fpr_target: float = field(default_factory=_default_fpr)
    injection: str = "guided"
    margin: float = field(default_factory=_default_margin)
    attacks: list[str] = field(default_factory=lambda: [k.value for k in battery_kinds()])
    include_flip: bool = True
    flip_or: bool = True
    flip_calibration: str = FlipCalibration.UNION.value
    weight_variant: str = WeightVariant.LUMINANCE.value
    replicates: int = 20
    ablation_methods: list[str] = field(default_factory=lambda: list(ABLATION_METHODS))
    ablation_variants: list[str] = field(default_factory=lambda: [v.value for v in WeightVariant])
    null_images: int = 4
    chunk_size: int = 8192
    templates: int = 8
    template_dir: str | None = None
    template_std: float = 0.05
    steps: int = 32
    sigma_min: float = 0.002
    sigma_max: float = 80.0
    rho: float = 7.0
    guidance_scale: float | None = None
    max_retries: int | None = None
    workers: int | None = None
    studies: list[str] = field(default_factory=lambda: list(STUDIES))

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError(f"trials must be at least 1, got {self.trials}")
        if not 0 <= self.seed <= MASK64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        PatchLayout(self.height, self.width, self.patch_size)
        if not 0.0 < self.fpr_target < 1.0:
            raise ParameterError(f"fpr_target must lie in (0, 1), got {self.fpr_target}")
        if self.injection not in INJECTION_MODES:
            raise ParameterError(f"injection must be one of {', '.join(INJECTION_MODES)}, got {self.injection!r}")
        if not self.margin >= 0:
            raise ParameterError(f"margin must be nonnegative, got {self.margin}")
        for name in self.attacks:
            AttackKind(name)
        FlipCalibration(self.flip_calibration)
        WeightVariant(self.weight_variant)
        for name in self.ablation_variants:
            WeightVariant(name)
        for name in self.ablation_methods:
            if name not in ABLATION_METHODS:
                raise ParameterError(f"Unknown ablation method {name!r}")
        for name in self.studies:
            if name not in STUDIES:
                raise ParameterError(f"Unknown study {name!r}")
        if self.replicates < 1 or self.null_images < 1 or self.chunk_size < 1 or self.templates < 1:
            raise ParameterError("replicates, null_images, chunk_size and templates must be positive")
        if self.guidance_scale is not None and not self.guidance_scale >= 0:
            raise ParameterError(f"guidance_scale must be nonnegative, got {self.guidance_scale}")

    @property
    def layout(self) -> PatchLayout:
        return PatchLayout(self.height, self.width, self.patch_size)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Build from a JSON object; unknown keys and invalid values raise ParameterError."""
        if not isinstance(data, dict):
            raise ParameterError("Experiment config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"Unknown experiment config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except ParameterError:
            raise
        except (TypeError, ValueError) as e:
            raise ParameterError(f"Invalid experiment config: {e}") from e

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as e:
        raise ParameterError(f"Cannot read experiment config {p}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        raise ParameterError(f"Experiment config {p} is not valid JSON: {e.msg}") from e
    cfg = ExperimentConfig.from_dict(data)
    logger.debug(f"Loaded experiment config from {p}")
    return cfg
