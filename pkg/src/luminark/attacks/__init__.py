"""Image attacks for robustness evaluation."""

from .base import AttackKind, AttackSpec, BaseAttack
from .battery import apply_attack, attack_battery, battery_kinds, derive_attack_seed

__all__ = [
    "AttackKind",
    "AttackSpec",
    "BaseAttack",
    "apply_attack",
    "attack_battery",
    "battery_kinds",
    "derive_attack_seed",
]
