"""Tests for the attack registry."""

from typing import Any

import numpy as np

from luminark.attacks.base import AttackKind, BaseAttack
from luminark.managers.attack_registry import AttackRegistry, list_attack_modules, load_attack_class


class InvertAttack(BaseAttack):
    """Mock attack for testing."""

    def __init__(self, offset: int = 0):
        self.offset = offset

    def get_name(self) -> str:
        return "invert"

    def get_description(self) -> str:
        return "Invert every channel"

    def get_parameters(self) -> dict[str, Any]:
        return {"offset": self.offset}

    def transform(self, pixels: np.ndarray, seed: int | None) -> np.ndarray:
        return 255 - pixels


def test_registry_creation():
    registry = AttackRegistry()
    assert len(registry.get_all_attacks()) == 0


def test_register_attack():
    registry = AttackRegistry()
    attack = InvertAttack()
    registry.register_attack(attack)

    assert registry.get_attack("invert") is attack
    assert registry.get_attack_names() == ["invert"]


def test_duplicate_registration_is_skipped():
    registry = AttackRegistry()
    first = InvertAttack()
    registry.register_attack(first)
    registry.register_attack(InvertAttack())
    assert registry.get_attack("invert") is first
    assert len(registry.get_all_attacks()) == 1


def test_create_with_parameters():
    registry = AttackRegistry()
    registry.register_attack_class(InvertAttack)

    assert registry.create("invert") is registry.get_attack("invert")
    custom = registry.create("invert", offset=3)
    assert isinstance(custom, InvertAttack)
    assert custom.offset == 3


def test_create_unknown_raises_key_error():
    registry = AttackRegistry()
    try:
        registry.create("missing")
    except KeyError:
        pass
    else:
        raise AssertionError("expected KeyError")


def test_unregister_attack():
    registry = AttackRegistry()
    registry.register_attack_class(InvertAttack)

    assert registry.unregister_attack("invert")
    assert not registry.unregister_attack("invert")
    assert len(registry.get_all_attacks()) == 0


def test_clear_registry():
    registry = AttackRegistry()
    registry.register_attack_class(InvertAttack)
    registry.clear()
    assert len(registry.get_all_attacks()) == 0


def test_discover_default_attacks():
    registry = AttackRegistry()
    registry.discover_and_register_default_attacks()

    assert sorted(registry.get_attack_names()) == sorted(k.value for k in AttackKind)


def test_attack_modules_skip_support_modules():
    names = list_attack_modules()
    assert "luminark.attacks.jpeg" in names
    assert "luminark.attacks.base" not in names
    assert "luminark.attacks.battery" not in names


def test_load_attack_class_reads_attack_info():
    cls, info = load_attack_class("luminark.attacks.median_filter")
    assert cls is not None and cls.__name__ == "MedianFilterAttack"
    assert info is not None and info["parameters"] == {"kernel": 11}


def test_load_attack_class_missing_module():
    assert load_attack_class("luminark.attacks.does_not_exist") == (None, None)


def test_attack_info():
    registry = AttackRegistry()
    registry.discover_and_register_default_attacks()

    info = registry.get_attack_info("gaussian_noise")
    assert info is not None
    assert info["stochastic"] is True
    assert info["parameters"] == {"std": 25.0}
    assert info["class_path"] == "luminark.attacks.gaussian_noise.GaussianNoiseAttack"
    assert registry.get_attack_info("missing") is None
