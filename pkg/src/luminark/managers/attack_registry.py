"""Attack registry with discovery of the built-in attack modules."""

from __future__ import annotations

import importlib
import logging
from pathlib import Path
from typing import Any

from ..attacks.base import BaseAttack

logger = logging.getLogger(__name__)

ATTACKS_PACKAGE = "luminark.attacks"
_NON_ATTACK_MODULES = {"__init__", "base", "battery"}


def list_attack_modules() -> list[str]:
    """Importable module names under ``luminark.attacks`` that may hold an attack."""
    pkg_dir = Path(__file__).parent.parent / "attacks"
    if not pkg_dir.exists():
        return []
    return [f"{ATTACKS_PACKAGE}.{p.stem}" for p in sorted(pkg_dir.glob("*.py")) if p.stem not in _NON_ATTACK_MODULES]


def load_attack_class(module_name: str) -> tuple[type[BaseAttack] | None, dict[str, Any] | None]:
    """Resolve ``(class, ATTACK_INFO)`` for a module.

    ``ATTACK_INFO['class']`` is preferred; otherwise the first ``BaseAttack``
    subclass defined in the module is used.
    """
    try:
        mod = importlib.import_module(module_name)
    except Exception as e:
        logger.error(f"Failed to import attack module {module_name}: {e}")
        return None, None

    info = getattr(mod, "ATTACK_INFO", None)
    if not isinstance(info, dict):
        info = None
    cls_name = info.get("class") if info else None
    if cls_name and isinstance(getattr(mod, cls_name, None), type):
        return getattr(mod, cls_name), info
    for attr in dir(mod):
        obj = getattr(mod, attr)
        if isinstance(obj, type) and issubclass(obj, BaseAttack) and obj is not BaseAttack:
            return obj, info
    return None, info


class AttackRegistry:
    """Central registry of attack instances and their classes.

    Instances registered here use their default parameters; ``create`` builds
    a fresh instance when a run overrides parameters.
    """

    def __init__(self):
        self._attacks: dict[str, BaseAttack] = {}
        self._attack_classes: dict[str, type[BaseAttack]] = {}
        self._attack_info: dict[str, dict[str, Any]] = {}

    def register_attack(self, attack: BaseAttack, info: dict[str, Any] | None = None) -> None:
        name = attack.get_name()
        if name in self._attacks:
            logger.warning(f"Attack '{name}' is already registered. Skipping.")
            return
        self._attacks[name] = attack
        self._attack_classes[name] = type(attack)
        if info is not None:
            self._attack_info[name] = info
        logger.debug(f"Registered attack: {name}")

    def register_attack_class(self, attack_class: type[BaseAttack], info: dict[str, Any] | None = None) -> None:
        try:
            self.register_attack(attack_class(), info)
        except Exception as e:
            logger.error(f"Failed to instantiate attack {attack_class.__name__}: {e}")

    def get_attack(self, name: str) -> BaseAttack | None:
        return self._attacks.get(name)

    def create(self, name: str, **parameters: Any) -> BaseAttack:
        """New instance of attack ``name`` with parameter overrides.

        Raises:
            KeyError: If no attack with that name is registered.
        """
        if name not in self._attack_classes:
            raise KeyError(name)
        if not parameters:
            return self._attacks[name]
        return self._attack_classes[name](**parameters)

    def get_all_attacks(self) -> list[BaseAttack]:
        return list(self._attacks.values())

    def get_attack_names(self) -> list[str]:
        return list(self._attacks.keys())

    def get_attack_info(self, name: str) -> dict[str, Any] | None:
        """Serializable metadata for ``name``: ATTACK_INFO plus class path and stochasticity."""
        attack = self._attacks.get(name)
        if attack is None:
            return None
        cls = type(attack)
        info = dict(self._attack_info.get(name, {}))
        info.update(
            {
                "name": name,
                "class_path": f"{cls.__module__}.{cls.__name__}",
                "description": attack.get_description(),
                "parameters": attack.get_parameters(),
                "stochastic": attack.is_stochastic(),
            }
        )
        return info

    def unregister_attack(self, name: str) -> bool:
        if name in self._attacks:
            del self._attacks[name]
            self._attack_classes.pop(name, None)
            self._attack_info.pop(name, None)
            logger.debug(f"Unregistered attack: {name}")
            return True
        return False

    def clear(self) -> None:
        self._attacks.clear()
        self._attack_classes.clear()
        self._attack_info.clear()
        logger.debug("Cleared all attacks from registry")

    def discover_and_register_default_attacks(self) -> None:
        """Register every attack module shipped in ``luminark.attacks``."""
        for module_name in list_attack_modules():
            cls, info = load_attack_class(module_name)
            if cls is None:
                logger.debug(f"No attack class found in {module_name}")
                continue
            self.register_attack_class(cls, info)
        logger.debug(f"Registered {len(self._attacks)} default attacks")


_default_registry: AttackRegistry | None = None


def get_default_registry() -> AttackRegistry:
    """Get or create the global attack registry."""
    global _default_registry
    if _default_registry is None:
        _default_registry = AttackRegistry()
        _default_registry.discover_and_register_default_attacks()
    return _default_registry
