import importlib
import os
from pathlib import Path
from typing import Any

# Optional TOML libraries (module or None)
tomllib: Any = None
tomlkit: Any = None
tomli_w: Any = None

# tomllib is stdlib in Python 3.11+. Fall back to tomli for older versions.
try:
    tomllib = importlib.import_module("tomllib")
except Exception:  # pragma: no cover - platform dependent
    try:
        tomllib = importlib.import_module("tomli")
    except Exception:
        tomllib = None

try:
    tomlkit = importlib.import_module("tomlkit")
except Exception:
    tomlkit = None

try:
    tomli_w = importlib.import_module("tomli_w")
except Exception:
    tomli_w = None


ENV_PREFIX = "LUMINARK_"

# key -> (type, code default)
_ALLOWED_KEYS: dict[str, tuple[type, Any]] = {
    "workers": (int, 1),
    "fpr": (float, 0.01),
    "margin": (float, 0.0),
    "patch_size": (int, 64),
    "max_retries": (int, 64),
    "guidance_rate": (float, 8.0),
}


def _config_file_path() -> Path:
    xdg = os.getenv("XDG_CONFIG_HOME")
    base = Path(xdg) if xdg else Path.home() / ".config"
    return base / "luminark" / "config.toml"


def load_config() -> dict[str, Any]:
    """Load TOML configuration from the XDG config path. Returns empty dict on error."""
    if tomllib is None:
        return {}
    p = _config_file_path()
    if not p.exists():
        return {}
    try:
        with p.open("rb") as f:
            data = tomllib.load(f)
            if isinstance(data, dict):
                return data
    except Exception:
        return {}
    return {}


def _toml_scalar(val: Any) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, (int, float)):
        return repr(val)
    s = str(val).replace("\\", "\\\\").replace('"', '\\"')
    return '"' + s + '"'


def save_config(cfg: dict[str, Any]) -> bool:
    """Save a flat config dict to the XDG config TOML file.

    Only scalar values (int, float, str, bool) are supported. Returns True on
    success, False otherwise.
    """
    p = _config_file_path()
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        if tomli_w is not None:
            try:
                with p.open("w", encoding="utf8") as f:
                    f.write(tomli_w.dumps(cfg))
                return True
            except Exception:
                pass

        if tomlkit is not None:
            doc = tomlkit.document()
            for k, v in cfg.items():
                doc[k] = v
            with p.open("w", encoding="utf8") as f:
                f.write(tomlkit.dumps(doc))
            return True

        with p.open("w", encoding="utf8") as f:
            for k, v in cfg.items():
                f.write(f"{k} = {_toml_scalar(v)}\n")
        return True
    except Exception:
        return False


def _cast(key: str, value: Any) -> Any:
    """Cast ``value`` to the declared type of ``key``; raises ValueError on failure."""
    expected, _ = _ALLOWED_KEYS[key]
    if expected is int:
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(f"Invalid int value for {key}: {value}")
        return int(value)
    if expected is float:
        return float(value)
    return str(value)


def set_config_value(key: str, value: Any) -> bool:
    """Set a single config key (with validation) and persist it.

    Returns True on success, False on validation or IO errors.
    """
    if key not in _ALLOWED_KEYS:
        return False
    try:
        cast_v = _cast(key, value)
    except (TypeError, ValueError):
        return False

    cfg = load_config() or {}
    cfg[key] = cast_v
    return save_config(cfg)


def get_allowed_keys() -> dict[str, type]:
    return {k: t for k, (t, _) in _ALLOWED_KEYS.items()}


def get_code_default(key: str) -> Any:
    return _ALLOWED_KEYS[key][1] if key in _ALLOWED_KEYS else None


def get_effective_value(key: str, code_default: Any = None) -> dict[str, Any] | None:
    """Return a dict with env/config/code default/effective for a key.

    Precedence is environment ``LUMINARK_<KEY>`` > config file > code default.
    Returns None if key is not allowed.
    """
    if key not in _ALLOWED_KEYS:
        return None

    env = os.getenv(ENV_PREFIX + key.upper())
    cfg_val = (load_config() or {}).get(key)
    eff_default = code_default if code_default is not None else get_code_default(key)

    effective: Any = eff_default
    if env is not None and env != "":
        try:
            effective = _cast(key, env)
        except (TypeError, ValueError):
            effective = env
    elif cfg_val is not None:
        try:
            effective = _cast(key, cfg_val)
        except (TypeError, ValueError):
            effective = eff_default

    return {"env": env, "config": cfg_val, "code_default": eff_default, "effective": effective}


def get_setting(key: str, default: Any = None) -> Any:
    """Effective value for ``key`` (env > config > ``default`` > code default)."""
    eff = get_effective_value(key, code_default=default)
    if eff is None:
        raise KeyError(key)
    return eff["effective"]


def get_workers(default: int = 1) -> int:
    """Harness worker count; LUMINARK_WORKERS overrides the config file."""
    try:
        return max(1, int(get_setting("workers", default)))
    except (TypeError, ValueError):
        return default
