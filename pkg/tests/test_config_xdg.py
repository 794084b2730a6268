import pytest

from luminark import config


def _write_config(tmp_path, monkeypatch, text):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    cfg_dir = tmp_path / "luminark"
    cfg_dir.mkdir()
    (cfg_dir / "config.toml").write_text(text)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for key in config.get_allowed_keys():
        monkeypatch.delenv(config.ENV_PREFIX + key.upper(), raising=False)


def test_fpr_from_xdg(tmp_path, monkeypatch):
    _write_config(tmp_path, monkeypatch, "fpr = 0.05\n")
    assert config.get_setting("fpr") == 0.05


def test_env_overrides_config(tmp_path, monkeypatch):
    _write_config(tmp_path, monkeypatch, "workers = 2\n")
    monkeypatch.setenv("LUMINARK_WORKERS", "7")
    assert config.get_workers() == 7


def test_code_default_without_file(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    assert config.load_config() == {}
    assert config.get_setting("patch_size") == 64
    assert config.get_setting("max_retries", 5) == 5


def test_effective_value_reports_every_source(tmp_path, monkeypatch):
    _write_config(tmp_path, monkeypatch, "margin = 0.02\n")
    eff = config.get_effective_value("margin")
    assert eff == {"env": None, "config": 0.02, "code_default": 0.0, "effective": 0.02}

    monkeypatch.setenv("LUMINARK_MARGIN", "0.1")
    assert config.get_effective_value("margin")["effective"] == 0.1


def test_unknown_key(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    assert config.get_effective_value("history_depth") is None
    with pytest.raises(KeyError):
        config.get_setting("history_depth")


def test_set_config_value_validates(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    assert config.set_config_value("max_retries", "12")
    assert config.load_config()["max_retries"] == 12
    assert not config.set_config_value("max_retries", 1.5)
    assert not config.set_config_value("fpr", "often")
    assert not config.set_config_value("unknown", 1)


def test_malformed_file_is_ignored(tmp_path, monkeypatch):
    _write_config(tmp_path, monkeypatch, "fpr = [unterminated\n")
    assert config.load_config() == {}
    assert config.get_setting("fpr") == 0.01


def test_invalid_worker_env_falls_back(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    monkeypatch.setenv("LUMINARK_WORKERS", "many")
    assert config.get_workers(3) == 3
