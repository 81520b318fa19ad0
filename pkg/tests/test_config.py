import pytest

from config import Config


def test_defaults(isolated_dirs):
    config = Config()
    assert config.log_level == "INFO"
    assert config.horizon_epochs == 12
    assert config.max_multiplicity == 3
    assert config.sweep_workers == 1
    assert config.max_sweep_instances == 200_000
    assert config.output_dir == str(isolated_dirs / "artifacts")


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LOG_LEVEL", "debug")
    monkeypatch.setenv("HORIZON_EPOCHS", "20")
    monkeypatch.setenv("MAX_SWEEP_INSTANCES", "5000")
    config = Config()
    assert config.log_level == "DEBUG"
    assert config.horizon_epochs == 20
    assert config.max_sweep_instances == 5000


def test_blank_setting_uses_default(monkeypatch):
    monkeypatch.setenv("SWEEP_WORKERS", "  ")
    assert Config().sweep_workers == 1


@pytest.mark.parametrize("name,value", [
    ("HORIZON_EPOCHS", "many"),
    ("MAX_MULTIPLICITY", "0"),
    ("SWEEP_WORKERS", "-2"),
    ("LOG_LEVEL", "LOUD"),
])
def test_bad_settings_raise(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError, match="Configuration errors"):
        Config()


def test_large_multiplicity_only_warns(monkeypatch, capsys):
    monkeypatch.setenv("MAX_MULTIPLICITY", "5")
    assert Config().max_multiplicity == 5
    assert "MAX_MULTIPLICITY" in capsys.readouterr().out


def test_repr():
    text = repr(Config())
    assert text.startswith("Config(log_level='INFO'")
    assert "horizon_epochs=12" in text
