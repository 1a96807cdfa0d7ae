"""Tests for configuration system."""

import dataclasses

import pytest
from lowrank_hdx.config import Config, RunConfig


def test_config_defaults(monkeypatch):
    """Test default configuration values."""
    for name in ("HDX_THREADS", "HDX_CAP", "HDX_ENUM_CAP", "HDX_SEED", "HDX_TOL", "HDX_DATABASE_URL", "HDX_REPORT_DIR"):
        monkeypatch.delenv(name, raising=False)
    config = Config()
    assert config.threads == 1
    assert config.cap == 10_000_000
    assert config.enum_cap == 100_000_000
    assert config.seed == 0
    assert config.tol == 1e-9
    assert config.database_url is None
    assert config.report_dir == "hdx-reports"


def test_config_from_environment(monkeypatch):
    """Test configuration from environment variables."""
    monkeypatch.setenv("HDX_THREADS", "4")
    monkeypatch.setenv("HDX_CAP", "5000")
    monkeypatch.setenv("HDX_SEED", "7")
    monkeypatch.setenv("HDX_TOL", "1e-6")
    monkeypatch.setenv("HDX_DATABASE_URL", "sqlite:///runs.db")
    monkeypatch.setenv("HDX_REPORT_DIR", "/tmp/reports")

    config = Config()
    assert config.threads == 4
    assert config.cap == 5000
    assert config.seed == 7
    assert config.tol == 1e-6
    assert config.database_url == "sqlite:///runs.db"
    assert config.report_dir == "/tmp/reports"
    assert "threads=4" in repr(config)


@pytest.mark.parametrize("name", ["HDX_THREADS", "HDX_CAP", "HDX_ENUM_CAP", "HDX_SEED", "HDX_TOL"])
def test_config_invalid_number(monkeypatch, name):
    """Test that a non-numeric value raises ValueError naming the variable."""
    monkeypatch.setenv(name, "not_a_number")

    with pytest.raises(ValueError, match=name):
        Config()


class TestRunConfig:
    """Tests for the per-run configuration."""

    def test_from_config(self, monkeypatch):
        """Test environment defaults are overridden by explicit values only."""
        monkeypatch.setenv("HDX_SEED", "3")
        monkeypatch.setenv("HDX_CAP", "100")
        run = RunConfig.from_config(Config(), seed=None, cap=50, suite="perp")
        assert run.seed == 3
        assert run.cap == 50
        assert run.suite == "perp"

    @pytest.mark.parametrize(
        "field,value",
        [("cap", 0), ("enum_cap", -1), ("tol", 0.0), ("tol", 0.1), ("threads", 0), ("samples", 0)],
    )
    def test_validate_rejects(self, field, value):
        """Test out-of-range values are refused."""
        with pytest.raises(ValueError):
            dataclasses.replace(RunConfig(), **{field: value}).validate()

    def test_validate_returns_self(self):
        """Test validate chains."""
        run = RunConfig()
        assert run.validate() is run

    def test_hash_ignores_output_and_verbosity(self):
        """Test the hash depends on what the run computes, not where it writes."""
        base = RunConfig()
        assert base.config_hash() == RunConfig(out="elsewhere", verbosity=2).config_hash()
        assert base.config_hash() != RunConfig(seed=1).config_hash()
        assert len(base.config_hash()) == 64

    def test_to_json(self):
        """Test every field is serialised."""
        obj = RunConfig(suite="codes").to_json()
        assert obj["suite"] == "codes"
        assert set(obj) == {f.name for f in dataclasses.fields(RunConfig)}
