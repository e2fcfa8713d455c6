import logging

import pytest

from chunkpart.config import configure_logging, get_settings, validate_env
from chunkpart.errors import ConfigurationError


@pytest.fixture
def clean_env(monkeypatch):
    for var in ("CHUNKPART_THREADS", "CHUNKPART_BASELINE_CAP", "CHUNKPART_LOG_LEVEL"):
        monkeypatch.delenv(var, raising=False)
    return monkeypatch


def test_defaults(clean_env):
    settings = get_settings()
    assert settings.threads >= 1
    assert settings.baseline_cap == 5000
    assert settings.log_level == "WARNING"


def test_reads_environment(clean_env):
    clean_env.setenv("CHUNKPART_THREADS", "3")
    clean_env.setenv("CHUNKPART_BASELINE_CAP", "120")
    clean_env.setenv("CHUNKPART_LOG_LEVEL", "debug")
    settings = get_settings()
    assert (settings.threads, settings.baseline_cap, settings.log_level) == (3, 120, "debug")


def test_blank_values_fall_back_to_defaults(clean_env):
    clean_env.setenv("CHUNKPART_BASELINE_CAP", "  ")
    assert get_settings().baseline_cap == 5000


@pytest.mark.parametrize(
    "var, value",
    [
        ("CHUNKPART_THREADS", "0"),
        ("CHUNKPART_THREADS", "many"),
        ("CHUNKPART_BASELINE_CAP", "-5"),
        ("CHUNKPART_LOG_LEVEL", "LOUD"),
    ],
)
def test_invalid_values(clean_env, var, value):
    clean_env.setenv(var, value)
    with pytest.raises(ConfigurationError) as e:
        validate_env()
    assert var in str(e.value)


def test_settings_are_cached(clean_env):
    first = get_settings()
    clean_env.setenv("CHUNKPART_THREADS", "2")
    assert get_settings() is first
    validate_env()
    assert get_settings().threads == 2


def test_configure_logging(clean_env):
    configure_logging("info")
    logger = logging.getLogger("chunkpart")
    assert logger.level == logging.INFO
    assert len(logger.handlers) == 1
    assert not logger.propagate


def test_configure_logging_uses_settings(clean_env):
    clean_env.setenv("CHUNKPART_LOG_LEVEL", "ERROR")
    configure_logging()
    assert logging.getLogger("chunkpart").level == logging.ERROR
