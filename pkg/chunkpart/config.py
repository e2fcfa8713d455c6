import logging
import os
from functools import lru_cache
from typing import Optional

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, Field, ValidationError

from chunkpart.errors import ConfigurationError

# Load .env file
load_dotenv(find_dotenv(usecwd=True))

# Experimental defaults: k is swept from 4 to 128 partitions
DEFAULT_K_MIN = 4
DEFAULT_K_MAX = 128
SCHEMA_VERSION = 1

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_ENV_FIELDS = {
    "threads": "CHUNKPART_THREADS",
    "baseline_cap": "CHUNKPART_BASELINE_CAP",
    "log_level": "CHUNKPART_LOG_LEVEL",
}


class Settings(BaseModel):
    """Process-wide settings read from the environment"""

    threads: int = Field(default=os.cpu_count() or 1, ge=1, description="Worker cap for per-k metric sweeps")
    baseline_cap: int = Field(default=5000, ge=1, description="Edge cap of the baseline greedy ordering")
    log_level: str = Field(default="WARNING", description="Logging level name")


@lru_cache(maxsize=None)
def get_settings() -> Settings:
    values = {}
    for field, var in _ENV_FIELDS.items():
        raw = os.environ.get(var)
        if raw is not None and raw.strip():
            values[field] = raw.strip()
    try:
        settings = Settings(**values)
    except ValidationError as e:
        bad = e.errors()[0]["loc"][0]
        raise ConfigurationError(f"{_ENV_FIELDS[bad]} is invalid: {e.errors()[0]['msg']}") from e
    if not isinstance(logging.getLevelName(settings.log_level.upper()), int):
        raise ConfigurationError(f"CHUNKPART_LOG_LEVEL is not a logging level: {settings.log_level!r}")
    return settings


def validate_env() -> None:
    """Fail early on unusable CHUNKPART_* variables."""
    get_settings.cache_clear()
    get_settings()


def configure_logging(level: Optional[str] = None) -> None:
    name = (level or get_settings().log_level).upper()
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger("chunkpart")
    root.handlers[:] = [handler]
    root.setLevel(name)
    root.propagate = False
