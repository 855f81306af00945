"""Configuration management for the clonelab workbench."""

import os
from pathlib import Path
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings

_PACKAGE_DIR = Path(__file__).resolve().parent

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    """Workbench settings loaded from environment variables."""

    # Worker pool
    threads: Optional[int] = None

    # Search budgets
    clone_budget: int = 1_000_000
    enumeration_cap: int = 10_000_000
    batch_size: int = 8192
    verifier_soft_wall_sec: float = 60.0

    # Construction chains
    max_ts_arity: int = 9
    max_gm_arity: int = 9
    verify_constructions: bool = True

    # Fixtures
    fixtures_dir: Path = _PACKAGE_DIR / "data" / "fixtures"

    # Logging
    log_level: str = "WARNING"
    log_json: bool = True

    # HTTP service
    host: str = "127.0.0.1"
    port: int = 8080
    rate_limit_verify_per_min: int = 10

    model_config = {
        "env_file": ".env",
        "case_sensitive": False,
        "env_prefix": "CLONELAB_",
        "extra": "ignore",
    }

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("threads must be at least 1")
        return v

    @field_validator("clone_budget", "enumeration_cap", "batch_size")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("budgets must be positive")
        return v

    @field_validator("max_ts_arity")
    @classmethod
    def validate_ts_arity(cls, v: int) -> int:
        if v < 2:
            raise ValueError("max_ts_arity must be at least 2")
        return v

    @field_validator("max_gm_arity")
    @classmethod
    def validate_gm_arity(cls, v: int) -> int:
        if v < 3 or v % 2 == 0:
            raise ValueError("max_gm_arity must be odd and at least 3")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"log_level must be one of: {list(_LOG_LEVELS)}")
        return level

    def pool_size(self) -> int:
        """Number of worker threads used by batch scans."""
        return self.threads or os.cpu_count() or 1


# Global settings instance
settings = Settings()
