"""Application configuration using pydantic-settings."""

import os
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Environment(str, Enum):
    """Application environment."""

    DEVELOPMENT = "development"
    PRODUCTION = "production"
    TESTING = "testing"


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="OBSTACLE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    environment: Environment = Environment.DEVELOPMENT
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"

    # Experiments
    output_dir: Path = Field(default=Path("./results"))
    threads: Optional[int] = Field(default=None, ge=1)
    master_seed: int = Field(default=20240601, ge=0, lt=2**64)

    # Solver defaults
    default_delta_reg: float = Field(default=1e-8, ge=0.0)
    default_pen_reg: float = Field(default=1e-10, ge=0.0)
    default_newton_tol: float = Field(default=1e-10, gt=0.0)
    default_newton_max_iters: int = Field(default=50, ge=1)

    @property
    def worker_count(self) -> int:
        """Get the worker pool size (hardware parallelism when unset)."""
        return self.threads or os.cpu_count() or 1

    @property
    def is_development(self) -> bool:
        """Check if running in development mode."""
        return self.environment == Environment.DEVELOPMENT


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
