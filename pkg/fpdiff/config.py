"""
Application configuration management using Pydantic Settings.
"""
import os
from typing import List, Optional, Union

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="FPDIFF_",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "fpdiff"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "console"

    # Workspace
    WORK_DIR: str = "./fpdiff-work"

    # Toolchains
    REGISTRY_PATH: Optional[str] = None
    HIPIFY_PATH: Optional[str] = None
    DEFAULT_TIMEOUT: float = 10.0
    DEFAULT_JOBS: int = os.cpu_count() or 1
    DEFAULT_LEVELS: Union[List[str], str] = ["O0", "O1", "O2", "O3", "O3_FM"]

    # Campaign
    INPUTS_PER_PROGRAM: int = 10

    # Classification
    NUMBER_EQUALITY: str = "bitwise"
    RELATIVE_EPSILON: float = 1e-12

    # Oracle
    MATH_BACKEND: str = "libm"

    @field_validator("DEFAULT_LEVELS", mode="before")
    @classmethod
    def assemble_levels(cls, v):
        """Parse optimization levels from string or list."""
        if isinstance(v, str) and not v.startswith("["):
            return [i.strip() for i in v.split(",") if i.strip()]
        elif isinstance(v, (list, str)):
            return v
        raise ValueError(v)

    @field_validator("LOG_FORMAT")
    @classmethod
    def check_log_format(cls, v: str) -> str:
        if v not in ("json", "console"):
            raise ValueError(f"LOG_FORMAT must be 'json' or 'console', got {v!r}")
        return v

    @field_validator("NUMBER_EQUALITY")
    @classmethod
    def check_number_equality(cls, v: str) -> str:
        if v not in ("bitwise", "relative"):
            raise ValueError(f"NUMBER_EQUALITY must be 'bitwise' or 'relative', got {v!r}")
        return v

    @field_validator("MATH_BACKEND")
    @classmethod
    def check_math_backend(cls, v: str) -> str:
        if v not in ("libm", "numpy"):
            raise ValueError(f"MATH_BACKEND must be 'libm' or 'numpy', got {v!r}")
        return v


# Create settings instance
settings = Settings()
