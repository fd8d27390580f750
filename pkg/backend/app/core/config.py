"""
Application Configuration
Uses pydantic-settings for environment variable management
"""
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Default tolerances and sampling parameters, overridable via ABFINSLER_* variables"""

    model_config = SettingsConfigDict(
        env_prefix="ABFINSLER_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "ABFinsler"
    VERSION: str = "1.0.0"
    DEBUG: bool = False
    SCHEMA_VERSION: int = 1

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: Literal["text", "json"] = "text"

    # Verdict thresholds
    TOL_DOUGLAS: float = Field(1e-7, gt=0)
    TOL_HAMEL: float = Field(1e-7, gt=0)
    TOL_CLASS: float = Field(1e-6, gt=0)
    TOL_CLOSED: float = Field(1e-8, gt=0)
    TOL_B_CONSTANT: float = Field(1e-9, gt=0)
    TOL_CONFORMAL: float = Field(1e-8, gt=0)
    TOL_SPRAY: float = Field(1e-7, gt=0)
    TOL_GEODESIC: float = Field(1e-5, gt=0)

    # Sampling
    GRID_SIZE: int = Field(17, ge=3)
    N_ANGLES: int = Field(64, ge=8)
    N_DIRECTIONS: int = Field(16, ge=4)
    MARGIN: float = Field(0.05, ge=0, lt=0.5)
    SEED: int = 0
    N_SAMPLES: int = Field(100, ge=1)
    S_LIMIT: float = Field(0.8, gt=0, le=1)

    # Exclusion accounting
    DENOMINATOR_FLOOR: float = Field(1e-6, gt=0)
    DOUGLAS_DATA_FLOOR: float = Field(1e-10, gt=0)
    INCONCLUSIVE_FRACTION: float = Field(0.2, gt=0, le=1)

    # Integrators
    ODE_STEPS: int = Field(2048, ge=16)
    QUAD_TOL: float = Field(1e-12, gt=0)
    GEODESIC_STEPS: int = Field(512, ge=8)
    GEODESIC_ARCLENGTH: float = Field(0.5, gt=0)
    N_TRACES: int = Field(8, ge=1)


# Singleton instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the settings singleton"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the next call re-reads the environment"""
    global _settings
    _settings = None
