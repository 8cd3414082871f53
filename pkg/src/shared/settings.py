"""Runtime settings loaded from the environment."""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class SimulationSettings(BaseSettings):
    """Environment-driven defaults (prefix ``ISINGVOTE_``)."""

    model_config = SettingsConfigDict(
        env_prefix="ISINGVOTE_", env_file=".env", extra="ignore"
    )

    # Application Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None
    LOG_JSON: bool = True
    PROGRESS: bool = False

    # Monte Carlo harness
    WORKERS: int = Field(default=1, ge=1)
    BLOCK_TRIALS: int = Field(default=4096, ge=1)

    # Glauber dynamics (custom graphs)
    GLAUBER_BURN_IN_SWEEPS: int = Field(default=100, ge=0)
    GLAUBER_THINNING_SWEEPS: int = Field(default=10, ge=1)
    GLAUBER_CHAINS: int = Field(default=256, ge=1)

    # Exact oracles and quadrature
    MAX_ENUMERATION_N: int = Field(default=20, ge=1, le=24)
    QUAD_EPSABS: float = 1e-12
    QUAD_EPSREL: float = 1e-10


@lru_cache()
def get_settings() -> SimulationSettings:
    """Return the process-wide settings instance."""
    return SimulationSettings()
