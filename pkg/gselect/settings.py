"""Runtime settings, read from the environment (prefix GSELECT_) or a .env file."""
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="GSELECT_",
        env_file=".env",
        extra="ignore",
    )

    threads: int = Field(default=1, ge=1)
    out_dir: Path = Path("results")
    log_level: str = "INFO"
    quad_tol: float = Field(default=1e-10, ge=1e-12, le=1e-6)
    max_enumerate_p: int = Field(default=20, ge=1)


@lru_cache()
def get_settings() -> Settings:
    """Cached settings instance."""
    return Settings()
