"""
Application Settings

Values come from the environment (prefix ``COLOURSPACE_``) or a local
``.env`` file; explicit function arguments always take precedence.
"""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime configuration shared by every module"""

    model_config = SettingsConfigDict(
        env_prefix="COLOURSPACE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    PROJECT_NAME: str = "Colourspace"
    VERSION: str = "1.0.0"
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Search and materialisation guards
    NODE_BUDGET: int = Field(10**9, ge=1)
    VIEW_BUDGET: int = Field(10**5, ge=1)
    SUBSET_LIMIT: int = Field(20, ge=1)

    # Generators and heuristics
    RANDOM_REGULAR_RETRIES: int = Field(1000, ge=1)
    LOCAL_SEARCH_MAX_ITERATIONS: int = Field(10_000, ge=1)

    CACHE_MAX_ENTRIES: int = Field(64, ge=1)

    # CLI
    OUTPUT_DIR: Path = Path(".")
    JOBS: int = Field(1, ge=1)


settings = Settings()
