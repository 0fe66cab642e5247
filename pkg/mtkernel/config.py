"""
Configuration settings for the mtkernel toolkit.
Uses environment variables with sensible defaults.
"""

import os
from pathlib import Path
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # App settings
    APP_NAME: str = "mtkernel"
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "WARNING")

    # Paths
    BASE_DIR: Path = Path(__file__).resolve().parent.parent
    DATA_DIR: Path = Path(os.getenv("DATA_DIR", str(BASE_DIR / "data")))

    # Depth and path bounds used when a command gives none
    DEFAULT_DEPTH: int = 8
    DEFAULT_MAX_NODES: int = 4

    # Candidate families enumerated before presheaf_apply_Pf gives up
    ENUMERATION_GUARD: int = 100_000

    # Graphviz layout direction
    DOT_RANKDIR: str = "TB"

    class Config:
        env_file = ".env"
        extra = "ignore"


settings = Settings()
