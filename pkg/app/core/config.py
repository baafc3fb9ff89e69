"""
Configuration pour le modèle de multiplieur CIVP.
"""

from typing import Literal
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configuration du modèle CIVP."""

    # Logging
    log_level: str = "WARNING"

    # Self-test
    civp_seed: int = 20070101  # surchargé par CIVP_SEED puis par --seed
    selftest_samples: int = 2000

    # Arithmétique
    default_rounding: Literal[
        "nearest_even", "toward_zero", "toward_positive", "toward_negative"
    ] = "nearest_even"

    # Sortie machine
    json_indent: int = 2

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False
    )


# Instance globale de configuration
settings = Settings()
