from pydantic import Field, field_validator, AliasChoices
from pydantic_settings import BaseSettings, SettingsConfigDict

class EnvConfig(BaseSettings):
    """
    Centralized environment configuration.
    Loads from process environment variables first,
    with a fallback to a local `.env` file for development.
    """

    # ---------------------------
    # Parallelism
    # ---------------------------
    workers: int = Field(1, validation_alias=AliasChoices("TGB_WORKERS"), description="Default worker count")

    # ---------------------------
    # Enumeration
    # ---------------------------
    enumeration_cap: int = Field(14, validation_alias=AliasChoices("TGB_ENUMERATION_CAP"))
    long_enumeration_n: int = Field(12, validation_alias=AliasChoices("TGB_LONG_ENUMERATION_N"))

    # ---------------------------
    # Sampling
    # ---------------------------
    sample_size: int = Field(1_000_000, validation_alias=AliasChoices("TGB_SAMPLE_SIZE"))
    sample_block: int = Field(65_536, validation_alias=AliasChoices("TGB_SAMPLE_BLOCK"))
    seed: int = Field(20150202, validation_alias=AliasChoices("TGB_SEED"))

    # ---------------------------
    # Local search
    # ---------------------------
    neighbor_list_size: int = Field(12, validation_alias=AliasChoices("TGB_NEIGHBOR_LIST_SIZE"))
    full_scan_max_n: int = Field(40, validation_alias=AliasChoices("TGB_FULL_SCAN_MAX_N"))
    max_passes: int = Field(1000, validation_alias=AliasChoices("TGB_MAX_PASSES"))
    improvement_tolerance: float = Field(1e-9, validation_alias=AliasChoices("TGB_IMPROVEMENT_TOLERANCE"))

    # ---------------------------
    # Truncation schedule
    # ---------------------------
    stop_epsilon: float = Field(1e-9, validation_alias=AliasChoices("TGB_STOP_EPSILON"))
    max_k: int = Field(1_000_000, validation_alias=AliasChoices("TGB_MAX_K"))

    # ---------------------------
    # Logging
    # ---------------------------
    log_level: str = Field("INFO", validation_alias=AliasChoices("TGB_LOG_LEVEL"))

    # ---------------------------
    # Validators / Parsers
    # ---------------------------

    @field_validator("workers", "sample_block", "max_passes", "max_k", "neighbor_list_size")
    @classmethod
    def _at_least_one(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("log_level", mode="before")
    @classmethod
    def _parse_log_level(cls, v):
        # Accepts "info", " Debug " ...
        return str(v).strip().upper()

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

# Singleton instance to import across the app
env = EnvConfig()
