"""
Configuration management for SpanLab
"""

from typing import Optional
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Laboratory settings and configuration"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="SPANLAB_",
        case_sensitive=False,
        extra="ignore",
    )

    # Application settings
    app_name: str = "SpanLab"
    app_version: str = "1.0.0"
    debug: bool = Field(default=False)

    # Logging
    log_level: str = Field(default="INFO")
    log_json: bool = Field(default=False)

    # Parallelism (1 = serial)
    workers: int = Field(default=1, ge=1)

    # Feasibility guards
    enumeration_budget: int = Field(default=10_000_000, ge=1)
    automorphism_limit: int = Field(default=12, ge=1)
    extension_limit: int = Field(default=12, ge=1)
    universe_limit: int = Field(default=10, ge=1)
    powerset_edge_limit: int = Field(default=24, ge=1)
    search_budget: int = Field(default=1_000_000, ge=1)
    preimage_limit: int = Field(default=200_000, ge=1)

    # Random generation
    configuration_retry_cap: int = Field(default=1000, ge=1)

    # Statistics
    confidence_level: float = Field(default=0.95, gt=0.0, lt=1.0)
    inconclusive_discard_rate: float = Field(default=0.05, ge=0.0, le=1.0)
    bound_slack: float = Field(default=1e-9, ge=0.0)

    # Output
    output_dir: str = Field(default="results")
    artifact_version: Optional[str] = None


@lru_cache()
def get_settings() -> Settings:
    """Get cached laboratory settings"""
    return Settings()


# Global settings instance
settings = get_settings()


# Short family names accepted on the command line
FAMILY_ALIASES = {
    "sq_cycle": "power_of_cycle:2",
    "square_of_cycle": "power_of_cycle:2",
    "ham_cycle": "power_of_cycle:1",
    "cube_of_cycle": "power_of_cycle:3",
    "c4e": "overlapping_four_cycles",
    "torus3": "toroidal_grid:3",
}

# Round structure of every fragmentation schedule preset
SCHEDULE_PRESETS = {
    "square_days": {
        "description": "Day 0 fragmentation with diamonds and smoothing, Days 1-3 shrinking and covering",
        "family": "power_of_cycle:2",
        "uses_diamonds": True,
        "smoothing": True,
        "rounds": ["day0", "day1", "day2", "day3"],
    },
    "coarse": {
        "description": "d rounds at m' = floor(B n^(-2/d) N) followed by a covering sprinkle",
        "family": None,
        "uses_diamonds": False,
        "smoothing": False,
        "rounds": ["coarse"],
    },
    "sharp1": {
        "description": "First-condition sharp schedule: m = (1+eps) p_e N then shrinking rounds at m0",
        "family": None,
        "uses_diamonds": False,
        "smoothing": False,
        "rounds": ["first", "shrink", "cover"],
    },
    "sharp2": {
        "description": "Second-condition sharp schedule: two rounds of m = (1+eps) p_e N then covering at m0",
        "family": None,
        "uses_diamonds": False,
        "smoothing": False,
        "rounds": ["first", "second", "cover"],
    },
}

# Boundary rules understood by the local sparsity checker
CONDITION_RULES = {
    "d+1": "every subgraph has edge boundary at least d+1",
    "2d": "every subgraph has edge boundary at least 2d",
    "growing": "edge boundary at least d+1+floor(x w / ln n) inside the gate ln n/w <= x <= n^(1-delta)",
}
