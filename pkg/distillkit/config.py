"""
Configuration Loader

Reads config.yaml, applies environment overrides and returns validated
Settings. Resolution order: built-in defaults < config file < environment
< explicit CLI flags (applied by the caller).
"""

import os
from pathlib import Path
from typing import Optional

import structlog
import yaml
from pydantic import ValidationError

from .errors import ConfigError
from .models.settings import Settings, TolerancePolicy

logger = structlog.get_logger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).parent.parent / "config.yaml"
CONFIG_ENV = "DISTILLKIT_CONFIG"
TOLERANCE_ENV = "QSF_TOLERANCE"


def load_settings(config_path: Optional[Path] = None) -> Settings:
    """
    Load settings from YAML with environment overrides

    Args:
        config_path: Explicit config file; falls back to $DISTILLKIT_CONFIG,
            then to config.yaml at the repository root

    Returns:
        Validated Settings

    Raises:
        ConfigError: If the file is not valid YAML or fails validation
    """
    if config_path is None:
        config_path = Path(os.getenv(CONFIG_ENV, str(DEFAULT_CONFIG_PATH)))

    data = {}
    source = None
    try:
        with open(config_path) as f:
            data = yaml.safe_load(f) or {}
        source = str(config_path)
    except FileNotFoundError:
        logger.warning("config.missing", path=str(config_path))
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {config_path}: {e}")

    if not isinstance(data, dict):
        raise ConfigError(f"Config root must be a mapping, got {type(data).__name__}")

    try:
        settings = Settings(**data, source=source)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")

    return apply_env_overrides(settings)


def apply_env_overrides(settings: Settings) -> Settings:
    """Apply $QSF_TOLERANCE (rank_rtol override) to loaded settings"""
    raw = os.getenv(TOLERANCE_ENV)
    if raw is None:
        return settings

    try:
        tolerance = TolerancePolicy(
            rank_rtol=float(raw),
            zero_atol=settings.tolerance.zero_atol,
        )
    except (ValueError, ValidationError) as e:
        raise ConfigError(f"Invalid {TOLERANCE_ENV}={raw!r}: {e}")

    logger.debug("config.env_override", variable=TOLERANCE_ENV, rank_rtol=tolerance.rank_rtol)
    return settings.model_copy(update={"tolerance": tolerance})
