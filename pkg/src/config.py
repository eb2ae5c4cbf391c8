"""
Configuration Module

This module loads environment settings for the toolkit. Values come from
config/.env (if present) and from environment variables prefixed KERNELSMITH_,
and are exposed as an immutable Settings object.
"""

import os
import logging
from dataclasses import dataclass, fields, replace
from dotenv import load_dotenv

ENV_PREFIX = 'KERNELSMITH_'

# Load environment variables
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), '..', 'config', '.env'))

# Setup logging
logging.basicConfig(
    level=os.getenv(f'{ENV_PREFIX}LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    """
    Caps and switches read from the environment.

    Attributes:
        enumeration_cap (int): Max canonical test vectors for an exhaustive class check
        verify_cap (int): Max test vectors for the post-check run inside a reduction
        subset_cap (int): Max ground-set size for subset enumeration
        permutation_cap (int): Max job count for permutation enumeration
        rpp_required_cap (int): Max number of required edges for routing brute force
        rpp_vehicle_cap (int): Max vehicle count for routing brute force
        rpp_edge_cap (int): Max edge count for routing brute force
        pvc2_cap (int): Max number of power assignments enumerated
        log_level (str): Root logging level
    """
    enumeration_cap: int = 10**7
    verify_cap: int = 200_000
    subset_cap: int = 12
    permutation_cap: int = 8
    rpp_required_cap: int = 4
    rpp_vehicle_cap: int = 2
    rpp_edge_cap: int = 7
    pvc2_cap: int = 10**7
    log_level: str = 'INFO'


def load_settings(**overrides):
    """
    Build Settings from the environment, then apply explicit overrides.

    Args:
        **overrides: Field values that win over the environment (None is ignored)

    Returns:
        Settings: The resolved settings

    Raises:
        ValueError: If an environment value cannot be parsed
    """
    values = {}
    for field in fields(Settings):
        raw = os.getenv(f'{ENV_PREFIX}{field.name.upper()}')
        if raw is None:
            continue
        if field.type in (int, 'int'):
            try:
                values[field.name] = int(raw.replace('_', ''))
            except ValueError:
                raise ValueError(f"{ENV_PREFIX}{field.name.upper()} must be an integer, got {raw!r}")
        else:
            values[field.name] = raw
    settings = Settings(**values)
    explicit = {key: value for key, value in overrides.items() if value is not None}
    if explicit:
        settings = replace(settings, **explicit)
    return settings


def resolve(settings=None):
    """Return the given settings or load them from the environment."""
    return settings if settings is not None else load_settings()


def set_log_level(level):
    """Change the root logging level at runtime (used by the CLI --verbose flag)."""
    logging.getLogger().setLevel(level.upper() if isinstance(level, str) else level)
    logger.debug(f"Log level set to {level}")
