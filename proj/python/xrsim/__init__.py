"""Python bindings for the xrsim downlink simulator."""

from ._core import (
    ConfigError,
    InternalError,
    IoError,
    cqi_and_rate,
    default_config,
    effective_budget,
    find_crossovers,
    generate_stream,
    pathloss_uma_nlos,
    run,
    sweep,
    validate,
)

__all__ = [
    "ConfigError",
    "InternalError",
    "IoError",
    "cqi_and_rate",
    "default_config",
    "effective_budget",
    "find_crossovers",
    "generate_stream",
    "pathloss_uma_nlos",
    "run",
    "sweep",
    "validate",
]
