"""Link-level SIMO uplink simulator with detect-and-rollback LLR arbitration."""

from .grid import (
    ConfigError,
    DmrsConfig,
    ModulationScheme,
    ResourceGrid,
    SlotConfig,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DmrsConfig",
    "ModulationScheme",
    "ResourceGrid",
    "SlotConfig",
    "__version__",
]
