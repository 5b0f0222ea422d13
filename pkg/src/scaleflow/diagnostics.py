"""
SCALEFLOW - Diagnostics (Logging Setup)
Configures the package logger from a single environment variable

Dependencies:
- cli_runner.py: Calls configure_logging() once per process

Environment:
- SCALEFLOW_LOG: off (default), info or debug
"""

import logging
import os
import sys
from typing import Optional

ENV_VAR = "SCALEFLOW_LOG"

_LEVELS = {
    "off": logging.CRITICAL + 10,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_handler: Optional[logging.Handler] = None


def configure_logging(level_name: Optional[str] = None) -> int:
    """
    Install one stderr handler on the ``scaleflow`` logger.

    Args:
        level_name: off/info/debug; read from SCALEFLOW_LOG when omitted

    Returns:
        The numeric level that was applied
    """
    global _handler

    raw = level_name if level_name is not None else os.getenv(ENV_VAR, "off")
    name = raw.strip().lower()
    unknown = name not in _LEVELS
    level = _LEVELS.get(name, _LEVELS["off"])

    logger = logging.getLogger("scaleflow")
    if _handler is None:
        _handler = logging.StreamHandler(sys.stderr)
        _handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        logger.addHandler(_handler)
        logger.propagate = False
    logger.setLevel(level)

    if unknown:
        # still visible at the "off" level
        sys.stderr.write(f"WARNING scaleflow: unknown {ENV_VAR}={raw!r}, logging disabled\n")

    return level
