# --------------------------------------------------
# utils/logger.py
# --------------------------------------------------
# Single named logger; status lines go to stderr so stdout stays clean.
import logging
import os
import sys

LOGGER_NAME = "hyers_lab"

logger = logging.getLogger(LOGGER_NAME)


def configure_logging(level: str | None = None) -> logging.Logger:
    """Point the stderr handler at the current sys.stderr and set the level."""
    level = (level or os.getenv("HYERS_LAB_LOG_LEVEL", "INFO")).upper()
    for handler in [h for h in logger.handlers if getattr(h, "_hyers_lab", False)]:
        logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    handler._hyers_lab = True
    logger.addHandler(handler)
    logger.propagate = False
    logger.setLevel(getattr(logging, level, logging.INFO))
    return logger


def get_logger(name: str | None = None) -> logging.Logger:
    return logger.getChild(name) if name else logger
