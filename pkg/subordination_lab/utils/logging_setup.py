"""Logging configuration shared by the command line and the tests"""

import logging

LOG_FORMAT = '[%(levelname)s] %(message)s'


def setup_logging(level: str = 'INFO') -> logging.Logger:
    """
    Configure the package logger once.

    Args:
        level: Level name such as "INFO" or "DEBUG"

    Returns:
        The package logger
    """
    logger = logging.getLogger('subordination_lab')
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False
    logger.setLevel(getattr(logging, str(level).upper(), logging.INFO))
    return logger
