import sys
from typing import Optional

from loguru import logger

CONSOLE_FORMAT = ("<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level}</level> | "
                  "<cyan>{module}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>")
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level} | {process} | {module}:{function}:{line} - {message}"
# corpus generation with many workers produces large logs
FILE_ROTATION = "50 MB"


def setup_logger(log_level: str = "INFO", log_file: Optional[str] = None):
    """
    Set up the logger: one coloured handler on stderr, so reports on stdout stay parseable, and an
    optional plain-text file handler.

    Args:
        log_level (str): The log level of both handlers. Default is "INFO".
        log_file (str): Optional path of a rotating log file, e.g. for long corpus generation runs.
    """
    logger.remove()  # Remove default logger
    logger.add(sink=sys.stderr, level=log_level, colorize=True, format=CONSOLE_FORMAT)
    if log_file:
        logger.add(sink=log_file, level=log_level, format=FILE_FORMAT, rotation=FILE_ROTATION, enqueue=True)
