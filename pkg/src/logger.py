"""Module for configuring the root logger."""

import logging

from src.utils.config import LoggingConfigView

config_logging_levels_mapping = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}


def configure_logging(logging_config: LoggingConfigView, verbose: bool = False) -> None:
    """Configure the root logger from the run configuration.

    Args:
        logging_config: Level, destination file, file mode and message format.
        verbose: Force the DEBUG level.
    """
    level = logging.DEBUG if verbose else config_logging_levels_mapping[logging_config.level]
    if logging_config.file_path is not None:
        logging_config.file_path.parent.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=level,
        filename=logging_config.file_path,
        filemode=logging_config.filemode,
        format=logging_config.format,
        force=True,
    )
