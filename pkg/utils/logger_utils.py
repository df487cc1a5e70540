import logging
import sys

from config.env_config import env

def setup_logger(name: str, level: str | int | None = None):
    """
        Create and configure a logger instance with standard-error output.

        ### Description
        Sets up a Python `logging` logger with a single stream handler bound to
        standard error, so documents written to standard output by the CLI stay
        machine-readable. The level defaults to `TGB_LOG_LEVEL`. Duplicate
        handlers are never added when a module is imported twice.

        ### Parameters
        - **name** (*str*): The name of the logger, typically `__name__` of the module.
        - **level** (*str | int*, optional): Overrides the configured level.

        ### Returns
        - **logging.Logger**: A configured logger instance.

        ### Log Format
        ```
        %(asctime)s - %(name)s - %(levelname)s - %(message)s
        ```
    """
    logger = logging.getLogger(name)
    logger.setLevel(level if level is not None else env.log_level)

    if not logger.handlers:
        console_handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)
        logger.propagate = False

    return logger
