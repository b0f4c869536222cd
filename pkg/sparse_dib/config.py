"""
Runtime settings and logging setup.
Settings come from the environment (optionally a .env file) and are
overridden by CLI flags.
"""

import os
import sys
import logging
from dataclasses import dataclass
from datetime import datetime

from dotenv import load_dotenv

from .exceptions import ConfigurationError

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOGGER_NAME = 'sparse_dib'


@dataclass(frozen=True)
class Settings:
    """Environment-driven defaults shared by every command."""
    seed: int = 0
    log_level: str = 'INFO'
    log_file: str = ''
    output_dir: str = 'output'
    probability_floor: float = 1e-12

    @classmethod
    def from_env(cls):
        load_dotenv()  # Load .env file if present
        try:
            seed = int(os.getenv('SPARSE_DIB_SEED', '0'))
            floor = float(os.getenv('SPARSE_DIB_PROBABILITY_FLOOR', '1e-12'))
        except ValueError as e:
            raise ConfigurationError(f"Invalid numeric environment value: {e}")

        level = os.getenv('SPARSE_DIB_LOG_LEVEL', 'INFO').upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ConfigurationError(f"Unknown log level {level!r}")
        if not 0 < floor < 1:
            raise ConfigurationError("SPARSE_DIB_PROBABILITY_FLOOR must lie in (0, 1)")

        return cls(
            seed=seed,
            log_level=level,
            log_file=os.getenv('SPARSE_DIB_LOG_FILE', ''),
            output_dir=os.getenv('SPARSE_DIB_OUTPUT_DIR', 'output'),
            probability_floor=floor,
        )


def setup_logging(settings=None):
    """Attach stderr (and optionally file) handlers to the package logger once."""
    settings = settings or Settings.from_env()
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.handlers:
        formatter = logging.Formatter(LOG_FORMAT)

        stream = logging.StreamHandler(sys.stderr)
        stream.setFormatter(formatter)
        logger.addHandler(stream)

        if settings.log_file:
            path = settings.log_file
            if path == 'auto':
                path = f'sparse_dib_{datetime.now().strftime("%Y%m%d")}.log'
            handler = logging.FileHandler(path)
            handler.setFormatter(formatter)
            logger.addHandler(handler)

    logger.setLevel(settings.log_level)
    return logger
