import os
import logging
import logging.config
import time
from datetime import datetime
from typing import Callable, Any, Optional, TypeVar, cast
import functools

from config.settings import settings

F = TypeVar("F", bound=Callable[..., Any])

NOISY_LIBRARIES = ("matplotlib", "matplotlib.font_manager", "PIL")


class LoggerConfig:
    """
    Configures console logging from the ini file and writes a per-run log file.
    """

    def __init__(
        self,
        config_filename: str = settings.LOG_CONFIG_FILE,
        log_dir: str = settings.LOG_DIRECTORY,
    ) -> None:
        """
        Args:
            config_filename (str): Name of the ini file inside src/config.
            log_dir (str): Log directory; relative paths are resolved against src/.
        """
        self.base_dir = os.path.dirname(os.path.dirname(__file__))
        self.config_path = os.path.normpath(
            os.path.join(self.base_dir, "config", config_filename)
        )
        self.log_dir = (
            log_dir if os.path.isabs(log_dir) else os.path.join(self.base_dir, log_dir)
        )
        self.log_filename: Optional[str] = None

    def setup(self) -> str:
        """Apply the ini configuration and attach a timestamped file handler once."""
        if self.log_filename is not None:
            return self.log_filename

        if not os.path.exists(self.config_path):
            raise FileNotFoundError(
                f"Logging configuration file not found: {self.config_path}"
            )
        logging.config.fileConfig(self.config_path, disable_existing_loggers=False)

        os.makedirs(self.log_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_filename = os.path.normpath(
            os.path.join(self.log_dir, f"optomech_{timestamp}.log")
        )
        file_handler = logging.FileHandler(self.log_filename, mode="a", encoding="utf-8")
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(levelname)s - %(module)s - %(funcName)s - %(lineno)d - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        logging.getLogger().addHandler(file_handler)

        for name in NOISY_LIBRARIES:
            logging.getLogger(name).setLevel(logging.WARNING)
        return self.log_filename


logger_config = LoggerConfig()
logger_config.setup()
logger = logging.getLogger("optomech")


def log_execution(func: F) -> F:
    """
    Log start and finish of ``func``; failures are logged with their traceback and re-raised.
    """

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        logger.info(f"Started {func.__name__}")
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"Error in {func.__name__}: {e}", exc_info=True)
            raise
        logger.info(f"Finished {func.__name__}")
        return result

    return cast(F, wrapper)


def timing_decorator(func: F) -> F:
    """Log the wall time of each call of ``func``."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        start_time = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            logger.info(f"{func.__name__} took {time.perf_counter() - start_time:.4f} seconds")

    return cast(F, wrapper)
