"""
Logging utilities for the gathering toolkit.

Every component logs to its own rotating file under the log directory and,
in the main process, to stderr. Sweep worker processes write files only.
Failures that escape the CLI handlers go to a separate errors.log.
"""

import logging
import multiprocessing
import os
import time
from functools import lru_cache, wraps
from logging.handlers import RotatingFileHandler
from typing import Optional


MAX_ARGUMENT_PREVIEW = 120

FORMATS = {
    "file": '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s',
    "console": '%(asctime)s - %(levelname)s - %(name)s - %(message)s',
    "errors": '%(asctime)s - %(levelname)s - %(name)s - %(filename)s:%(lineno)d - %(funcName)s - %(message)s',
}


def _in_worker() -> bool:
    return multiprocessing.current_process().name != "MainProcess"


def _rotating_handler(path: str, level: int, style: str, max_bytes: int, backup_count: int) -> logging.Handler:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    handler = RotatingFileHandler(path, maxBytes=max_bytes, backupCount=backup_count, encoding='utf-8')
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(FORMATS[style]))
    return handler


def _replace_handlers(logger: logging.Logger, *handlers: logging.Handler) -> None:
    # Engines are rebuilt many times per process
    for old in list(logger.handlers):
        logger.removeHandler(old)
        old.close()
    for handler in handlers:
        logger.addHandler(handler)
    logger.propagate = False


def setup_logger(
    name: str,
    log_level: str = "INFO",
    log_dir: str = "logs",
    max_bytes: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5,
    console: Optional[bool] = None,
) -> logging.Logger:
    """
    Set up a logger writing to <log_dir>/<last name component>.log.

    Args:
        name: Logger name (usually __name__)
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory to store log files
        max_bytes: Maximum file size before rotation
        backup_count: Number of rotated files to keep
        console: Also log to stderr; defaults to on outside sweep workers

    Returns:
        Configured logger instance
    """
    level = getattr(logging, log_level.upper(), logging.INFO)
    logger = logging.getLogger(name)
    logger.setLevel(level)

    handlers = [_rotating_handler(os.path.join(log_dir, f"{name.split('.')[-1]}.log"),
                                  level, "file", max_bytes, backup_count)]
    if console if console is not None else not _in_worker():
        stream = logging.StreamHandler()
        stream.setLevel(level)
        stream.setFormatter(logging.Formatter(FORMATS["console"]))
        handlers.append(stream)

    _replace_handlers(logger, *handlers)
    return logger


def setup_error_logger(log_dir: str = "logs") -> logging.Logger:
    """Logger for failures the CLI could not map to an exit code."""
    logger = logging.getLogger("errors")
    logger.setLevel(logging.ERROR)
    _replace_handlers(logger, _rotating_handler(os.path.join(log_dir, "errors.log"), logging.ERROR,
                                                "errors", 5 * 1024 * 1024, 10))
    return logger


@lru_cache(maxsize=None)
def _error_logger(log_dir: str) -> logging.Logger:
    return setup_error_logger(log_dir)


def log_critical_error(message: str, exception: Optional[Exception] = None):
    """
    Record a failure in errors.log under LOG_DIR, with a traceback when an exception is given.

    Args:
        message: Error message
        exception: Optional exception instance
    """
    logger = _error_logger(os.getenv("LOG_DIR", "logs"))
    if exception:
        logger.critical(f"{message}: {exception}", exc_info=exception)
    else:
        logger.critical(message)


def _preview(value: object) -> str:
    text = repr(value)
    if len(text) > MAX_ARGUMENT_PREVIEW:
        return text[:MAX_ARGUMENT_PREVIEW - 3] + "..."
    return text


def log_function_call(logger: logging.Logger, slow_after: Optional[float] = None):
    """
    Decorator logging calls, failures and elapsed time.

    Argument reprs are truncated since tables and topologies can be large.
    Calls running longer than slow_after seconds are logged at INFO.
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            name = func.__qualname__
            if logger.isEnabledFor(logging.DEBUG):
                shown = [_preview(a) for a in args] + [f"{k}={_preview(v)}" for k, v in kwargs.items()]
                logger.debug(f"Calling {name}({', '.join(shown)})")

            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(f"{name} failed after {time.perf_counter() - start:.3f}s: {e}")
                raise

            elapsed = time.perf_counter() - start
            if slow_after is not None and elapsed > slow_after:
                logger.info(f"{name} took {elapsed:.1f}s")
            else:
                logger.debug(f"{name} completed in {elapsed:.3f}s")
            return result

        return wrapper
    return decorator


class LoggerMixin:
    """
    Gives a class a logger named after it.

    Usage:
        class SweepRunner(LoggerMixin):
            def __init__(self, log_level="INFO", log_dir="logs"):
                self.setup_logging(log_level, log_dir)
    """

    logger: Optional[logging.Logger] = None

    def setup_logging(self, log_level: str = "INFO", log_dir: str = "logs", console: Optional[bool] = None):
        self.logger = setup_logger(self.__class__.__name__.lower(), log_level, log_dir, console=console)

    def _emit(self, level: int, message: str, exc_info: bool = False):
        if self.logger is not None:
            self.logger.log(level, message, exc_info=exc_info)

    def log_info(self, message: str):
        self._emit(logging.INFO, message)

    def log_error(self, message: str, exc_info: bool = False):
        self._emit(logging.ERROR, message, exc_info)

    def log_warning(self, message: str):
        self._emit(logging.WARNING, message)

    def log_debug(self, message: str):
        """Callers guard expensive formatting with debug_enabled."""
        self._emit(logging.DEBUG, message)

    def log_progress(self, done: int, total: int, detail: str = "", steps: int = 10):
        """Log at INFO roughly `steps` times over a loop of `total` items."""
        every = max(1, total // steps)
        if done % every == 0 or done == total:
            self.log_info(f"{done}/{total}{' ' + detail if detail else ''}")

    @property
    def debug_enabled(self) -> bool:
        return self.logger is not None and self.logger.isEnabledFor(logging.DEBUG)
