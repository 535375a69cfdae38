from __future__ import annotations

import asyncio
import logging
import logging.handlers
import os
from functools import wraps
from typing import Any

from dotenv import load_dotenv

# a local .env fills in settings the process environment leaves unset
load_dotenv(dotenv_path=".env", override=False)

VERBOSE_DEBUG = os.getenv("VERBOSE", "false").lower() == "true"
DEBUG_PREVIEW_CHARS = 100
LOG_FILE_NAME = "digieval.log"

logger = logging.getLogger("digieval")
logger.propagate = False
logger.setLevel(logging.INFO)


def verbose_debug(msg: str, *args, **kwargs):
    """Per-tile debug line, cut to DEBUG_PREVIEW_CHARS unless verbose mode is on."""
    if not VERBOSE_DEBUG:
        text = msg % args if args else msg
        if len(text) > DEBUG_PREVIEW_CHARS:
            text = text[:DEBUG_PREVIEW_CHARS] + "..."
        logger.debug(text, **kwargs)
        return
    logger.debug(msg, *args, **kwargs)


def set_verbose_debug(enabled: bool):
    global VERBOSE_DEBUG
    VERBOSE_DEBUG = enabled


def _rotating_file_handler(path: str) -> logging.Handler | None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    try:
        return logging.handlers.RotatingFileHandler(
            filename=path,
            maxBytes=int(os.getenv("LOG_MAX_BYTES", 10 * 1024 * 1024)),
            backupCount=int(os.getenv("LOG_BACKUP_COUNT", 5)),
            encoding="utf-8",
        )
    except PermissionError as e:
        logger.warning(f"Cannot write {path} ({e}); logging to the console only")
        return None


def setup_logger(
    logger_name: str,
    level: str = "INFO",
    log_file_path: str | None = None,
    enable_file_logging: bool = True,
):
    """(Re)configure `logger_name` for a CLI run.

    Console records go to stderr, leaving stdout for reports. With file
    logging on, records are also kept in a rotating `digieval.log` under
    LOG_DIR (default: the working directory) unless `log_file_path` is given.
    """
    target = logging.getLogger(logger_name)
    target.setLevel(level)
    target.handlers = []
    target.propagate = False

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    console.setLevel(level)
    target.addHandler(console)

    if not enable_file_logging:
        return
    if log_file_path is None:
        log_file_path = os.path.join(os.getenv("LOG_DIR", os.getcwd()), LOG_FILE_NAME)
    handler = _rotating_file_handler(os.path.abspath(log_file_path))
    if handler is not None:
        handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
        handler.setLevel(level)
        target.addHandler(handler)


def limit_async_func_call(max_size: int):
    """Decorator: at most `max_size` calls of the coroutine run at once."""

    def decorate(func):
        gate = asyncio.Semaphore(max_size)

        @wraps(func)
        async def bounded(*args, **kwargs):
            async with gate:
                return await func(*args, **kwargs)

        return bounded

    return decorate


def write_text(content: str, file_name):
    with open(file_name, "w", encoding="utf-8", newline="\n") as f:
        f.write(content)


def read_bytes(file_name) -> bytes:
    with open(file_name, "rb") as f:
        return f.read()


def always_get_an_event_loop() -> asyncio.AbstractEventLoop:
    """The thread's open event loop, or a fresh one installed in its place."""
    try:
        loop = asyncio.get_event_loop()
    except RuntimeError:
        loop = None
    if loop is None or loop.is_closed():
        logger.debug("Installing a new event loop for this thread")
        loop = asyncio.new_event_loop()
        asyncio.set_event_loop(loop)
    return loop


def run_sync(coro) -> Any:
    """Drive a pipeline or matching coroutine from synchronous code."""
    return always_get_an_event_loop().run_until_complete(coro)
