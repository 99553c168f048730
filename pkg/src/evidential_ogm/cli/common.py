"""Console, logging setup and error reporting shared by the commands."""

from __future__ import annotations

import sys
from collections.abc import Iterator
from contextlib import contextmanager

import typer
from loguru import logger
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

from evidential_ogm.errors import EvidentialOgmError

__all__ = [
    "EXIT_DOMAIN",
    "EXIT_IO",
    "configure_logging",
    "console",
    "err_console",
    "report_errors",
]

EXIT_IO = 3
EXIT_DOMAIN = 5

console = Console()
err_console = Console(stderr=True)

_LOG_FORMAT = "<level>{level: <8}</level> | <cyan>{name}</cyan> - {message}"


def configure_logging(verbose: bool = False) -> None:
    """Route loguru to stderr at WARNING, or DEBUG when ``verbose``."""
    logger.remove()
    # resolve sys.stderr per message so redirected streams are honoured
    logger.add(
        lambda message: sys.stderr.write(message),
        level="DEBUG" if verbose else "WARNING",
        format=_LOG_FORMAT,
        colorize=False,
    )


def _fail(error: BaseException, code: int) -> typer.Exit:
    err_console.print(f"[red]Error:[/red] {escape(str(error))}", soft_wrap=True)
    return typer.Exit(code=code)


@contextmanager
def report_errors() -> Iterator[None]:
    """
    Turn package errors into a diagnostic and an exit code.

    ``OSError`` exits with 3, pydantic validation errors with 5 and package
    errors with their ``exit_code``.
    """
    try:
        yield
    except EvidentialOgmError as error:
        logger.debug(f"{type(error).__name__}: {error}")
        raise _fail(error, error.exit_code) from error
    except ValidationError as error:
        raise _fail(error, EXIT_DOMAIN) from error
    except OSError as error:
        raise _fail(error, EXIT_IO) from error
