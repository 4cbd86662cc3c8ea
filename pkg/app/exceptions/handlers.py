import logging
import sys
from functools import wraps

import click
from pydantic import ValidationError as PydanticValidationError

from app.exceptions.spin_exceptions import SpinTomoException, ValidationError

logger = logging.getLogger(__name__)

USAGE_EXIT = 1
IO_EXIT = 5


def handle_spin_exceptions(func):
    """
    Decorator converting exceptions raised inside a CLI command into exit codes

    Usage example:
    @click.command()
    @handle_spin_exceptions
    def certify(...):
        ...
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except PydanticValidationError as e:
            exc = as_validation_error(e)
            logger.warning(f"Validation Error: {exc.message}")
            click.echo(f"error: {exc.message}", err=True)
            sys.exit(exc.exit_code)
        except SpinTomoException as e:
            logger.error(f"spintomo Exception: {e.exit_code} - {e.code} - {e.message}")
            click.echo(f"error: {e.message}", err=True)
            sys.exit(e.exit_code)
        except click.ClickException:
            raise
        except OSError as e:
            logger.error(f"I/O Exception: {e}")
            click.echo(f"error: {e}", err=True)
            sys.exit(IO_EXIT)
    return wrapper


def as_validation_error(error: PydanticValidationError) -> ValidationError:
    """
    Turn a pydantic validation failure into the project's ValidationError
    """
    messages = []
    for item in error.errors():
        location = ".".join(str(part) for part in item.get("loc", ()))
        messages.append(f"{location}: {item.get('msg', '')}" if location else item.get("msg", ""))
    return ValidationError(message="; ".join(messages) or "Validation error", data=error.errors())
