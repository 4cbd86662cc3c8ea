import logging
from typing import List, Optional

import click

from app.core.config import settings
from app.core.log_config import setup_logging
from app.exceptions.handlers import IO_EXIT, USAGE_EXIT
from app.exceptions.spin_exceptions import SpinTomoException
from app.schemas.response import FORMATS
from app.services.common.thread_pool import thread_pool_service
from app.utils.utils import parse_tolerance

logger = logging.getLogger(__name__)


def apply_tolerances(ctx: click.Context, values: List[str]) -> dict:
    """Override settings fields for this invocation and restore them when the context closes"""
    overrides = dict(parse_tolerance(value) for value in values)
    unknown = [name for name in overrides if not hasattr(settings, name)]
    if unknown:
        raise click.BadParameter(f"unknown setting(s): {', '.join(unknown)}", param_hint="--tolerance")
    previous = {name: getattr(settings, name) for name in overrides}
    for name, value in overrides.items():
        setattr(settings, name, type(previous[name])(value))

    def restore():
        for name, value in previous.items():
            setattr(settings, name, value)

    ctx.call_on_close(restore)
    return overrides


def create_cli() -> click.Group:
    @click.group(name=settings.PROJECT_NAME, context_settings={"help_option_names": ["-h", "--help"]})
    @click.version_option(settings.VERSION, prog_name=settings.PROJECT_NAME)
    @click.option("--format", "output_format", type=click.Choice(FORMATS), default="table", show_default=True,
                  help="Report format on stdout")
    @click.option("--log-level", default=None, help="Log level for stderr diagnostics (default from ENV)")
    @click.option("--tolerance", "tolerances", multiple=True, metavar="NAME=VALUE",
                  help="Override a numeric tolerance, e.g. EXACT_RESIDUAL_TOLERANCE=1e-6")
    @click.pass_context
    def cli(ctx, output_format, log_level, tolerances):
        """Spin-s state reconstruction from Stern-Gerlach intensity data."""
        setup_logging(level=log_level)
        try:
            overrides = apply_tolerances(ctx, tolerances)
        except SpinTomoException as e:
            raise click.BadParameter(e.message, param_hint="--tolerance")
        ctx.obj = {"format": output_format, "tolerances": overrides}
        logger.debug(f"{settings.PROJECT_NAME} {ctx.invoked_subcommand} (format {output_format})")

    from app.route.command_registry import get_commands, register_commands

    register_commands(cli, get_commands())
    return cli


def parse_and_dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one invocation and return its process exit code"""
    cli = create_cli()
    try:
        result = cli.main(args=argv, prog_name=settings.PROJECT_NAME, standalone_mode=False)
        return result if isinstance(result, int) else 0
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return USAGE_EXIT
    except click.ClickException as e:
        e.show()
        return USAGE_EXIT
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else (0 if e.code is None else USAGE_EXIT)
    except SpinTomoException as e:
        click.echo(f"error: {e.message}", err=True)
        return e.exit_code
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        return IO_EXIT
    except Exception as e:
        logger.exception(f"Unhandled Exception: {str(e)}")
        return USAGE_EXIT
    finally:
        thread_pool_service.shutdown()
