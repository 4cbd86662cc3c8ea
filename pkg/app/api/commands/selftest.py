import click

from app.api.commands.deps import get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.schemas.response import CommandResponse
from app.services.spin.selftest import SelftestService

FAILED_EXIT = 3


@click.command("selftest")
@click.option("--seed", type=int, default=None, help="Seed (default SPINTOMO_SEED)")
@click.option("--quick", is_flag=True, help="Smaller sample sizes")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the report here")
@click.pass_context
@handle_spin_exceptions
def selftest(ctx, seed, quick, out):
    """Run the built-in acceptance battery, one line per check."""
    config = get_run_config(ctx, "selftest", seed=seed, paths={"out": out})
    report = SelftestService(config.seed, quick).run()
    if config.output_format == "records":
        CommandResponse.success(data=report, message="selftest", fmt="records", out=out)
    else:
        lines = [f"selftest seed {report.seed}{' quick' if quick else ''}"]
        lines.extend(check.line() for check in report.checks)
        lines.append(f"{sum(check.passed for check in report.checks)}/{len(report.checks)} checks passed")
        CommandResponse.success(data=None, message="\n".join(lines), fmt="table", out=out)
    if not report.passed:
        ctx.exit(FAILED_EXIT)
