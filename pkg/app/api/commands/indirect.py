import click

from app.api.commands.deps import get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.schemas.response import CommandResponse
from app.services.common.text_store import text_store
from app.services.spin.indirect import indirect_service
from app.utils.utils import parse_axis

INCONSISTENT_EXIT = 3


@click.command("indirect")
@click.option("--table", "table_path", required=True, type=click.Path(dir_okay=False), help="Intensity table")
@click.option("--operator", "operator_path", required=True, type=click.Path(dir_okay=False), help="Operator file")
@click.option("--quorum", "quorum_path", type=click.Path(dir_okay=False), default=None, help="Quorum file (default: table axes)")
@click.option("--pure", is_flag=True, help="Reconstruct as a pure state from a tripod table")
@click.pass_context
@handle_spin_exceptions
def indirect(ctx, table_path, operator_path, quorum_path, pure):
    """Expectation value of any operator from quorum data alone."""
    config = get_run_config(
        ctx, "indirect", paths={"table": table_path, "operator": operator_path, "quorum": quorum_path}
    )
    table = text_store.read_table(table_path)
    operator = text_store.read_operator(operator_path, table.spin)
    quorum = text_store.read_quorum(quorum_path) if quorum_path else None
    result = indirect_service.indirect_expectation(table, quorum, operator, pure)
    CommandResponse.success(
        data={
            "operator": operator.name,
            "re": result.value.real,
            "im": result.value.imag,
            "residual": result.rho_source.residual,
            "method": result.rho_source.method,
        },
        message=f"<O> = {result.value.real:.12g} {result.value.imag:+.12g}i",
        fmt=config.output_format,
    )


@click.command("consistency")
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False), help="State or density file")
@click.option("--quorum", "quorum_path", required=True, type=click.Path(dir_okay=False), help="Quorum file")
@click.option("--holdout", required=True, help="Held-out axis: x, y, z or theta,phi")
@click.option("--shots", type=int, default=None, help="Shots per axis; exact comparison when omitted")
@click.option("--seed", type=int, default=None, help="Sampling seed (default SPINTOMO_SEED)")
@click.option("--table", "table_path", type=click.Path(dir_okay=False), default=None, help="Use this quorum table instead of simulating one")
@click.pass_context
@handle_spin_exceptions
def consistency(ctx, state_path, quorum_path, holdout, shots, seed, table_path):
    """Direct versus reconstructed intensities on an axis outside the quorum."""
    config = get_run_config(
        ctx, "consistency", shots=shots, seed=seed,
        paths={"state": state_path, "quorum": quorum_path, "table": table_path},
    )
    rho = text_store.read_density(state_path)
    quorum = text_store.read_quorum(quorum_path)
    table = text_store.read_table(table_path) if table_path else None
    report = indirect_service.consistency_test(rho, quorum, parse_axis(holdout), config.shots, config.seed, table)
    CommandResponse.success(
        data=report,
        message="consistent" if report.passed else "inconsistent",
        fmt=config.output_format,
    )
    if not report.passed:
        ctx.exit(INCONSISTENT_EXIT)
