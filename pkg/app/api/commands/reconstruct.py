import click

from app.api.commands.deps import get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.schemas.measurement import QuorumSpec
from app.schemas.reconstruction import PartnerSet
from app.schemas.response import CommandResponse
from app.services.common.text_store import text_store
from app.services.spin.measurement import measurement_service
from app.services.spin.recon_mixed import recon_mixed_service
from app.services.spin.recon_pure import recon_pure_service
from app.utils.utils import parse_axis


@click.group("reconstruct")
def reconstruct():
    """Reconstruct a state from an intensity table."""


@reconstruct.command("mixed")
@click.option("--table", "table_path", required=True, type=click.Path(dir_okay=False), help="Intensity table")
@click.option("--quorum", "quorum_path", type=click.Path(dir_okay=False), default=None, help="Quorum file (default: table axes)")
@click.option("--allow-minimum-norm", is_flag=True, help="Return the minimum-norm solution for a rank-deficient map")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Density file to write")
@click.pass_context
@handle_spin_exceptions
def reconstruct_mixed(ctx, table_path, quorum_path, allow_minimum_norm, out):
    """Linear inversion with positivity projection."""
    config = get_run_config(ctx, "reconstruct mixed", paths={"table": table_path, "quorum": quorum_path, "out": out})
    table = text_store.read_table(table_path)
    quorum = text_store.read_quorum(quorum_path) if quorum_path else None
    result = recon_mixed_service.reconstruct_mixed(table, quorum, allow_minimum_norm)
    text_store.write_density(out, result.rho_hat)
    CommandResponse.success(
        data={
            "spin": table.spin.label,
            "residual": result.residual,
            "rank": result.rank,
            "condition_number": result.condition_number,
            "projected": result.projected,
            "out": out,
        },
        message="reconstructed density matrix",
        fmt=config.output_format,
    )


@reconstruct.command("pure")
@click.option("--table", "table_path", required=True, type=click.Path(dir_okay=False), help="Three-axis intensity table")
@click.option("--seed", type=int, default=None, help="Seed for random restarts (default SPINTOMO_SEED)")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="State file to write")
@click.pass_context
@handle_spin_exceptions
def reconstruct_pure(ctx, table_path, seed, out):
    """Phase fit of a pure state to a tripod of axes."""
    config = get_run_config(ctx, "reconstruct pure", seed=seed, paths={"table": table_path, "out": out})
    table = text_store.read_table(table_path)
    result = recon_pure_service.reconstruct_pure(table, config.seed)
    text_store.write_state(out, result.state)
    CommandResponse.success(
        data={
            "spin": table.spin.label,
            "residual": result.residual,
            "seeds_tried": result.seeds_tried,
            "out": out,
        },
        message="reconstructed pure state",
        fmt=config.output_format,
    )


@click.command("partners")
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False), help="Pure state file")
@click.option("--third-axis", default="y", show_default=True, help="Selecting axis: x, y, z or theta,phi")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Partner set file to write")
@click.pass_context
@handle_spin_exceptions
def partners(ctx, state_path, third_axis, out):
    """Nearby-axis partner candidates and the one the third axis selects."""
    config = get_run_config(ctx, "partners", paths={"state": state_path, "out": out})
    psi = text_store.read_state(state_path)
    candidates = recon_pure_service.partners_nearby_axes(psi)
    table = measurement_service.measure_exact(psi, QuorumSpec.explicit([parse_axis(third_axis)]))
    selected = recon_pure_service.select_partner(candidates, table)
    if out:
        text_store.write_partners(out, selected)
    CommandResponse.success(
        data={
            "spin": psi.spin.label,
            "patterns": 2 ** psi.spin.two_s,
            "candidates": len(selected),
            "selected": selected.selected,
            "selected_pattern": PartnerSet.pattern_label(selected.signs[selected.selected]),
        },
        message=f"{len(selected)} partner candidates",
        fmt=config.output_format,
    )


@click.command("uniqueness")
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False), help="Pure state file")
@click.option("--trials", type=int, default=200, show_default=True, help="Random starts")
@click.option("--seed", type=int, default=None, help="Seed (default SPINTOMO_SEED)")
@click.pass_context
@handle_spin_exceptions
def uniqueness(ctx, state_path, trials, seed):
    """Search for non-constant phase polynomials that leave all three intensity sets unchanged."""
    config = get_run_config(ctx, "uniqueness", seed=seed, paths={"state": state_path})
    psi = text_store.read_state(state_path)
    report = recon_pure_service.uniqueness_probe(psi, trials, config.seed)
    CommandResponse.success(
        data=report,
        message=f"best gauge-projected defect {report.best_ratio:.3e}",
        fmt=config.output_format,
    )
