import click

from app.api.commands.deps import get_quorum, get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.schemas.response import CommandResponse
from app.services.common.text_store import text_store
from app.services.spin.recon_mixed import STRATEGIES, recon_mixed_service


@click.command("certify")
@click.option("--spin", "spin_text", required=True, help="Spin s, e.g. 1/2, 1, 3/2")
@click.option("--quorum", "quorum_path", type=click.Path(dir_okay=False), default=None, help="Quorum file")
@click.option("--cone", default=None, help="Cone quorum, e.g. K=5,theta=1.0")
@click.option("--tripod", is_flag=True, help="Use the {x, y, z} tripod")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the report here")
@click.pass_context
@handle_spin_exceptions
def certify(ctx, spin_text, quorum_path, cone, tripod, out):
    """Rank, deficit and condition number of a quorum's measurement map."""
    config = get_run_config(ctx, "certify", spin=spin_text, paths={"quorum": quorum_path, "out": out})
    spin = config.spin_value
    quorum = get_quorum(spin, quorum_path, cone, tripod)
    certificate = recon_mixed_service.certify_quorum(spin, quorum)
    verdict = "injective" if certificate.injective else "not injective"
    CommandResponse.success(
        data=certificate,
        message=f"{verdict}: rank {certificate.rank} of {certificate.parameters}, deficit {certificate.deficit}",
        fmt=config.output_format,
        out=out,
    )


@click.command("design")
@click.option("--spin", "spin_text", required=True, help="Spin s, e.g. 1/2, 1, 3/2")
@click.option("--axes", "axis_count", type=int, required=True, help="Number of axes K")
@click.option("--strategy", type=click.Choice(STRATEGIES), default="cone-scan", show_default=True)
@click.option("--seed", type=int, default=None, help="Seed for random-frames (default SPINTOMO_SEED)")
@click.option("--grid-points", type=int, default=None, help="Cone-scan grid size")
@click.option("--candidates", type=int, default=None, help="Random-frames candidate count")
@click.option("--refine/--no-refine", default=None, help="Refine the best cone angle")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Quorum file to write")
@click.pass_context
@handle_spin_exceptions
def design(ctx, spin_text, axis_count, strategy, seed, grid_points, candidates, refine, out):
    """Search for the best-conditioned injective quorum of K axes."""
    config = get_run_config(ctx, "design", spin=spin_text, seed=seed, paths={"out": out})
    result = recon_mixed_service.design_axes(
        config.spin_value,
        axis_count,
        strategy=strategy,
        seed=config.seed,
        grid_points=grid_points,
        candidates=candidates,
        refine=refine,
    )
    if out:
        text_store.write_quorum(out, result.quorum)
    record = result.to_record()
    record.pop("quorum")
    CommandResponse.success(
        data=record,
        message=f"condition number {result.condition_number:.6g}",
        fmt=config.output_format,
    )
