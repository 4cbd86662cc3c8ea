import click

from app.api.commands.deps import get_quorum, get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.exceptions.spin_exceptions import ValidationError
from app.schemas.response import CommandResponse
from app.services.common.text_store import text_store
from app.services.spin.core import spin_core_service
from app.services.spin.measurement import measurement_service


@click.command("gen")
@click.option("--spin", "spin_text", required=True, help="Spin s, e.g. 1/2, 1, 3/2")
@click.option("--kind", type=click.Choice(["pure", "mixed"]), default="pure", show_default=True)
@click.option("--rank", type=int, default=None, help="Rank of a mixed state (default full)")
@click.option("--seed", type=int, default=None, help="Random seed (default SPINTOMO_SEED)")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="State file to write")
@click.pass_context
@handle_spin_exceptions
def gen(ctx, spin_text, kind, rank, seed, out):
    """Generate a random pure state or density matrix."""
    config = get_run_config(ctx, "gen", spin=spin_text, seed=seed, paths={"out": out})
    spin = config.spin_value
    if kind == "pure":
        if rank is not None:
            raise ValidationError(message="--rank applies to mixed states only")
        text_store.write_state(out, spin_core_service.random_pure(spin, config.seed))
    else:
        text_store.write_density(out, spin_core_service.random_density(spin, config.seed, rank))
    CommandResponse.success(
        data={"spin": spin.label, "kind": kind, "seed": config.seed, "out": out},
        message=f"wrote {kind} state",
        fmt=config.output_format,
    )


@click.command("measure")
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False), help="State or density file")
@click.option("--quorum", "quorum_path", type=click.Path(dir_okay=False), default=None, help="Quorum file")
@click.option("--cone", default=None, help="Cone quorum, e.g. K=5,theta=1.0")
@click.option("--tripod", is_flag=True, help="Use the {x, y, z} tripod")
@click.option("--shots", type=int, default=None, help="Shots per axis; exact probabilities when omitted")
@click.option("--seed", type=int, default=None, help="Sampling seed (default SPINTOMO_SEED)")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Intensity table to write")
@click.pass_context
@handle_spin_exceptions
def measure(ctx, state_path, quorum_path, cone, tripod, shots, seed, out):
    """Simulate Stern-Gerlach intensities of a state on a quorum."""
    config = get_run_config(
        ctx, "measure", shots=shots, seed=seed, paths={"state": state_path, "quorum": quorum_path, "out": out}
    )
    rho = text_store.read_density(state_path)
    quorum = get_quorum(rho.spin, quorum_path, cone, tripod)
    if config.shots is None:
        table = measurement_service.measure_exact(rho, quorum)
    else:
        table = measurement_service.measure_sampled(rho, quorum, config.shots, config.seed)
    text_store.write_table(out, table)
    CommandResponse.success(
        data={"spin": rho.spin.label, "axes": len(quorum), "mode": table.mode.value, "shots": table.shots, "out": out},
        message="wrote intensity table",
        fmt=config.output_format,
    )
