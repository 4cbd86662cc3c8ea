import click

from app.api.commands.deps import get_quorum, get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.schemas.response import CommandResponse
from app.services.common.text_store import text_store
from app.services.spin.dynamics import dynamics_service
from app.utils.utils import parse_hamiltonian


@click.command("dynamics")
@click.option("--state", "state_path", required=True, type=click.Path(dir_okay=False), help="State or density file")
@click.option("--hamiltonian", "hamiltonian_spec", default="zeeman:omega=1.0,axis=z", show_default=True,
              help="zeeman:omega=..,axis=..[,kappa=..] or quadratic:omega=..,kappa=..")
@click.option("--t0", type=float, default=0.0, show_default=True)
@click.option("--t1", type=float, default=10.0, show_default=True)
@click.option("--steps", type=int, default=200, show_default=True)
@click.option("--quorum", "quorum_path", type=click.Path(dir_okay=False), default=None, help="Quorum file")
@click.option("--cone", default=None, help="Cone quorum, e.g. K=5,theta=1.0")
@click.option("--tripod", is_flag=True, help="Use the {x, y, z} tripod")
@click.option("--check-closure", is_flag=True, help="Reconstruct, propagate and compare at every step")
@click.option("--pure", is_flag=True, help="Closure through pure-state reconstruction (tripod quorum)")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Trajectory file (columns t k m p)")
@click.pass_context
@handle_spin_exceptions
def dynamics(ctx, state_path, hamiltonian_spec, t0, t1, steps, quorum_path, cone, tripod, check_closure, pure, out):
    """Quorum trajectory under a Hamiltonian and the closure of its equations of motion."""
    config = get_run_config(ctx, "dynamics", paths={"state": state_path, "quorum": quorum_path, "out": out})
    state = text_store.read_state(state_path) if pure else text_store.read_density(state_path)
    hamiltonian = parse_hamiltonian(hamiltonian_spec, state.spin)
    quorum = get_quorum(state.spin, quorum_path, cone, tripod)
    times = dynamics_service.time_grid(t0, t1, steps)

    trajectory = dynamics_service.quorum_trajectory(state, hamiltonian, times, quorum)
    if out:
        text_store.write_frame(out, trajectory.to_frame(), header=f"spin {state.spin.two_s} {hamiltonian.label}")

    conservation = dynamics_service.conservation_check(state, hamiltonian, times)
    data = {"spin": state.spin.label, "hamiltonian": hamiltonian.label, "steps": steps, **conservation.to_record()}
    if check_closure:
        closure = dynamics_service.closure_check(trajectory, hamiltonian, pure)
        data["closure_max_deviation"] = closure.max_deviation
    CommandResponse.success(data=data, message="trajectory computed", fmt=config.output_format)
