import io

import click

from app.api.commands.deps import get_run_config
from app.exceptions.handlers import handle_spin_exceptions
from app.schemas.response import CommandResponse
from app.services.common.text_store import text_store
from app.services.spin.particle import particle_service


@click.command("particle-demo")
@click.option("--n", "n_points", type=int, default=256, show_default=True, help="Grid points (even)")
@click.option("--l", "half_width", type=float, default=10.0, show_default=True, help="Grid half width L")
@click.option("--mean-x", type=float, default=None, help="Also report the coherent-state alpha for <x>")
@click.option("--mean-p", type=float, default=0.0, show_default=True, help="<p> for the coherent-state alpha")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report with density tables")
@click.pass_context
@handle_spin_exceptions
def particle_demo(ctx, n_points, half_width, mean_x, mean_p, out):
    """Odd-parity wave function versus its complex conjugate on a grid."""
    config = get_run_config(ctx, "particle-demo", paths={"out": out})
    psi = particle_service.make_counterexample(n_points, half_width)
    report = particle_service.pauli_partner_check(psi)
    data = report.to_record()
    if mean_x is not None:
        data["alpha"] = particle_service.coherent_alpha(mean_x, mean_p)
    text = CommandResponse.success(
        data=data,
        message="same densities, distinct states" if report.passed else "check failed",
        fmt=config.output_format,
    )
    if out:
        position, momentum = particle_service.density_tables(psi)
        buffer = io.StringIO()
        buffer.write("".join(f"# {line}\n" for line in text.splitlines()))
        buffer.write("# position\n")
        position.to_csv(buffer, sep=" ", index=False, float_format="%.16e")
        buffer.write("# momentum\n")
        momentum.to_csv(buffer, sep=" ", index=False, float_format="%.16e")
        text_store.write_text(out, buffer.getvalue())
