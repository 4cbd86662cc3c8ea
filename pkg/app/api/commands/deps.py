from typing import Optional

import click

from app.core.config import settings
from app.exceptions.spin_exceptions import ValidationError
from app.schemas.cli import RunConfig
from app.schemas.measurement import QuorumSpec
from app.schemas.spin import SpinValue
from app.services.common.text_store import text_store
from app.services.spin.measurement import measurement_service
from app.utils.utils import parse_cone


def get_run_config(ctx: click.Context, subcommand: str, **fields) -> RunConfig:
    """RunConfig of this invocation; the seed falls back to SPINTOMO_SEED"""
    root = ctx.find_root().obj or {}
    seed = fields.pop("seed", None)
    paths = {key: value for key, value in fields.pop("paths", {}).items() if value is not None}
    return RunConfig(
        subcommand=subcommand,
        seed=settings.SEED if seed is None else seed,
        paths=paths,
        output_format=root.get("format", "table"),
        tolerances=root.get("tolerances", {}),
        **fields,
    )


def get_quorum(
    spin: SpinValue,
    quorum_path: Optional[str] = None,
    cone: Optional[str] = None,
    tripod: bool = False,
) -> QuorumSpec:
    """Exactly one of a quorum file, a cone description or the {x, y, z} tripod"""
    chosen = sum(bool(option) for option in (quorum_path, cone, tripod))
    if chosen != 1:
        raise ValidationError(message="Give exactly one of --quorum, --cone or --tripod")
    if quorum_path:
        return text_store.read_quorum(quorum_path)
    if cone:
        count, theta = parse_cone(cone)
        return measurement_service.cone_axes(spin, count, theta)
    return measurement_service.tripod_axes()
