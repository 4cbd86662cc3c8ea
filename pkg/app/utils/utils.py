import math
from typing import Dict, Optional, Tuple

from app.exceptions.spin_exceptions import ValidationError
from app.schemas.dynamics import Hamiltonian
from app.schemas.measurement import Axis
from app.schemas.spin import SpinValue

NAMED_AXES = {"x": Axis.x, "y": Axis.y, "z": Axis.z}


def parse_key_values(text: str) -> Dict[str, str]:
    """Parse 'a=1,b=2' into {'a': '1', 'b': '2'}"""
    result = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        if "=" not in item:
            raise ValidationError(message=f"Expected key=value, got '{item}'")
        key, value = item.split("=", 1)
        result[key.strip()] = value.strip()
    return result


def parse_float(text: str, name: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ValidationError(message=f"{name} must be a number, got '{text}'")
    if not math.isfinite(value):
        raise ValidationError(message=f"{name} must be finite, got '{text}'")
    return value


def parse_spin(text: str) -> SpinValue:
    return SpinValue.parse(text)


def parse_cone(text: str) -> Tuple[int, Optional[float]]:
    """Parse 'K=5,theta=1.0' (theta optional) into (K, theta)"""
    values = parse_key_values(text)
    unknown = set(values) - {"K", "k", "theta"}
    if unknown:
        raise ValidationError(message=f"Unknown cone parameter(s): {', '.join(sorted(unknown))}")
    raw_count = values.get("K", values.get("k"))
    if raw_count is None:
        raise ValidationError(message=f"Cone needs K=<count>, got '{text}'")
    try:
        count = int(raw_count)
    except ValueError:
        raise ValidationError(message=f"Cone axis count must be an integer, got '{raw_count}'")
    theta = parse_float(values["theta"], "theta") if "theta" in values else None
    return count, theta


def parse_axis(text: str) -> Axis:
    """'x', 'y', 'z' or 'theta,phi' in radians"""
    text = text.strip().lower()
    if text in NAMED_AXES:
        return NAMED_AXES[text]()
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(message=f"Axis must be x, y, z or 'theta,phi', got '{text}'")
    theta = parse_float(parts[0], "theta")
    if not 0.0 <= theta <= math.pi:
        raise ValidationError(message=f"theta must lie in [0, pi], got {theta}")
    return Axis(theta=theta, phi=parse_float(parts[1], "phi"))


def parse_hamiltonian(text: str, spin: SpinValue) -> Hamiltonian:
    """
    Parse a built-in Hamiltonian description

    zeeman:omega=1.0,axis=z             omega (n.S)
    zeeman:omega=1.0,axis=z,kappa=0.2   omega (n.S) + kappa Sz^2
    quadratic:omega=1.0,kappa=0.2       same, axis defaults to z
    axis is x, y, z, or given by theta=..,phi=..
    """
    from app.services.spin.dynamics import dynamics_service

    family, _, arguments = text.partition(":")
    family = family.strip().lower()
    if family not in ("zeeman", "quadratic"):
        raise ValidationError(message=f"Unknown Hamiltonian family '{family}', use zeeman or quadratic")
    values = parse_key_values(arguments)
    unknown = set(values) - {"omega", "axis", "kappa", "theta", "phi"}
    if unknown:
        raise ValidationError(message=f"Unknown Hamiltonian parameter(s): {', '.join(sorted(unknown))}")

    omega = parse_float(values.get("omega", "1.0"), "omega")
    if "theta" in values or "phi" in values:
        axis = parse_axis(f"{values.get('theta', '0')},{values.get('phi', '0')}")
    else:
        axis = parse_axis(values.get("axis", "z"))

    if family == "zeeman" and "kappa" not in values:
        return dynamics_service.zeeman(spin, omega, axis)
    kappa = parse_float(values.get("kappa", "0"), "kappa")
    return dynamics_service.quadratic(spin, omega, axis, kappa)


def parse_tolerance(text: str) -> Tuple[str, float]:
    """'NAME=value' for a settings tolerance or threshold; the value must be positive"""
    if "=" not in text:
        raise ValidationError(message=f"Expected NAME=value, got '{text}'")
    name, raw = text.split("=", 1)
    name = name.strip().upper().replace("-", "_")
    value = parse_float(raw, name)
    if value <= 0:
        raise ValidationError(message=f"{name} must be positive, got {value}")
    return name, value
