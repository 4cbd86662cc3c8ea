from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class ReportSchema(BaseModel):
    """Base for operation reports; fields are plain python values so they serialize directly"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def to_record(self) -> dict:
        """Flatten to a JSON-friendly mapping"""
        return {key: to_plain(value) for key, value in self.__dict__.items() if not key.startswith("_")}


def frozen_array(value: Any, dtype=complex) -> np.ndarray:
    """Copy to an ndarray of the given dtype and mark it read-only"""
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def to_plain(value: Any) -> Any:
    """Convert numpy / complex / nested schema values into JSON-friendly python values"""
    if isinstance(value, ReportSchema):
        return value.to_record()
    if isinstance(value, BaseModel):
        return {key: to_plain(item) for key, item in value.__dict__.items()}
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value
