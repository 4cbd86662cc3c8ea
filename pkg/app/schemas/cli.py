from typing import Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.spin import SpinValue


class RunConfig(BaseModel):
    """Validated options of one CLI invocation"""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    spin: Optional[str] = None
    paths: Dict[str, str] = Field(default_factory=dict)
    shots: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(..., ge=0)
    tolerances: Dict[str, float] = Field(default_factory=dict)
    output_format: Literal["table", "records"] = "table"

    @field_validator("spin")
    @classmethod
    def _spin_parses(cls, value):
        if value is not None:
            SpinValue.parse(value)
        return value

    @field_validator("tolerances")
    @classmethod
    def _positive(cls, value):
        for name, tolerance in value.items():
            if not tolerance > 0:
                raise ValueError(f"{name} must be positive")
        return value

    @property
    def spin_value(self) -> Optional[SpinValue]:
        return None if self.spin is None else SpinValue.parse(self.spin)
