import json
from typing import Any, Optional

import click

from app.schemas.base import to_plain

FORMATS = ("table", "records")


class CommandResponse:
    """Command output handler; reports go to stdout, diagnostics to the log on stderr"""

    @staticmethod
    def render(data: Any = None, message: Optional[str] = None, fmt: str = "table", code: int = 0) -> str:
        payload = to_plain(data) if data is not None else None
        if fmt == "records":
            record = {"code": code, "message": message or "Success"}
            if payload is not None:
                record["data"] = payload
            return json.dumps(record)
        lines = [message] if message else []
        if isinstance(payload, dict):
            width = max((len(key) for key in payload), default=0)
            for key, value in payload.items():
                lines.append(f"{key:<{width}}  {_cell(value)}")
        elif isinstance(payload, list):
            lines.extend(_cell(item) for item in payload)
        elif payload is not None:
            lines.append(_cell(payload))
        return "\n".join(lines)

    @staticmethod
    def success(data: Any = None, message: Optional[str] = None, fmt: str = "table", out: Optional[str] = None) -> str:
        """Print the report, and write it to out when given"""
        text = CommandResponse.render(data, message, fmt)
        click.echo(text)
        if out:
            from app.services.common.text_store import text_store

            text_store.write_text(out, text + "\n")
        return text


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if isinstance(value, dict):
        return " ".join(f"{key}={_cell(item)}" for key, item in value.items())
    if isinstance(value, list):
        return "[" + ", ".join(_cell(item) for item in value) + "]"
    return str(value)
