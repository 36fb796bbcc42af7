"""CSV and JSON rendering of sweep rows and reports."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

from wilsonnev.errors import ConfigError
from wilsonnev.logger import get_logger
from wilsonnev.nevanlinna import CharacteristicRow
from wilsonnev.wilson_counting import WilsonCountRow

log = get_logger(__name__)

CHARACTERISTIC_FIELDS = ("r", "m", "N", "T", "quadrature_error")
COUNT_FIELDS = ("r", "n_W", "n_W_tilde", "N_W", "N_W_tilde")


def format_number(value: Any) -> str:
    """Integers as they are, reals with 17 significant digits."""
    if isinstance(value, bool | int):
        return str(int(value))
    return f"{float(value):.17g}"


def _fields(rows: Sequence[Any]) -> tuple[str, ...]:
    if not rows:
        return CHARACTERISTIC_FIELDS
    if isinstance(rows[0], CharacteristicRow):
        return CHARACTERISTIC_FIELDS
    if isinstance(rows[0], WilsonCountRow):
        return COUNT_FIELDS
    msg = f"no row layout for {type(rows[0]).__name__}"
    raise ConfigError(msg)


def rows_to_csv(rows: Sequence[Any], fields: Sequence[str] | None = None) -> str:
    fields = tuple(fields or _fields(rows))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([format_number(getattr(row, name)) for name in fields])
    return buffer.getvalue()


def rows_to_json(rows: Sequence[Any], fields: Sequence[str] | None = None) -> str:
    fields = tuple(fields or _fields(rows))
    records = [{name: asdict(row)[name] for name in fields} for row in rows]
    return json.dumps(records, indent=2) + "\n"


def render_rows(rows: Sequence[Any], fmt: str = "csv") -> str:
    """
    Render CharacteristicRow or WilsonCountRow rows.

    Raises
    ------
    ConfigError
        On an unknown format.
    """
    if fmt == "csv":
        return rows_to_csv(rows)
    if fmt == "json":
        return rows_to_json(rows)
    msg = f"unknown output format {fmt!r}"
    raise ConfigError(msg)


def render_document(document: Any) -> str:
    """JSON of a mapping or of an object with a ``to_json`` method."""
    data = document.to_json() if hasattr(document, "to_json") else document
    return json.dumps(data, indent=2) + "\n"


def write_output(text: str, out: Path | None) -> None:
    """Write to ``out`` or to stdout when it is None."""
    if out is None:
        print(text, end="")  # noqa: T201
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    msg = f"Wrote {out}."
    log.info(msg)
