"""CSV and manifest writing.

Floats are written with 17 significant digits so that every file parses
back to the exact doubles that produced it.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__
from .params import PhysicalConstants


def format_value(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) or hasattr(x, "__float__"):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header {len(header)}")
            writer.writerow([format_value(x) for x in row])
    return path


def _parse_cell(cell: str) -> Any:
    if cell == "":
        return math.nan
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path: str | Path) -> tuple[list[str], list[list[Any]]]:
    """Read a CSV written by :func:`write_csv`.

    Numbers come back as floats, booleans as bools, empty fields as nan and
    anything else as the original string.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[_parse_cell(cell) for cell in raw] for raw in reader]
    return header, rows


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(
    output: str | Path,
    config: dict[str, Any],
    consts: PhysicalConstants,
    command: Sequence[str] | None = None,
    started: str | None = None,
    extra: dict[str, Any] | None = None,
) -> Path:
    """Write ``<output>.manifest.json`` next to ``output``."""
    output = Path(output)
    manifest = {
        "output": output.name,
        "tool": "gie",
        "version": __version__,
        "command": list(command) if command is not None else sys.argv,
        "config": config,
        "constants": dataclasses.asdict(consts),
        "started_utc": started or utc_now(),
        "finished_utc": utc_now(),
    }
    if extra:
        manifest.update(extra)
    path = output.with_name(output.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str), encoding="utf-8")
    return path
