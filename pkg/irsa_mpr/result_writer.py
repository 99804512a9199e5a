"""
result_writer.py
----------------
Serialises command results: CSV for sweeps, JSON for single results.

Numbers in CSV cells carry 9 significant digits and every CSV starts with a
header row. Output goes to the given file, or to stdout when no path is set.
"""

# std modules
import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

# universal imports
from utils.config import logger

# local imports
from errors import FileAccessError


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buffer.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return value.as_posix()
    return value


def render_json(obj: dict) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise FileAccessError(f"Could not write {out}: {e}") from e
    logger.info(f"Wrote {out}")
