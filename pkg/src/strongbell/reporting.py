"""Result serialization: JSON and CSV records, written atomically.

Records carry a ``schema_version`` and the fully resolved run configuration
including the seed, so any emitted file is reproducible from its own contents.
CSV numeric cells use 15 significant digits, which round-trips through a
double without drift; JSON floats use the exact shortest representation.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

from .core import InequalityReport

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "atomic_write_text",
    "default_output_dir",
    "read_record",
    "report_record",
    "resolve_output_path",
    "write_record",
]

OUTPUT_DIR_ENV = "STRONGBELL_OUTPUT_DIR"


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def resolve_output_path(out: str | os.PathLike) -> Path:
    """Relative paths land in the directory named by STRONGBELL_OUTPUT_DIR."""
    p = Path(out)
    return p if p.is_absolute() else default_output_dir() / p


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def _clean(value):
    """JSON-safe copy: tuples to lists, NaN to None."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


def report_record(command: str, report: InequalityReport, config: dict) -> dict:
    """Flat record for one inequality evaluation."""
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "inequality": report.name,
        "lhs": report.lhs,
        "bound": report.bound,
        "direction": report.direction,
        "violated": report.violated,
        "violation_factor": report.violation_factor,
        "stderr": report.stderr,
        "n_samples": report.n_samples,
        "details": report.details or {},
        "config": config,
    })


def _sig15(value) -> str:
    return format(float(value), ".15g")


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _sig15(value)
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(_clean(value), sort_keys=True)
    if value is None:
        return ""
    return str(value)


def write_record(path: str | os.PathLike, record: dict | list[dict],
                 fmt: str = "json") -> Path:
    """Serialize one record (or a list of rows for CSV) atomically."""
    path = Path(path)
    if fmt == "json":
        text = json.dumps(_clean(record), sort_keys=True, indent=2) + "\n"
        return atomic_write_text(path, text)
    if fmt == "csv":
        rows = record if isinstance(record, list) else [record]
        if not rows:
            raise ValueError("cannot write an empty CSV record set")
        columns = list(rows[0].keys())
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_cell(row.get(c)) for c in columns])
        return atomic_write_text(path, buf.getvalue())
    raise ValueError(f"unknown format {fmt!r}")


def read_record(path: str | os.PathLike):
    """Parse a previously written record file by extension."""
    path = Path(path)
    if path.suffix == ".json":
        return json.loads(path.read_text(encoding="utf-8"))
    if path.suffix == ".csv":
        with path.open(newline="", encoding="utf-8") as handle:
            return list(csv.DictReader(handle))
    raise ValueError(f"cannot infer format of {path}")
