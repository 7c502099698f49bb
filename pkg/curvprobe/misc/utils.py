import csv
import dataclasses
import enum
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

from curvprobe.models.base import ConfigError
from curvprobe.models.curvature import CurvatureData, build_curvature

logger = logging.getLogger(__name__)

COMPONENT_LINE = re.compile(r"^R_([0-3])([0-3])([0-3])([0-3])\s*=\s*(\S+)$")


def format_float(value: float) -> str:
    """17 significant digits, JSON-safe spelling of non-finite values"""
    value = float(value)
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return f"{value:.17g}"


def to_plain(obj: Any) -> Any:
    """Recursively turn dataclasses, enums and numpy values into dicts, lists and Python scalars"""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(key): to_plain(value) for key, value in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_plain(item) for item in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """
    JSON text with floats at 17 significant digits and keys in insertion order.

    The json module offers no hook for float formatting, so numbers are written here.
    """
    obj = to_plain(obj) if _level == 0 else obj
    pad = " " * (indent * (_level + 1))
    closing = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(key)}: {dumps(value, indent, _level + 1)}" for key, value in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + closing + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(item, (int, float)) and not isinstance(item, bool) for item in obj):
            return "[" + ", ".join(dumps(item, indent, _level + 1) for item in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(item, indent, _level + 1) for item in obj) + "\n" + closing + "]"
    if isinstance(obj, float):
        return format_float(obj)
    return json.dumps(obj)


def build_report(schema_version: str, inputs_echo: Dict[str, Any], results: Any,
                 diagnostics: Optional[Dict[str, Any]] = None, warnings: Sequence[str] = ()) -> Dict[str, Any]:
    return {
        "schema_version": schema_version,
        "inputs_echo": inputs_echo,
        "results": results,
        "diagnostics": diagnostics or {},
        "warnings": list(warnings),
    }


def error_report(schema_version: str, error: Exception, inputs_echo: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "schema_version": schema_version,
        "error": {"type": type(error).__name__, "message": str(error)},
        "inputs_echo": inputs_echo,
    }


def _cell(value: Any) -> str:
    value = to_plain(value)
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def write_csv(stream: TextIO, rows: Iterable[Dict[str, Any]]):
    rows = list(rows)
    if not rows:
        return
    headers: List[str] = []
    for row in rows:
        headers += [key for key in row if key not in headers]
    writer = csv.DictWriter(stream, fieldnames=headers, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.items()})


def read_curvature_file(path: str) -> CurvatureData:
    """
    Parse a key-value curvature file, one `R_abcd = value` per line, `#` comments allowed.

    Components not listed are zero; listed ones are completed by the Riemann symmetries.

    :raises ConfigError: unreadable file, malformed line, duplicate key or non-numeric value
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"Cannot read curvature file {path!r}: {err}") from err

    components = []
    seen = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = COMPONENT_LINE.match(line)
        if match is None:
            raise ConfigError(f"{path}:{number}: expected 'R_abcd = value', got {raw.strip()!r}")
        index = tuple(int(match.group(i)) for i in range(1, 5))
        if index in seen:
            raise ConfigError(f"{path}:{number}: component R_{''.join(map(str, index))} given twice")
        seen.add(index)
        try:
            value = float(match.group(5))
        except ValueError as err:
            raise ConfigError(f"{path}:{number}: {match.group(5)!r} is not a number") from err
        if not math.isfinite(value):
            raise ConfigError(f"{path}:{number}: component value must be finite")
        components.append((index, value))
    logger.info("Read %d curvature components from %s", len(components), path)
    return build_curvature(components)
