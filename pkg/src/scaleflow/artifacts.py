#!/usr/bin/env python3
"""
SCALEFLOW - Artifacts (Readers, Writers and Digests)
CSV/JSON serialization of measures, cylinder measures and experiment tables with atomic
writes and SHA-256 file digests

Dependencies:
- measure_model.py: AtomicMeasure records (y, phi, mass)
- embedding.py: CylinderMeasure records
- periodization.py: ExperimentRow tables
- cli_runner.py: Writes every output file through this module

Provides:
- write_text (atomic temp-then-rename) and file_digest
- write_measure / read_measure (csv: y,phi,mass; json: list of triples)
- write_cylinder / read_cylinder (json object or long csv: ray_index,phi,y,h)
- write_table / read_table (csv: P,distance; json: list of objects)
- write_report (sorted-key JSON object), dump_profile (csv: tau,distance)

Formats: CSV has a header row, comma separators, LF line endings and floats printed with
17 significant digits. JSON is UTF-8 with lexicographic key order.
"""

import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .embedding import CylinderMeasure, YGrid
from .errors import InvalidInputError, OutputError
from .measure_model import AtomicMeasure
from .periodization import ExperimentRow

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")

PathLike = Union[str, Path]

MEASURE_HEADER = ("y", "phi", "mass")
CYLINDER_HEADER = ("ray_index", "phi", "y", "h")
TABLE_HEADER = ("P", "distance")


def format_float(value: float) -> str:
    """17 significant digits, locale independent"""
    return format(float(value), ".17g")


def _check_format(fmt: str) -> str:
    if fmt not in FORMATS:
        raise InvalidInputError(f"unknown format {fmt!r}, expected one of {FORMATS}")
    return fmt


# ---------------------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------------------


def write_text(path: PathLike, text: str) -> Path:
    """
    Write text atomically: a temp file in the target directory, then rename.

    Raises:
        OutputError: The directory or file is not writable
    """
    target = Path(path)
    tmp_name = None
    try:
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.chmod(tmp_name, 0o644)
        os.replace(tmp_name, target)
    except OSError as exc:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(f"cannot write {target}: {exc}") from exc
    logger.info("wrote %s (sha256 %s)", target, file_digest(target))
    return target


def file_digest(path: PathLike) -> str:
    """SHA-256 hex digest of a file, read in blocks"""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _csv_rows(text: str, header: Sequence[str]) -> List[List[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != tuple(header):
        raise InvalidInputError(f"expected CSV header {','.join(header)}")
    body = [row for row in rows[1:] if row]
    for row in body:
        if len(row) != len(header):
            raise InvalidInputError(f"CSV row {row} does not have {len(header)} fields")
    return body


def _json_text(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _json_load(text: str) -> Any:
    def reject(constant: str) -> float:
        raise InvalidInputError(f"non-finite value {constant} in JSON input")

    try:
        return json.loads(text, parse_constant=reject)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"malformed JSON: {exc}") from exc


def _finite(value: Any) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"not a number: {value!r}") from None
    if not math.isfinite(number):
        raise InvalidInputError(f"non-finite value {value!r}")
    return number


# ---------------------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------------------


def dump_measure(mu: AtomicMeasure, fmt: str = "csv") -> str:
    if _check_format(fmt) == "json":
        return _json_text([list(t) for t in mu.triples()])
    return _csv_text(MEASURE_HEADER, ([format_float(c) for c in t] for t in mu.triples()))


def write_measure(path: PathLike, mu: AtomicMeasure, fmt: str = "csv") -> Path:
    return write_text(path, dump_measure(mu, fmt))


def parse_measure(text: str, fmt: str = "csv") -> AtomicMeasure:
    """
    Raises:
        InvalidInputError: Malformed input, NaN/inf or nonpositive mass
    """
    if _check_format(fmt) == "json":
        records = _json_load(text)
        if not isinstance(records, list) or any(
            not isinstance(r, list) or len(r) != 3 for r in records
        ):
            raise InvalidInputError("measure JSON must be a list of [y, phi, mass] triples")
    else:
        records = _csv_rows(text, MEASURE_HEADER)
    triples = [tuple(_finite(c) for c in r) for r in records]
    for y, phi, mass in triples:
        if not mass > 0:
            raise InvalidInputError(f"atom at y={y}, phi={phi} has nonpositive mass {mass}")
    return AtomicMeasure.from_triples(triples)


def read_measure(path: PathLike, fmt: str = "csv") -> AtomicMeasure:
    return parse_measure(_read_text(path), fmt)


# ---------------------------------------------------------------------------------------
# Cylinder measures
# ---------------------------------------------------------------------------------------


def dump_cylinder(nu: CylinderMeasure, fmt: str = "json") -> str:
    if _check_format(fmt) == "json":
        return _json_text(nu.to_dict())
    ys = nu.grid.values
    rows = (
        (str(i), format_float(phi), format_float(y), format_float(h))
        for i, (phi, row) in enumerate(zip(nu.angles, nu.densities))
        for y, h in zip(ys, row)
    )
    return _csv_text(CYLINDER_HEADER, rows)


def write_cylinder(path: PathLike, nu: CylinderMeasure, fmt: str = "json") -> Path:
    return write_text(path, dump_cylinder(nu, fmt))


def _cylinder_from_csv(text: str, dy: float, rho: float) -> CylinderMeasure:
    body = _csv_rows(text, CYLINDER_HEADER)
    if not body:
        raise InvalidInputError("cylinder CSV has no rows")
    rays: Dict[int, List[float]] = {}
    angles: Dict[int, float] = {}
    ys: Dict[int, List[float]] = {}
    for index, phi, y, h in body:
        i = int(_finite(index))
        angles.setdefault(i, _finite(phi))
        ys.setdefault(i, []).append(_finite(y))
        rays.setdefault(i, []).append(_finite(h))
    order = sorted(rays)
    if order != list(range(len(order))):
        raise InvalidInputError("cylinder CSV ray indices must be 0..N-1")
    first = ys[0]
    if any(ys[i] != first for i in order):
        raise InvalidInputError("every ray must use the same y grid")
    grid = YGrid.from_bounds(first[0], first[-1], dy)
    return CylinderMeasure(
        tuple(angles[i] for i in order), grid, np.array([rays[i] for i in order]), rho
    )


def parse_cylinder(text: str, fmt: str = "json", dy: float = 0.05, rho: float = 1.0) -> CylinderMeasure:
    """
    Rebuild a cylinder measure.

    The JSON form is self-describing; the long CSV form carries neither the grid step
    nor rho, so they are passed in.

    Raises:
        InvalidInputError: Malformed input, NaN/inf or negative density
    """
    if _check_format(fmt) == "csv":
        return _cylinder_from_csv(text, dy, rho)
    payload = _json_load(text)
    try:
        grid = YGrid.from_bounds(
            _finite(payload["y_min"]), _finite(payload["y_max"]), _finite(payload["dy"])
        )
        densities = np.array([[_finite(h) for h in row] for row in payload["densities"]])
        return CylinderMeasure(
            tuple(_finite(a) for a in payload["angles"]), grid, densities, _finite(payload["rho"])
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed cylinder JSON: {exc}") from exc


def read_cylinder(path: PathLike, fmt: str = "json", dy: float = 0.05, rho: float = 1.0) -> CylinderMeasure:
    return parse_cylinder(_read_text(path), fmt, dy, rho)


# ---------------------------------------------------------------------------------------
# Experiment tables and reports
# ---------------------------------------------------------------------------------------


def dump_table(rows: Sequence[ExperimentRow], fmt: str = "csv") -> str:
    if _check_format(fmt) == "json":
        return _json_text([{"P": r.P, "distance": r.distance} for r in rows])
    return _csv_text(TABLE_HEADER, ((format_float(r.P), format_float(r.distance)) for r in rows))


def write_table(path: PathLike, rows: Sequence[ExperimentRow], fmt: str = "csv") -> Path:
    return write_text(path, dump_table(rows, fmt))


def parse_table(text: str, fmt: str = "csv") -> List[ExperimentRow]:
    if _check_format(fmt) == "json":
        records = _json_load(text)
        try:
            return [ExperimentRow(_finite(r["P"]), _finite(r["distance"])) for r in records]
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed table JSON: {exc}") from exc
    return [ExperimentRow(_finite(p), _finite(d)) for p, d in _csv_rows(text, TABLE_HEADER)]


def read_table(path: PathLike, fmt: str = "csv") -> List[ExperimentRow]:
    return parse_table(_read_text(path), fmt)


def dump_report(report: Dict[str, Any]) -> str:
    return _json_text(report)


def write_report(path: PathLike, report: Dict[str, Any]) -> Path:
    return write_text(path, dump_report(report))


def read_report(path: PathLike) -> Dict[str, Any]:
    payload = _json_load(_read_text(path))
    if not isinstance(payload, dict):
        raise InvalidInputError("report JSON must be an object")
    return payload


PROFILE_HEADER = ("tau", "distance")


def dump_profile(profile: Sequence[Tuple[float, float]]) -> str:
    """ADPT profile as CSV (tau,distance)"""
    return _csv_text(PROFILE_HEADER, ((format_float(t), format_float(d)) for t, d in profile))


def parse_profile(text: str) -> List[Tuple[float, float]]:
    return [(_finite(t), _finite(d)) for t, d in _csv_rows(text, PROFILE_HEADER)]
