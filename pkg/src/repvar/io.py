"""JSON and JSON-lines serialization of points, chains and reports."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .extmoduli import RepPoint
from .liegroup import Family, GroupSpec

SCHEMA_VERSION = 1


class FormatError(ValueError):
    pass


def to_jsonable(obj):
    """Recursively convert numpy values, complex numbers and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if hasattr(obj, "value"):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)


def point_to_json(point: RepPoint) -> dict:
    return {
        "family": point.spec.family.value,
        "n": point.spec.n,
        "scale": point.spec.scale,
        "genus": point.genus,
        "entries": [[float(z.real), float(z.imag)] for z in point.mats.reshape(-1)],
    }


def point_from_json(data: dict, spec: GroupSpec | None = None) -> RepPoint:
    try:
        n, genus, entries = int(data["n"]), int(data["genus"]), data["entries"]
    except KeyError as exc:
        raise FormatError(f"point file missing field {exc.args[0]!r}") from None
    if spec is None:
        family = Family(data.get("family", Family.GENERAL_LINEAR.value))
        spec = GroupSpec(family, n, float(data.get("scale", 1.0)))
    elif spec.n != n:
        raise FormatError(f"point has n = {n} but the configured group has n = {spec.n}")
    if len(entries) != 2 * genus * n * n:
        raise FormatError(f"expected {2 * genus * n * n} entries, got {len(entries)}")
    arr = np.array([complex(re, im) for re, im in entries]).reshape(2 * genus, n, n)
    return RepPoint(spec, arr)


def save_point(path, point: RepPoint) -> None:
    Path(path).write_text(dumps(point_to_json(point)) + "\n")


def load_point(path, spec: GroupSpec | None = None) -> RepPoint:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return point_from_json(data, spec)


def write_points_jsonl(path, points) -> None:
    with open(path, "w") as fh:
        for p in points:
            fh.write(json.dumps(to_jsonable(point_to_json(p)), sort_keys=True) + "\n")


def read_points_jsonl(path, spec: GroupSpec | None = None) -> list:
    with open(path) as fh:
        return [point_from_json(json.loads(line), spec) for line in fh if line.strip()]


def report(command: str, config: dict, body: dict, passed: bool = True) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": config, "passed": passed, "result": body}


def write_report(path, rep: dict) -> None:
    Path(path).write_text(dumps(rep) + "\n")
