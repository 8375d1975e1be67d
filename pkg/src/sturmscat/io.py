"""JSON documents for coefficient sets and scattering problems, CSV helpers.

A cell block is ``{"breakpoints": [...], "inv_p": [...], "q": [...]}``.  A
scattering problem is

    {"background": <cell block on [0, 1]>,
     "perturbation": {"f": {"breakpoints": [...], "values": [...]},
                      "g": {"breakpoints": [...], "values": [...]},
                      "D": <support radius>}}

Floats are written with ``repr``, the shortest decimal string that reads back
to the same double, so documents round-trip bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path

from .coefficients import PeriodicBackground, Perturbation, PiecewiseCoefficients, Profile
from .errors import ConfigError
from .scattering import ScatteringProblem

__all__ = [
    "block_from_dict",
    "block_to_dict",
    "profile_from_dict",
    "profile_to_dict",
    "problem_from_dict",
    "problem_to_dict",
    "load_json",
    "load_problem",
    "dump_problem",
    "dumps",
    "document_hash",
    "format_float",
    "write_csv",
    "parse_complex",
]


def _numbers(doc: dict, key: str, where: str) -> list[float]:
    if key not in doc:
        raise ConfigError("missing field", f"{where}.{key}")
    vals = doc[key]
    if not isinstance(vals, list) or not vals:
        raise ConfigError("expected a nonempty list of numbers", f"{where}.{key}")
    out = []
    for i, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(f"entry {i} is not a finite number", f"{where}.{key}")
        out.append(float(v))
    return out


def _mapping(doc, where: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError("expected an object", where)
    return doc


def block_from_dict(doc, where: str = "block") -> PiecewiseCoefficients:
    doc = _mapping(doc, where)
    bp = _numbers(doc, "breakpoints", where)
    ip = _numbers(doc, "inv_p", where)
    q = _numbers(doc, "q", where)
    try:
        return PiecewiseCoefficients(bp, ip, q)
    except ValueError as exc:
        raise ConfigError(str(exc), where) from None


def block_to_dict(block: PiecewiseCoefficients) -> dict:
    return {
        "breakpoints": block.breakpoints.tolist(),
        "inv_p": block.inv_p.tolist(),
        "q": block.q.tolist(),
    }


def profile_from_dict(doc, where: str) -> Profile:
    doc = _mapping(doc, where)
    try:
        return Profile(_numbers(doc, "breakpoints", where), _numbers(doc, "values", where))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), where) from None


def profile_to_dict(profile: Profile) -> dict:
    return {"breakpoints": profile.breakpoints.tolist(), "values": profile.values.tolist()}


def problem_from_dict(doc) -> PeriodicBackground | ScatteringProblem:
    """A bare cell block gives a background; a ``background`` document a problem.

    Without a ``perturbation`` entry the problem carries the trivial
    perturbation on ``[0, 1]``.
    """
    doc = _mapping(doc, "document")
    if "background" not in doc:
        if "breakpoints" in doc:
            return _background(doc, "document")
        raise ConfigError("missing field", "background")
    bg = _background(doc["background"], "background")
    if "perturbation" not in doc:
        return ScatteringProblem(bg, Perturbation.none(1.0))
    pd = _mapping(doc["perturbation"], "perturbation")
    if "D" not in pd:
        raise ConfigError("missing field", "perturbation.D")
    D = pd["D"]
    if isinstance(D, bool) or not isinstance(D, (int, float)):
        raise ConfigError("expected a number", "perturbation.D")
    f = profile_from_dict(pd["f"], "perturbation.f") if "f" in pd else Profile.zero(0.0, float(D))
    g = profile_from_dict(pd["g"], "perturbation.g") if "g" in pd else Profile.zero(0.0, float(D))
    try:
        pert = Perturbation(f, g, float(D))
    except ValueError as exc:
        raise ConfigError(str(exc), "perturbation") from None
    return ScatteringProblem(bg, pert)


def _background(doc, where) -> PeriodicBackground:
    block = block_from_dict(doc, where)
    try:
        return PeriodicBackground(block)
    except ValueError as exc:
        raise ConfigError(str(exc), where) from None


def problem_to_dict(obj) -> dict:
    if isinstance(obj, PeriodicBackground):
        return block_to_dict(obj.cell)
    if isinstance(obj, PiecewiseCoefficients):
        return block_to_dict(obj)
    if isinstance(obj, ScatteringProblem):
        pert = obj.perturbation
        return {
            "background": block_to_dict(obj.background.cell),
            "perturbation": {
                "f": profile_to_dict(pert.f),
                "g": profile_to_dict(pert.g),
                "D": pert.support,
            },
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc, indent: int | None = 2) -> str:
    return json.dumps(doc, indent=indent, allow_nan=True)


def load_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "config") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}", str(path)) from None


def load_problem(path):
    return problem_from_dict(load_json(path))


def dump_problem(obj, path) -> None:
    Path(path).write_text(dumps(problem_to_dict(obj)) + "\n")


def document_hash(obj) -> str:
    """SHA-256 of the canonical (sorted, compact) JSON form of a coefficient document."""
    doc = obj if isinstance(obj, dict) else problem_to_dict(obj)
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def format_float(x) -> str:
    """17 significant digits, enough to recover the double exactly."""
    if isinstance(x, (bool, int, str)):
        return str(x)
    return format(float(x), ".17g")


def write_csv(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def parse_complex(value, where: str) -> complex:
    """``[re, im]``, a bare real, or a string accepted by :class:`complex`."""
    if isinstance(value, bool):
        raise ConfigError("expected a complex number", where)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError("expected [re, im], a number or a complex literal", where)
