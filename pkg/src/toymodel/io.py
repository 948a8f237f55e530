"""JSON readers and writers for states, measurements, scenarios and joints.

Floats are written with 17 significant digits so files round-trip exactly.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import FormatError, ToyModelError
from .measurements import GenMeasurement
from .multisystem import JointDist
from .states import EpistemicDist, FiducialSet


def _num(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if not math.isfinite(f):
        raise FormatError(f"non-finite value {f}")
    if f == int(f) and abs(f) < 1e16:
        return f"{int(f)}.0"
    return format(f, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with full-precision floats; short numeric lists stay on one line."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_num(v) for v in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return _num(obj)


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: expected a JSON object")
    return data


def _field(data: dict, key: str, where: str = "file"):
    if key not in data:
        raise FormatError(f"{where}: missing field {key!r}")
    return data[key]


def _int(v, name):
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{name} must be an integer")
    return v


def _reals(v, name) -> np.ndarray:
    try:
        arr = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{name} must contain only numbers") from exc
    if arr.dtype == object:
        raise FormatError(f"{name} is ragged")
    return arr


def state_from_dict(data: dict) -> EpistemicDist | FiducialSet:
    """Either an EpistemicDist (``P`` key) or a FiducialSet (``Q`` key)."""
    p = _int(_field(data, "p", "state"), "p")
    if "P" in data and "Q" in data:
        raise FormatError("state: give either P or Q, not both")
    if "P" in data:
        w = _reals(data["P"], "P")
        if w.ndim != 1 or w.size != p * p:
            raise FormatError(f"P must be a flat list of {p * p} reals")
        mode = data.get("mode", "standard")
        if mode not in ("standard", "extended"):
            raise FormatError(f"unknown mode {mode!r}")
        return EpistemicDist(p, w.reshape(p, p), mode)
    if "Q" in data:
        q = _reals(data["Q"], "Q")
        if q.shape != (p + 1, p):
            raise FormatError(f"Q must be {p + 1} lists of {p} reals")
        return FiducialSet(p, q)
    raise FormatError("state: missing field 'P' or 'Q'")


def state_to_dict(state: EpistemicDist | FiducialSet) -> dict:
    if isinstance(state, FiducialSet):
        return {"p": state.p, "Q": [list(row) for row in state.q]}
    return {"p": state.p, "mode": state.mode, "P": list(state.weights.ravel())}


def measurement_from_dict(data: dict, tol: float = 1e-6) -> GenMeasurement:
    p = _int(_field(data, "p", "measurement"), "p")
    if p != 2:
        raise FormatError("measurement files need p = 2")
    r = _field(data, "r", "measurement")
    if isinstance(r, bool) or not isinstance(r, (int, float)):
        raise FormatError("r must be a number")
    S = _field(data, "S", "measurement")
    if isinstance(S, dict):
        S = _field(S, "Q", "measurement S")
    yes = state_from_dict({"p": p, "Q": S})
    return GenMeasurement(yes, float(r), tol=tol)


def measurement_to_dict(M: GenMeasurement) -> dict:
    return {"p": 2, "r": M.r, "S": [list(row) for row in M.yes_state.q]}


def scenario_from_dict(data: dict, tol: float = 1e-6) -> tuple[GenMeasurement, GenMeasurement]:
    s = _field(data, "S", "scenario")
    sp = _field(data, "Sprime", "scenario")
    if not isinstance(s, dict) or not isinstance(sp, dict):
        raise FormatError("scenario: S and Sprime must be measurement objects")
    return measurement_from_dict(s, tol), measurement_from_dict(sp, tol)


def joint_from_dict(data: dict) -> JointDist:
    p = _int(_field(data, "p", "joint"), "p")
    n = _int(_field(data, "n", "joint"), "n")
    w = _reals(_field(data, "P", "joint"), "P")
    if n < 1 or w.ndim != 1 or w.size != p ** (2 * n):
        raise FormatError(f"P must be a flat list of {p}^(2n) reals")
    mode = data.get("mode", "standard")
    return JointDist(p, n, w.reshape((p,) * (2 * n)), mode)


def joint_to_dict(J: JointDist) -> dict:
    return {"p": J.p, "n": J.n, "P": list(J.weights.ravel())}


def load(path, kind: str, **kw):
    data = read_json(path)
    reader = {"state": state_from_dict, "measurement": measurement_from_dict,
              "scenario": scenario_from_dict, "joint": joint_from_dict}[kind]
    try:
        return reader(data, **kw)
    except (FormatError, ToyModelError):
        raise
    except (TypeError, KeyError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
