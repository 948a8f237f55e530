"""Text box diagrams for p = 2 epistemic states.

Layout: the top row holds x_a = 0, the bottom row x_a = 1; the left column
holds x_b = 0, the right column x_b = 1. So the question "is X_a = 0?" asks
about the upper two compartments.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidStateError
from .states import EpistemicDist, FiducialSet, q_to_p

CELL = 9
TOL = 1e-12


def _kind(w: np.ndarray) -> str:
    flat = w.ravel()
    if np.sum(np.abs(flat - 1.0) <= TOL) == 1 and np.all(np.abs(np.delete(flat, flat.argmax())) <= TOL):
        return "ontic"
    half = np.abs(flat - 0.5) <= TOL
    if half.sum() == 2 and np.all(np.abs(flat[~half]) <= TOL):
        return "canonical"
    return "general"


def _cell_text(v: float, kind: str) -> str:
    if kind == "ontic":
        return "###" if abs(v - 1.0) <= TOL else ""
    if kind == "canonical":
        return "1/2" if abs(v - 0.5) <= TOL else ""
    text = f"{v:.4g}"
    return f"{text}!" if v < -TOL else text


def render(state: EpistemicDist | FiducialSet) -> str:
    """ASCII 2x2 box. Negative weights carry a trailing ``!``."""
    if state.p != 2:
        raise InvalidStateError("box diagrams exist only for p = 2")
    P = q_to_p(state) if isinstance(state, FiducialSet) else state
    w = P.weights
    kind = _kind(w)
    border = "+" + "+".join(["-" * CELL] * 2) + "+"
    header = " " * 7 + " ".join(f"x_b={xb}".center(CELL) for xb in range(2))
    lines = [header, "      " + border]
    for xa in range(2):
        cells = [_cell_text(float(w[xa, xb]), kind).center(CELL) for xb in range(2)]
        lines.append(f"x_a={xa} |" + "|".join(cells) + "|")
        lines.append("      " + border)
    if kind == "general" and w.min() < -TOL:
        lines.append("! negative weight")
    return "\n".join(lines) + "\n"
