"""Binary measurements "is the system in state S?" for p = 2."""

from __future__ import annotations

from typing import Literal

import numpy as np

from .errors import InvalidStateError, UndefinedByModelError
from .measures import NUMERIC_PURE_TOL, measure_n
from .states import EpistemicDist, FiducialSet, canonical_of, p_to_q

Outcome = Literal["yes", "no"]

MATCH_TOL = 1e-9


def complement(S: FiducialSet) -> FiducialSet:
    """``Q_i(x) -> 1 - Q_i(x)``; equivalently ``P -> 1/2 - P``."""
    if S.p != 2:
        raise InvalidStateError("complement is defined only for p = 2")
    return FiducialSet(2, 1.0 - S.q)


def complement_dist(P: EpistemicDist) -> EpistemicDist:
    if P.p != 2:
        raise InvalidStateError("complement is defined only for p = 2")
    return EpistemicDist(2, 0.5 - P.weights, mode="extended")


def mix(A: FiducialSet, B: FiducialSet, w: float) -> FiducialSet:
    """Convex combination ``w A + (1 - w) B``."""
    if not 0.0 <= w <= 1.0:
        raise InvalidStateError(f"mixing weight {w} outside [0, 1]")
    if A.p != B.p:
        raise InvalidStateError("cannot mix states of different type")
    return FiducialSet(A.p, w * A.q + (1.0 - w) * B.q)


def rotate(S: FiducialSet) -> FiducialSet:
    """Relabel X_b -> X_a -> X_a + X_b -> X_b (p = 2).

    The distribution that belonged to X_b moves to X_a, that of X_a to
    X_a + X_b, and that of X_a + X_b to X_b.
    """
    if S.p != 2:
        raise InvalidStateError("rotation is defined only for p = 2")
    return FiducialSet(2, S.q[[1, 2, 0]])


class GenMeasurement:
    """A yes/no measurement built from a pure p = 2 state and its complement."""

    __slots__ = ("yes_state", "no_state", "r")

    def __init__(self, yes_state: FiducialSet, r: float, tol: float = NUMERIC_PURE_TOL):
        if yes_state.p != 2:
            raise InvalidStateError("generalized measurements exist only for p = 2")
        n = measure_n(yes_state, r)
        if abs(n - 0.5) > tol:
            raise InvalidStateError(f"state is not pure at r={r}: N_r = {n!r}")
        self._set(yes_state, complement(yes_state), float(r))

    def _set(self, yes, no, r):
        object.__setattr__(self, "yes_state", yes)
        object.__setattr__(self, "no_state", no)
        object.__setattr__(self, "r", r)

    @classmethod
    def unchecked(cls, yes_state: FiducialSet, no_state: FiducialSet, r: float) -> GenMeasurement:
        """Bypass validation. Only for probing what breaks when invariants fail."""
        m = object.__new__(cls)
        m._set(yes_state, no_state, float(r))
        return m

    def __setattr__(self, name, value):
        raise AttributeError("GenMeasurement is immutable")

    def __repr__(self):
        return f"GenMeasurement(r={self.r!r}, S={self.yes_state.q.tolist()})"

    def complemented(self) -> GenMeasurement:
        """The same question with yes and no exchanged."""
        return GenMeasurement(self.no_state, self.r)


def prob_yes(M: GenMeasurement, state: FiducialSet | EpistemicDist) -> float:
    """Probability of answering "yes" to "are you in S?".

    Defined for canonical pure states (``Q_i(x)`` of S when X_i = x is
    known), for S itself (1), for S-perp (0), and for mixtures of S and
    its complement (the mixing weight). Anything else raises.
    """
    if isinstance(state, EpistemicDist):
        state = p_to_q(state)
    if state.p != 2:
        raise UndefinedByModelError("generalized measurements act on p = 2 systems")
    canon = canonical_of(state)
    if canon is not None:
        i, x = canon
        return float(M.yes_state.q[i, x])
    if state.allclose(M.yes_state, MATCH_TOL):
        return 1.0
    if state.allclose(M.no_state, MATCH_TOL):
        return 0.0
    w = _mixture_weight(state, M.yes_state)
    if w is not None:
        return w
    raise UndefinedByModelError("outcome probability not defined by the model for this input")


def _mixture_weight(state: FiducialSet, S: FiducialSet) -> float | None:
    perp = 1.0 - S.q
    d = S.q - perp
    norm = float(np.sum(d * d))
    if norm < 1e-24:
        return None
    w = float(np.sum((state.q - perp) * d) / norm)
    if not -MATCH_TOL <= w <= 1 + MATCH_TOL:
        return None
    if np.abs(perp + w * d - state.q).max() > MATCH_TOL:
        return None
    return min(max(w, 0.0), 1.0)


def update_after(M: GenMeasurement, outcome: Outcome) -> FiducialSet:
    """Post-measurement state: S after "yes", S-perp after "no"."""
    if outcome == "yes":
        return M.yes_state
    if outcome == "no":
        return M.no_state
    raise ValueError(f"outcome must be 'yes' or 'no', got {outcome!r}")
