"""Predictability measures M_r (on weights) and N_r (on fiducial sets).

``M_r(P) = (sum_x P(x)^(r + 1))^(1/r)`` for r > -1, with the r = 0 value
``2^(-H(P))`` (base-2 Shannon entropy). Negative weights are only
meaningful when r + 1 is even, i.e. r an odd positive integer.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .errors import ConstantMeasureError, MeasureDomainError, TargetRangeError
from .states import EpistemicDist, FiducialSet, q_to_p

PURE_TOL = 1e-9
NUMERIC_PURE_TOL = 1e-6

R_LOWER = -1 + 1e-6
R_UPPER = 64.0
SOLVE_TOL = 1e-10


def is_odd_positive_int(r: float) -> bool:
    return r > 0 and float(r).is_integer() and int(r) % 2 == 1


def check_r(r: float) -> float:
    r = float(r)
    if not math.isfinite(r) or r <= -1:
        raise MeasureDomainError(f"measure needs r > -1, got {r}")
    return r


def measure_array(weights, r: float) -> np.ndarray:
    """M_r along the last axis of ``weights``.

    Entries that are negative while r is not an odd positive integer yield
    NaN; callers that care must reject them first.
    """
    w = np.asarray(weights, dtype=float)
    if r == 0:
        pos = w > 0
        safe = np.where(pos, w, 1.0)
        with np.errstate(invalid="ignore"):
            plogp = np.where(pos, w * np.log2(safe), np.where(w < 0, np.nan, 0.0))
        return np.exp2(np.sum(plogp, axis=-1))
    if is_odd_positive_int(r):
        # even power: well defined for signed weights
        s = np.sum(w ** (int(r) + 1), axis=-1)
        return s ** (1.0 / r)
    # M_r = m^((r+1)/r) * (sum (w/m)^(r+1))^(1/r) with m = max w; ratios in
    # [0, 1] and a sum >= 1 keep every r free of overflow and underflow
    m = np.max(w, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore"):
        s = np.sum(np.power(w / m, r + 1.0), axis=-1)
    return np.exp(((r + 1.0) * np.log(m[..., 0]) + np.log(s)) / r)


def weights_measure(weights: np.ndarray, r: float, extended: bool) -> float:
    r = check_r(r)
    w = np.asarray(weights, dtype=float).ravel()
    if extended and not is_odd_positive_int(r):
        raise MeasureDomainError(
            f"extended-mode weights need an odd positive integer r, got {r}"
        )
    return float(measure_array(w, r))


def measure_m(P: EpistemicDist, r: float) -> float:
    """M_r of an epistemic distribution."""
    return weights_measure(P.weights, r, P.mode == "extended")


def _nonneg_view(Q: FiducialSet) -> EpistemicDist:
    P = q_to_p(Q)
    # a fiducial set whose weights are all nonnegative is an ordinary
    # epistemic state, so any admissible r applies
    return P if P.has_negative else P.as_mode("standard")


def measure_n(Q: FiducialSet, r: float) -> float:
    """N_r of a fiducial set: M_r of the underlying weights."""
    return measure_m(_nonneg_view(Q), r)


def measure_n1_closed_form(Q: FiducialSet) -> float:
    """``(1/p) sum_i M_1(Q_i) - 1/p``: the r = 1 value computed from Q alone."""
    p = Q.p
    return float(np.sum(Q.q**2)) / p - 1.0 / p


def measure(state: EpistemicDist | FiducialSet, r: float) -> float:
    if isinstance(state, FiducialSet):
        return measure_n(state, r)
    return measure_m(state, r)


def is_pure(state: EpistemicDist | FiducialSet, r: float, tol: float = PURE_TOL) -> bool:
    """Whether a single-system state sits at the purity level 1/p."""
    return abs(measure(state, r) - 1.0 / state.p) <= tol


def _limits(w: np.ndarray) -> tuple[float, float]:
    pos = w[w > 0]
    return 1.0 / pos.size, float(pos.max())


def solve_r(P: EpistemicDist, target: float, r_max: float = 2.0**20) -> float:
    """The r at which ``M_r(P) == target``, by bracketing root search.

    M_r(P) rises monotonically from 1/|support| (r -> -1) to max P (r -> inf).
    """
    if P.mode != "standard" and P.has_negative:
        raise MeasureDomainError("solve_r needs a nonnegative distribution")
    w = P.weights.ravel()
    lo_lim, hi_lim = _limits(w)
    if hi_lim - lo_lim <= 1e-15:
        if abs(target - lo_lim) <= 1e-12:
            raise ConstantMeasureError(
                f"M_r is constant ({lo_lim}) in r for a flat distribution"
            )
        raise TargetRangeError(f"M_r is identically {lo_lim}; target {target} unreachable")
    if not lo_lim < target < hi_lim:
        raise TargetRangeError(f"target {target} outside ({lo_lim}, {hi_lim})")

    def f(r):
        return float(measure_array(w, r)) - target

    lo, hi = R_LOWER, R_UPPER
    if f(lo) > SOLVE_TOL:
        raise TargetRangeError(f"target {target} needs r below {lo}")
    while f(hi) < 0:
        hi *= 2
        if hi > r_max:
            raise TargetRangeError(f"target {target} needs r above {r_max}")
    if f(lo) >= 0:
        return lo
    return float(brentq(f, lo, hi, xtol=1e-14, rtol=1e-15))
