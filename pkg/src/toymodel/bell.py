"""CHSH scenario on the maximally correlated pair of p = 2 systems.

Side 1 measures X_a or X_b; side 2 asks "are you in S?" or "are you in
S'?". Outcomes map to +-1: an observable value v to 2v - 1, "yes" to +1
and "no" to -1. Outcome tables are indexed ``[v, o]`` with ``o = 1`` for
"yes" and ``o = 0`` for "no".
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import InvalidStateError, UndefinedByModelError
from .measurements import GenMeasurement, prob_yes, update_after
from .multisystem import JointDist, condition, correlated_pair, is_valid_pure_joint, marginal
from .states import FiducialSet, binary_fiducial, level_table, p_to_q, q_to_p

Side1 = Literal["a", "b"]
Side2 = Literal["S", "Sprime"]
Order = Literal["side1_first", "side2_first"]

SIDE1_OBS = {"a": 0, "b": 1}
SIDE2_KEYS = ("S", "Sprime")
SIGNAL_TOL = 1e-12

# Fiducial values quoted for the worked example (p = 2).
EQ_S = (0.9, 0.9, 0.8)
EQ_SP_WEIGHTS = [[0.0, 0.1], [0.1, 0.8]]
_H = 0.5 + math.sqrt(2) / 4
TILDE_S = (_H, _H, 0.5)
TILDE_SPRIME = (_H, 1 - _H, 0.5)


def eq_s() -> FiducialSet:
    return binary_fiducial(*EQ_S)


def eq_sprime() -> FiducialSet:
    """Q_0(1) = 0.9, Q_1(0) = 0.8, Q_2(1) = 0.9."""
    return binary_fiducial(0.9, 0.2, 0.1)


def tilde_s() -> FiducialSet:
    return binary_fiducial(*TILDE_S)


def tilde_sprime() -> FiducialSet:
    return binary_fiducial(*TILDE_SPRIME)


@lru_cache(maxsize=256)
def _pair_check(r: float) -> tuple[bool, tuple]:
    ok, violations = is_valid_pure_joint(correlated_pair(2), r)
    return ok, tuple(violations)


class BellScenario:
    __slots__ = ("state", "measurements", "_remote")

    def __init__(self, S: GenMeasurement, Sprime: GenMeasurement, state: JointDist | None = None,
                 validate: bool = True):
        default = state is None
        if default:
            state = correlated_pair(2)
        if state.p != 2 or state.n != 2:
            raise InvalidStateError("the CHSH scenario needs two p = 2 systems")
        if validate:
            ok, violations = _pair_check(S.r) if default else is_valid_pure_joint(state, S.r)
            if not ok:
                raise InvalidStateError("joint state is not a valid pure state: "
                                        + "; ".join(map(str, violations)))
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "measurements", {"S": S, "Sprime": Sprime})
        # side-1 outcome -> (probability, system-2 state), filled on demand
        object.__setattr__(self, "_remote", {})

    def __setattr__(self, name, value):
        raise AttributeError("BellScenario is immutable")

    def __getitem__(self, key: Side2) -> GenMeasurement:
        return self.measurements[key]


def joint_outcome_table(scenario: BellScenario, side1: Side1, side2: Side2,
                        order: Order = "side1_first") -> np.ndarray:
    """2x2 table ``P(v, o)`` built by collapsing in the given order."""
    i = SIDE1_OBS[side1]
    M = scenario[side2]
    J = scenario.state
    table = np.zeros((2, 2))
    if order == "side1_first":
        for v in (0, 1):
            pv, remote = _remote_state(scenario, i, v)
            if remote is None:
                continue
            yes = prob_yes(M, remote)
            table[v, 1] = pv * yes
            table[v, 0] = pv * (1.0 - yes)
    elif order == "side2_first":
        if not J.allclose(correlated_pair(2)):
            raise UndefinedByModelError("collapse-first tables are defined for the correlated pair")
        reduced = p_to_q(marginal(J, [1]).system(0))
        py = prob_yes(M, reduced)
        for o, outcome, weight in ((1, "yes", py), (0, "no", 1.0 - py)):
            # perfect correlation: system 1 inherits every fiducial
            # distribution of the collapsed system 2
            collapsed = update_after(M, outcome)
            table[:, o] = weight * collapsed.q[i]
    else:
        raise ValueError(f"unknown order {order!r}")
    return table


def _remote_state(scenario: BellScenario, i: int, v: int):
    key = (i, v)
    if key not in scenario._remote:
        J = scenario.state
        pv = float(J.weights[_side1_mask(i, v)].sum())
        after = condition(J, [(0, i, v)])
        scenario._remote[key] = (pv, None if after is None else p_to_q(after.system(1)))
    return scenario._remote[key]


def _side1_mask(i: int, v: int) -> np.ndarray:
    return np.broadcast_to((level_table(2)[i] == v)[:, :, None, None], (2,) * 4)


_SIGNS = np.outer([-1.0, 1.0], [-1.0, 1.0])


def correlator(scenario: BellScenario, side1: Side1, side2: Side2) -> float:
    return float(np.sum(_SIGNS * joint_outcome_table(scenario, side1, side2)))


def correlators(scenario: BellScenario) -> dict[str, float]:
    return {
        "aS": correlator(scenario, "a", "S"),
        "bS": correlator(scenario, "b", "S"),
        "aS'": correlator(scenario, "a", "Sprime"),
        "bS'": correlator(scenario, "b", "Sprime"),
    }


def chsh(scenario: BellScenario) -> float:
    """B = E(a,S) + E(b,S) + E(a,S') - E(b,S')."""
    e = correlators(scenario)
    return e["aS"] + e["bS"] + e["aS'"] - e["bS'"]


def chsh_from_fiducials(S: FiducialSet, Sprime: FiducialSet) -> float:
    """Closed form ``sum of (2 Q_i(1) - 1)`` terms, used by the optimizer."""
    e = 2.0 * np.array([S.q[0, 1], S.q[1, 1], Sprime.q[0, 1], Sprime.q[1, 1]]) - 1.0
    return float(e[0] + e[1] + e[2] - e[3])


def order_independent(scenario: BellScenario, atol: float = 1e-12) -> bool:
    for side1 in SIDE1_OBS:
        for side2 in SIDE2_KEYS:
            t1 = joint_outcome_table(scenario, side1, side2, "side1_first")
            t2 = joint_outcome_table(scenario, side1, side2, "side2_first")
            if not np.allclose(t1, t2, rtol=0, atol=atol):
                return False
    return True


def no_signaling_check(scenario: BellScenario, tol: float = SIGNAL_TOL) -> bool:
    """Each side's outcome marginal is independent of the other side's choice.

    Side-1 marginals are taken after side 2 has measured (or has done
    nothing), so any dependence on the remote choice shows up there.
    """
    for side1, i in SIDE1_OBS.items():
        baseline = p_to_q(scenario.state.system(0)).q[i]
        for side2 in SIDE2_KEYS:
            t = joint_outcome_table(scenario, side1, side2, "side2_first")
            if np.abs(t.sum(axis=1) - baseline).max() > tol:
                return False
    for side2 in SIDE2_KEYS:
        ref = None
        for side1 in SIDE1_OBS:
            t = joint_outcome_table(scenario, side1, side2, "side1_first")
            m = t.sum(axis=0)
            if ref is None:
                ref = m
            elif np.abs(m - ref).max() > tol:
                return False
    return True


def negativity_witness(Q: FiducialSet, tol: float = 1e-12) -> list[tuple[tuple[int, int], float]]:
    """Ontic states whose underlying weight is negative."""
    if Q.p != 2:
        raise InvalidStateError("negativity witness is defined for p = 2")
    w = q_to_p(Q).weights
    return [((xa, xb), float(w[xa, xb])) for xa in range(2) for xb in range(2) if w[xa, xb] < -tol]


def scenario_report(scenario: BellScenario) -> dict:
    e = correlators(scenario)
    neg = {}
    for key, label in (("S", "S"), ("Sprime", "Sprime")):
        M = scenario[key]
        for state, name in ((M.yes_state, label), (M.no_state, label + "_perp")):
            neg[name] = [{"x_a": xa, "x_b": xb, "P": w} for (xa, xb), w in negativity_witness(state)]
    return {
        "B": e["aS"] + e["bS"] + e["aS'"] - e["bS'"],
        "correlators": e,
        "negativity": neg,
        "no_signaling": no_signaling_check(scenario),
    }


def sample_chsh(scenario: BellScenario, n: int, seed: int) -> dict:
    """Monte-Carlo estimate of B with ``n`` trials per setting pair."""
    rng = np.random.default_rng(seed)
    total, var = 0.0, 0.0
    for side1, side2, sign in (("a", "S", 1), ("b", "S", 1), ("a", "Sprime", 1), ("b", "Sprime", -1)):
        t = joint_outcome_table(scenario, side1, side2)
        draws = rng.choice(4, size=n, p=t.ravel() / t.sum())
        vals = _SIGNS.ravel()[draws]
        total += sign * vals.mean()
        var += vals.var(ddof=1) / n if n > 1 else 0.0
    return {"B_est": float(total), "stderr": float(np.sqrt(var)), "n": int(n), "seed": int(seed)}
