"""Joint epistemic states of N systems and the knowledge-balance checks.

Joint weights live in an array with 2N axes ordered
``(x_a^(1), x_b^(1), ..., x_a^(N), x_b^(N))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError, MeasureDomainError
from .field import check_prime
from .measures import PURE_TOL, weights_measure
from .states import NORM_TOL, EpistemicDist, level_table

MAX_SYSTEMS = 3


class JointDist:
    __slots__ = ("p", "n", "weights", "mode")

    def __init__(self, p: int, n: int, weights, mode: str = "standard", max_systems: int = MAX_SYSTEMS):
        check_prime(p)
        if not 1 <= n <= max_systems:
            raise InvalidStateError(f"number of systems {n} outside [1, {max_systems}]")
        w = np.asarray(weights, dtype=float)
        if w.size != p ** (2 * n):
            raise InvalidStateError(f"expected {p ** (2 * n)} weights, got {w.size}")
        w = w.reshape((p,) * (2 * n))
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise InvalidStateError(f"weights sum to {w.sum()!r}, not 1")
        if mode == "standard" and w.min() < -NORM_TOL:
            raise InvalidStateError("negative weight in standard mode")
        if mode not in ("standard", "extended"):
            raise InvalidStateError(f"unknown mode {mode!r}")
        w = w.copy()
        w.setflags(write=False)
        for name, value in (("p", p), ("n", n), ("weights", w), ("mode", mode)):
            object.__setattr__(self, name, value)

    def __setattr__(self, name, value):
        raise AttributeError("JointDist is immutable")

    def __repr__(self):
        return f"JointDist(p={self.p}, n={self.n})"

    def allclose(self, other: JointDist, atol: float = 1e-12) -> bool:
        return (self.p, self.n) == (other.p, other.n) and np.allclose(
            self.weights, other.weights, rtol=0, atol=atol
        )

    def system(self, k: int = 0) -> EpistemicDist:
        """Reduced single-system state of system ``k``."""
        m = marginal(self, [k])
        return EpistemicDist(self.p, m.weights, m.mode)


def product(*dists: EpistemicDist) -> JointDist:
    """Uncorrelated joint state."""
    p = dists[0].p
    if any(d.p != p for d in dists):
        raise InvalidStateError("all systems must share the same p")
    w = dists[0].weights
    for d in dists[1:]:
        w = np.multiply.outer(w, d.weights)
    mode = "extended" if any(d.mode == "extended" for d in dists) else "standard"
    return JointDist(p, len(dists), w, mode)


def _check_subset(J: JointDist, subset) -> list[int]:
    subset = [int(s) for s in subset]
    if not subset:
        raise InvalidStateError("subset must be nonempty")
    if len(set(subset)) != len(subset) or any(not 0 <= s < J.n for s in subset):
        raise InvalidStateError(f"bad system indices {subset} for {J.n} systems")
    return subset


def marginal(J: JointDist, subset) -> JointDist:
    """Sum out every system not in ``subset``; kept systems follow subset order."""
    subset = _check_subset(J, subset)
    drop = tuple(ax for s in range(J.n) if s not in subset for ax in (2 * s, 2 * s + 1))
    w = J.weights.sum(axis=drop) if drop else J.weights
    kept = sorted(subset)
    order = [ax for s in subset for ax in (2 * kept.index(s), 2 * kept.index(s) + 1)]
    return JointDist(J.p, len(subset), np.transpose(w, order), J.mode)


def correlated_pair(p: int) -> JointDist:
    """Two systems with X_a and X_b each equal across the pair."""
    check_prime(p)
    w = np.zeros((p,) * 4)
    for xa in range(p):
        for xb in range(p):
            w[xa, xb, xa, xb] = 1.0 / p**2
    return JointDist(p, 2, w)


def outcome_mask(J: JointDist, system: int, obs_index: int, value: int) -> np.ndarray:
    """Boolean mask (full joint shape) of ``X_i^(system) == value``."""
    p = J.p
    shape = [1] * (2 * J.n)
    shape[2 * system] = shape[2 * system + 1] = p
    return (level_table(p)[obs_index] == value % p).reshape(shape)


def condition(J: JointDist, measurements) -> JointDist | None:
    """Bayes-update on canonical outcomes ``[(system, obs_index, value), ...]``.

    Returns None when the outcome has zero probability.
    """
    w = J.weights
    for system, i, v in measurements:
        w = w * outcome_mask(J, system, i, v)
    total = w.sum()
    if total <= 1e-15:
        return None
    return JointDist(J.p, J.n, w / total, J.mode)


def measure_joint(J: JointDist, r: float) -> float:
    return weights_measure(J.weights, r, J.mode == "extended")


@dataclass(frozen=True)
class Violation:
    """One failed condition: ``a`` joint purity, ``b`` marginal bound,
    ``c`` remote collapse."""

    condition: str
    systems: tuple[int, ...]
    measured: tuple[tuple[int, int, int], ...]
    value: float
    bound: float

    def __str__(self):
        where = f"systems {self.systems}"
        if self.measured:
            where += " after " + ", ".join(f"X_{i}^({s + 1})={v}" for s, i, v in self.measured)
        return f"({self.condition}) {where}: M = {self.value:.12g} vs bound {self.bound:.12g}"


def _proper_subsets(n: int):
    for k in range(1, n):
        yield from itertools.combinations(range(n), k)


def is_valid_pure_joint(J: JointDist, r: float, tol: float = PURE_TOL) -> tuple[bool, list[Violation]]:
    """Check joint purity, marginal knowledge balance and remote collapse.

    Remote collapse: for every split into kept systems A and measured
    systems B, each measured system gets one canonical measurement or
    none (not all none), and every nonzero-probability outcome must leave
    A no better known than a pure state of |A| systems.
    """
    if J.mode != "standard":
        raise MeasureDomainError("validity is defined only for epistemic (standard) states")
    p, n = J.p, J.n
    violations: list[Violation] = []

    target = p ** (-n)
    m = measure_joint(J, r)
    if abs(m - target) > tol:
        violations.append(Violation("a", tuple(range(n)), (), m, target))

    for sub in _proper_subsets(n):
        bound = p ** (-len(sub))
        m = measure_joint(marginal(J, sub), r)
        if m > bound + tol:
            violations.append(Violation("b", sub, (), m, bound))

    for A in _proper_subsets(n):
        B = [s for s in range(n) if s not in A]
        bound = p ** (-len(A))
        # None = leave that system alone
        for choice in itertools.product([None, *range(p + 1)], repeat=len(B)):
            active = [(s, i) for s, i in zip(B, choice) if i is not None]
            if not active:
                continue
            for values in itertools.product(range(p), repeat=len(active)):
                meas = tuple((s, i, v) for (s, i), v in zip(active, values))
                cond = condition(J, meas)
                if cond is None:
                    continue
                m = measure_joint(marginal(cond, A), r)
                if m > bound + tol:
                    violations.append(Violation("c", A, meas, m, bound))
    return not violations, violations
