"""Observables over F_p, epistemic distributions P and fiducial sets Q.

Ontic states of one elementary system are pairs ``(x_a, x_b)`` in F_p^2.
Weights are stored as a ``(p, p)`` array indexed ``[x_a, x_b]``; fiducial
sets as a ``(p + 1, p)`` array whose row ``i`` is the outcome distribution
of observable ``X_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import InvalidStateError
from .field import FieldElement, check_prime

NORM_TOL = 1e-12
# Cancellation residue below this is treated as an exact zero. Near r -> -1
# the measure effectively counts the support, so 1e-17 leftovers matter.
ZERO_SNAP = 1e-14

Mode = Literal["standard", "extended"]


@dataclass(frozen=True)
class Observable:
    """The ray ``k_a X_a + k_b X_b`` in canonical form.

    Index 0 is ``X_a``; index ``k + 1`` is ``X_b + k X_a``.
    """

    index: int
    ka: FieldElement
    kb: FieldElement

    @property
    def modulus(self) -> int:
        return self.ka.modulus

    def __call__(self, xa, xb) -> FieldElement:
        return eval_observable(self, xa, xb)

    @property
    def label(self) -> str:
        if self.index == 0:
            return "X_a"
        k = self.ka.value
        if k == 0:
            return "X_b"
        return "X_b + X_a" if k == 1 else f"X_b + {k}X_a"


def observables(p: int) -> list[Observable]:
    """The p + 1 mutually unbiased observables, in fiducial order."""
    check_prime(p)
    one, zero = FieldElement(1, p), FieldElement(0, p)
    obs = [Observable(0, one, zero)]
    obs += [Observable(k + 1, FieldElement(k, p), one) for k in range(p)]
    return obs


def eval_observable(obs: Observable, xa, xb) -> FieldElement:
    p = obs.modulus
    if not isinstance(xa, FieldElement):
        xa = FieldElement(xa, p)
    if not isinstance(xb, FieldElement):
        xb = FieldElement(xb, p)
    return obs.ka * xa + obs.kb * xb


@lru_cache(maxsize=None)
def level_table(p: int) -> np.ndarray:
    """``table[i, x_a, x_b]`` is the value of ``X_i`` at ontic state (x_a, x_b)."""
    check_prime(p)
    xa, xb = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    table = np.empty((p + 1, p, p), dtype=np.intp)
    table[0] = xa
    for k in range(p):
        table[k + 1] = (xb + k * xa) % p
    table.setflags(write=False)
    return table


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _fiducial_of(weights: np.ndarray, p: int) -> np.ndarray:
    table = level_table(p)
    q = np.zeros((p + 1, p))
    for i in range(p + 1):
        q[i] = np.bincount(table[i].ravel(), weights=weights.ravel(), minlength=p)
    return q


class EpistemicDist:
    """Weights P(x_a, x_b) over the p^2 ontic states of one system.

    In ``standard`` mode every weight is a probability. ``extended`` mode
    admits negative weights as long as every induced fiducial probability
    stays in [0, 1].
    """

    __slots__ = ("p", "weights", "mode")

    def __init__(self, p: int, weights, mode: Mode = "standard"):
        check_prime(p)
        w = np.asarray(weights, dtype=float)
        if w.size != p * p:
            raise InvalidStateError(f"expected {p * p} weights, got {w.size}")
        w = w.reshape(p, p)
        if not np.all(np.isfinite(w)):
            raise InvalidStateError("weights must be finite")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise InvalidStateError(f"weights sum to {w.sum()!r}, not 1")
        if mode == "standard":
            if w.min() < -NORM_TOL:
                raise InvalidStateError("negative weight in standard mode")
        elif mode == "extended":
            q = _fiducial_of(w, p)
            if q.min() < -NORM_TOL or q.max() > 1 + NORM_TOL:
                raise InvalidStateError("induced fiducial probability outside [0, 1]")
        else:
            raise InvalidStateError(f"unknown mode {mode!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("EpistemicDist is immutable")

    def __getitem__(self, key) -> float:
        xa, xb = key
        return float(self.weights[int(xa), int(xb)])

    def __repr__(self):
        return f"EpistemicDist(p={self.p}, mode={self.mode!r}, weights={self.weights.ravel().tolist()})"

    def __eq__(self, other):
        if not isinstance(other, EpistemicDist):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.weights, other.weights)

    __hash__ = None

    @property
    def has_negative(self) -> bool:
        return bool(self.weights.min() < 0)

    def as_mode(self, mode: Mode) -> EpistemicDist:
        return EpistemicDist(self.p, self.weights, mode)

    def allclose(self, other: EpistemicDist, atol: float = 1e-12) -> bool:
        return self.p == other.p and np.allclose(self.weights, other.weights, rtol=0, atol=atol)


class FiducialSet:
    """Outcome distributions Q_i(x) of the p + 1 fiducial observables.

    A set produced by ``p_to_q`` remembers its source weights, so that
    ``q_to_p`` returns them exactly instead of re-deriving them through a
    cancelling sum (which loses weights below ~1e-16). Equality compares
    only the distributions.
    """

    __slots__ = ("p", "q", "_source")

    def __init__(self, p: int, distributions, _source: np.ndarray | None = None):
        check_prime(p)
        q = np.asarray(distributions, dtype=float)
        if q.shape != (p + 1, p):
            raise InvalidStateError(f"expected shape {(p + 1, p)}, got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise InvalidStateError("probabilities must be finite")
        if q.min() < -NORM_TOL or q.max() > 1 + NORM_TOL:
            raise InvalidStateError("fiducial probability outside [0, 1]")
        sums = q.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > NORM_TOL:
            raise InvalidStateError(f"fiducial rows sum to {sums.tolist()}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", _frozen(q))
        object.__setattr__(self, "_source", _source)

    def __setattr__(self, name, value):
        raise AttributeError("FiducialSet is immutable")

    def __getitem__(self, key) -> float:
        i, x = key
        return float(self.q[i, int(x)])

    def __repr__(self):
        return f"FiducialSet(p={self.p}, q={self.q.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, FiducialSet):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.q, other.q)

    __hash__ = None

    def allclose(self, other: FiducialSet, atol: float = 1e-12) -> bool:
        return self.p == other.p and np.allclose(self.q, other.q, rtol=0, atol=atol)

    @property
    def is_maximally_mixed(self) -> bool:
        return bool(np.allclose(self.q, 1.0 / self.p, rtol=0, atol=1e-12))

    @property
    def binary_params(self) -> tuple[float, float, float]:
        """``(Q_0(1), Q_1(1), Q_2(0))`` for p = 2."""
        if self.p != 2:
            raise InvalidStateError("binary parameters exist only for p = 2")
        return float(self.q[0, 1]), float(self.q[1, 1]), float(self.q[2, 0])


def binary_fiducial(q0: float, q1: float, q2: float) -> FiducialSet:
    """p = 2 fiducial set from ``Q_0(1)``, ``Q_1(1)`` and ``Q_2(0)``."""
    return FiducialSet(2, [[1 - q0, q0], [1 - q1, q1], [q2, 1 - q2]])


def maximally_mixed(p: int) -> FiducialSet:
    return FiducialSet(p, np.full((p + 1, p), 1.0 / p))


def uniform_dist(p: int) -> EpistemicDist:
    return EpistemicDist(p, np.full((p, p), 1.0 / p**2))


def delta_dist(p: int, xa: int, xb: int) -> EpistemicDist:
    w = np.zeros((p, p))
    w[int(xa) % p, int(xb) % p] = 1.0
    return EpistemicDist(p, w)


def p_to_q(P: EpistemicDist) -> FiducialSet:
    """Sum P over each level set ``{x_i(x_a, x_b) = x}``."""
    return FiducialSet(P.p, np.clip(_fiducial_of(P.weights, P.p), 0.0, 1.0), _source=P.weights)


def q_to_p_weights(q: np.ndarray, p: int) -> np.ndarray:
    """``P(x_a, x_b) = (-1 + sum_i Q_i(x_i(x_a, x_b))) / p`` on raw arrays."""
    table = level_table(p)
    rows = np.arange(p + 1)[:, None, None]
    w = (q[rows, table].sum(axis=0) - 1.0) / p
    w[np.abs(w) < ZERO_SNAP] = 0.0
    return w


def q_to_p(Q: FiducialSet) -> EpistemicDist:
    """Underlying weights of a fiducial set; always returned in extended mode."""
    w = Q._source if Q._source is not None else q_to_p_weights(Q.q, Q.p)
    return EpistemicDist(Q.p, w, mode="extended")


def canonical_pure(obs_index: int, value, p: int) -> EpistemicDist:
    """Uniform weight 1/p on the level set ``{X_i = value}``."""
    check_prime(p)
    if not 0 <= obs_index <= p:
        raise InvalidStateError(f"observable index {obs_index} outside [0, {p}]")
    v = int(value) % p
    mask = level_table(p)[obs_index] == v
    return EpistemicDist(p, mask / p)


def canonical_pure_states(p: int) -> list[tuple[int, int, EpistemicDist]]:
    """Every canonical pure state as ``(obs_index, value, P)``."""
    return [(i, v, canonical_pure(i, v, p)) for i in range(p + 1) for v in range(p)]


def canonical_of(Q: FiducialSet, tol: float = 1e-9) -> tuple[int, int] | None:
    """``(i, x)`` if Q is the canonical pure state "X_i = x is known", else None."""
    q = Q.q
    uniform = np.abs(q - 1.0 / Q.p).max(axis=1) <= tol
    if np.count_nonzero(~uniform) != 1:
        return None
    i = int(np.argmin(uniform))
    x = int(np.argmax(q[i]))
    return (i, x) if abs(q[i, x] - 1.0) <= tol else None
