"""Maximize |B| over pure measurement states S and S' at fixed r.

A p = 2 measurement state has three degrees of freedom. The purity
constraint ``N_r = 1/2`` removes one (the solved coordinate, recovered by
bracketing root search); the other two are searched by a coarse grid and
then Nelder-Mead from the best seeds.

Two coordinate charts are used:

* extended mode works on the fiducial values ``(Q_0(1), Q_1(1), Q_2(0))``,
  solving one of the three;
* nonneg mode works on log-weights of P: one ontic weight is the reference,
  one is solved, two are free. Near r -> -1 pure states with large B need
  weights around 1e-30, which fiducial coordinates cannot hold in double
  precision (they sit next to an O(1) weight in every level set).

B separates as ``f(S) + g(S')`` with ``f = u_0 + u_1`` and ``g = u_0 - u_1``
(``u_i = Q_i(1) - Q_i(0)``), so S and S' are optimized independently.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .errors import InfeasibleError, MeasureDomainError
from .measures import SOLVE_TOL, is_odd_positive_int, measure_array, measure_n
from .states import ZERO_SNAP, FiducialSet, binary_fiducial, q_to_p

OptMode = Literal["nonneg", "extended"]

SCAN_POINTS = 64
DEFAULT_GRID = 21
DEFAULT_REFINE = 8
DEFAULT_RESTARTS = 4
PENALTY = 10.0

# signs of P(x_a, x_b) = (1 + s_a u_0 + s_b u_1 + s_a s_b u_2) / 4, rows in
# order (0,0), (0,1), (1,0), (1,1)
_SA = np.array([-1.0, -1.0, 1.0, 1.0])
_SB = np.array([-1.0, 1.0, -1.0, 1.0])
_SIGN = np.stack([_SA, _SB, _SA * _SB])


def check_mode_r(r: float, mode: OptMode) -> float:
    r = float(r)
    if not math.isfinite(r) or r <= -1:
        raise MeasureDomainError(
            f"r = {r}: r -> -1 is a limit, not a point (B_max -> 4 as r -> -1+)"
        )
    if mode == "extended" and not is_odd_positive_int(r):
        raise MeasureDomainError(f"extended mode needs an odd positive integer r, got {r}")
    if mode not in ("nonneg", "extended"):
        raise MeasureDomainError(f"unknown mode {mode!r}")
    return r


def _weights(params: np.ndarray) -> np.ndarray:
    """Underlying p = 2 weights for rows of ``(q0, q1, q2)``."""
    u = 2.0 * np.asarray(params) - 1.0
    w = 0.25 * (1.0 + u @ _SIGN)
    w[np.abs(w) < ZERO_SNAP] = 0.0
    return w


def _with_slot(free: dict[int, float], slot: int, c):
    c = np.atleast_1d(np.asarray(c, dtype=float))
    params = np.empty((c.size, 3))
    for k, v in free.items():
        params[:, k] = v
    params[:, slot] = c
    return params


def _domain(free: dict[int, float], slot: int, mode: OptMode) -> tuple[float, float] | None:
    """Range of the solved coordinate keeping Q in [0, 1] (and P >= 0 for nonneg)."""
    lo, hi = 0.0, 1.0
    if mode == "nonneg":
        # P_k = alpha_k + beta_k c, linear in the solved coordinate
        alpha = _raw_weights(_with_slot(free, slot, 0.0))[0]
        beta = _raw_weights(_with_slot(free, slot, 1.0))[0] - alpha
        for a, b in zip(alpha, beta):
            if abs(b) < 1e-15:
                if a < -ZERO_SNAP:
                    return None
            elif b > 0:
                lo = max(lo, -a / b)
            else:
                hi = min(hi, -a / b)
        if hi < lo - 1e-13:
            return None
        hi = max(hi, lo)
    return lo, hi


def _raw_weights(params):
    u = 2.0 * np.asarray(params) - 1.0
    return 0.25 * (1.0 + u @ _SIGN)


def _fast_measure(w: np.ndarray, r: float) -> np.ndarray:
    """M_r along the last axis for 4-entry weights with max entry >= 1/4.

    Plain powers suffice here (no under/overflow for r <= 2^10); the
    general routine in ``measures`` is used to re-verify every result.
    """
    if r == 0 or r > 1024:
        return measure_array(w, r)
    if is_odd_positive_int(r):
        return np.sum(w ** (int(r) + 1), axis=-1) ** (1.0 / r)
    with np.errstate(invalid="ignore", divide="ignore"):
        pw = np.where(w > 0, np.abs(w) ** (r + 1.0), np.where(w < 0, np.nan, 0.0))
    return np.sum(pw, axis=-1) ** (1.0 / r)


def _scalar_constraint(free, slot, r, mode):
    """Pure-python version of the constraint for root polishing."""
    base = [0.0, 0.0, 0.0]
    for k, v in free.items():
        base[k] = 2.0 * v - 1.0
    signs = [tuple(_SIGN[:, j]) for j in range(4)]
    odd = is_odd_positive_int(r)
    nonneg = mode == "nonneg"

    def g(c):
        u = list(base)
        u[slot] = 2.0 * c - 1.0
        ws = []
        for sa, sb, sab in signs:
            w = 0.25 * (1.0 + sa * u[0] + sb * u[1] + sab * u[2])
            if abs(w) < ZERO_SNAP or (nonneg and w < 0):
                w = 0.0
            ws.append(w)
        if r == 0:
            h = 0.0
            for w in ws:
                if w < 0:
                    return math.nan
                if w > 0:
                    h -= w * math.log2(w)
            return 2.0 ** (-h) - 0.5
        if odd:
            s = sum(w ** (int(r) + 1) for w in ws)
        else:
            s = 0.0
            for w in ws:
                if w < 0:
                    return math.nan
                if w > 0:
                    s += w ** (r + 1.0)
        return s ** (1.0 / r) - 0.5

    return g


def _vector_constraint(free, slot, r, mode):
    def g(c):
        w = _weights(_with_slot(free, slot, c))
        if mode == "nonneg":
            w = np.maximum(w, 0.0)
        return _fast_measure(w, r) - 0.5

    return g


def constrained_roots(free: dict[int, float], r: float, solve_slot: int,
                      mode: OptMode = "extended") -> list[float]:
    """Every value of the solved slot giving ``N_r = 1/2``, sorted.

    A 64-point scan brackets sign changes, each polished by Brent's method;
    touching roots (no sign change) are located by minimizing ``|g|``
    where a parabola through the scan minimum predicts a zero.
    """
    if sorted(free) != sorted({0, 1, 2} - {solve_slot}):
        raise ValueError(f"free slots {sorted(free)} do not complement slot {solve_slot}")
    if any(not 0.0 <= v <= 1.0 for v in free.values()):
        return []
    dom = _domain(free, solve_slot, mode)
    if dom is None:
        return []
    lo, hi = dom
    gs = _scalar_constraint(free, solve_slot, r, mode)
    if hi - lo < 1e-13:
        c = 0.5 * (lo + hi)
        return [c] if abs(gs(c)) <= SOLVE_TOL else []

    cs = np.linspace(lo, hi, SCAN_POINTS)
    gv = _vector_constraint(free, solve_slot, r, mode)(cs)
    finite = np.isfinite(gv)
    small = finite & (np.abs(gv) <= SOLVE_TOL)
    roots = [float(c) for c in cs[small]]
    for k in np.flatnonzero(finite[:-1] & finite[1:] & (gv[:-1] * gv[1:] < 0)
                            & ~small[:-1] & ~small[1:]):
        c = brentq(gs, cs[k], cs[k + 1], xtol=1e-15, rtol=1e-15)
        if abs(gs(c)) <= SOLVE_TOL:
            roots.append(float(c))
    absg = np.where(finite, np.abs(gv), np.inf)
    for k in range(1, SCAN_POINTS - 1):
        if small[k] or not (absg[k] <= absg[k - 1] and absg[k] <= absg[k + 1]):
            continue
        g0, g1, g2 = gv[k - 1], gv[k], gv[k + 1]
        if not (np.isfinite(g0) and np.isfinite(g2)) or g0 * g1 <= 0 or g1 * g2 <= 0:
            continue
        # parabola through the three samples; vertex value predicts a zero
        curv = g0 - 2 * g1 + g2
        if curv == 0:
            continue
        vertex = g1 - (g2 - g0) ** 2 / (8 * curv)
        if vertex * g1 > 0 and abs(vertex) > 1e-3 * abs(g1) + SOLVE_TOL:
            continue
        res = minimize_scalar(lambda c: abs(gs(c)), bounds=(cs[k - 1], cs[k + 1]),
                              method="bounded", options={"xatol": 1e-13})
        if abs(gs(res.x)) <= SOLVE_TOL:
            roots.append(float(res.x))
    roots.sort()
    out = []
    for c in roots:
        if not out or c - out[-1] > 1e-7:
            out.append(c)
    return out


def _state(params) -> FiducialSet:
    q0, q1, q2 = (float(min(max(v, 0.0), 1.0)) for v in params)
    return binary_fiducial(q0, q1, q2)


def solve_constrained_q(free: dict[int, float], r: float, solve_slot: int,
                        mode: OptMode = "extended") -> FiducialSet:
    """Complete two fiducial values into a pure state at r.

    ``free`` maps two slots (0: Q_0(1), 1: Q_1(1), 2: Q_2(0)) to values; the
    first root found for ``solve_slot`` is used.
    """
    roots = constrained_roots(free, r, solve_slot, mode)
    if not roots:
        raise InfeasibleError(f"no pure state with {free} at r={r} (mode {mode})")
    return _state(_with_slot(free, solve_slot, roots[0])[0])


@dataclass(frozen=True)
class SweepPoint:
    r: float
    b_max: float
    argmax_S: FiducialSet
    argmax_Sprime: FiducialSet
    mode: str

    def row(self) -> list:
        return [self.r, self.b_max, self.mode, *self.argmax_S.binary_params,
                *self.argmax_Sprime.binary_params]


@dataclass(frozen=True)
class _Cand:
    value: float
    params: tuple[float, ...]

    def key(self):
        return (self.value, self.params)


def _better(a: _Cand | None, b: _Cand | None) -> _Cand | None:
    if a is None:
        return b
    if b is None:
        return a
    return b if b.key() > a.key() else a


class _FiducialChart:
    """Extended mode: free fiducial values in [0, 1], one solved slot."""

    def __init__(self, r: float, mode: OptMode):
        self.r, self.mode = r, mode
        self.charts = [0, 1, 2]

    def axis(self, grid):
        return np.linspace(0.0, 1.0, grid)

    def in_box(self, x):
        return bool(np.all(x >= 0.0) and np.all(x <= 1.0))

    def solutions(self, chart, x):
        free = _free_of(chart, x)
        for c in constrained_roots(free, self.r, chart, self.mode):
            params = tuple(float(v) for v in _with_slot(free, chart, c)[0])
            if self.mode == "extended" and not self._complement_legal(params):
                continue
            yield params

    def _complement_legal(self, params) -> bool:
        # "no" state must respect knowledge balance too: N_r(S-perp) <= 1/2
        w = _weights(1.0 - np.array([params]))
        return float(_fast_measure(w, self.r)[0]) <= 0.5 + 1e-9

    @staticmethod
    def u(params):
        return 2.0 * params[0] - 1.0, 2.0 * params[1] - 1.0

    @staticmethod
    def state(params) -> FiducialSet:
        return _state(params)

    def fixed_seeds(self):
        return _canonical_params()


# ontic index k = 2 x_a + x_b
_ONTIC = [(0, 0), (0, 1), (1, 0), (1, 1)]
LOG_FLOOR = -700.0


class _WeightChart:
    """Nonneg mode: P = softmax(scale * z) with one reference and one solved index.

    ``scale = max(1, 1/(r + 1))`` keeps ``P^(r+1)`` of order one across the
    grid for every r.
    """

    def __init__(self, r: float):
        self.r = r
        self.scale = max(1.0, 1.0 / (r + 1.0))
        # logit spread stays under 700 so no weight underflows
        self.lo = max(-12.0, 0.5 * LOG_FLOOR / self.scale)
        self.hi = min(6.0, -0.5 * LOG_FLOOR / self.scale)
        self.charts = [(ref, s) for ref in range(4) for s in range(4) if s != ref]

    def axis(self, grid):
        return np.linspace(max(-9.0, self.lo), min(3.0, self.hi), grid)

    def in_box(self, x):
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi))

    def _logits(self, chart, x, zs):
        ref, s = chart
        free = [k for k in range(4) if k not in chart]
        zs = np.atleast_1d(np.asarray(zs, dtype=float))
        th = np.zeros((zs.size, 4))
        th[:, free[0]] = x[0]
        th[:, free[1]] = x[1]
        th[:, s] = zs
        return self.scale * th

    def _g_vec(self, th):
        m = th.max(axis=1, keepdims=True)
        logp = th - (m + np.log(np.exp(th - m).sum(axis=1, keepdims=True)))
        r = self.r
        if r == 0:
            p = np.exp(logp)
            return np.exp2(np.sum(p * logp, axis=1) / math.log(2)) - 0.5
        a = (r + 1.0) * logp
        am = a.max(axis=1, keepdims=True)
        lse = am[:, 0] + np.log(np.exp(a - am).sum(axis=1))
        return np.exp(lse / r) - 0.5

    def _g_scalar(self, chart, x):
        ref, s = chart
        free = [k for k in range(4) if k not in chart]
        r, sc = self.r, self.scale

        def g(z):
            th = [0.0] * 4
            th[free[0]], th[free[1]], th[s] = sc * x[0], sc * x[1], sc * z
            m = max(th)
            lz = m + math.log(sum(math.exp(t - m) for t in th))
            logp = [t - lz for t in th]
            if r == 0:
                h = -sum(math.exp(lp) * lp for lp in logp) / math.log(2)
                return 2.0 ** (-h) - 0.5
            a = [(r + 1.0) * lp for lp in logp]
            am = max(a)
            return math.exp((am + math.log(sum(math.exp(v - am) for v in a))) / r) - 0.5

        return g

    def solutions(self, chart, x):
        zs = np.linspace(self.lo, self.hi, SCAN_POINTS)
        gv = self._g_vec(self._logits(chart, x, zs))
        g = self._g_scalar(chart, x)
        roots = []
        for k in np.flatnonzero(gv[:-1] * gv[1:] <= 0):
            try:
                z = brentq(g, zs[k], zs[k + 1], xtol=1e-14, rtol=1e-15)
            except ValueError:
                continue
            if abs(g(z)) <= SOLVE_TOL:
                roots.append(z)
        for z in roots:
            th = self._logits(chart, x, z)[0]
            p = np.exp(th - th.max())
            yield tuple(float(v) for v in p / p.sum())

    @staticmethod
    def u(params):
        p00, p01, p10, p11 = params
        return (p10 + p11) - (p00 + p01), (p01 + p11) - (p00 + p10)

    @staticmethod
    def state(params) -> FiducialSet:
        from .states import EpistemicDist, p_to_q

        return p_to_q(EpistemicDist(2, np.reshape(params, (2, 2))))

    def fixed_seeds(self):
        # canonical pure states: weight 1/2 on one level set
        from .states import canonical_pure

        out = []
        for i in range(3):
            for v in range(2):
                w = canonical_pure(i, v, 2).weights.ravel()
                out.append(tuple(float(t) for t in w))
        return out


def _evaluate(space, chart, x, weights) -> _Cand | None:
    best = None
    for params in space.solutions(chart, x):
        u0, u1 = space.u(params)
        best = _better(best, _Cand(float(weights[0] * u0 + weights[1] * u1), params))
    return best


def _free_of(slot, x):
    others = [k for k in range(3) if k != slot]
    return {others[0]: float(x[0]), others[1]: float(x[1])}


def _canonical_params():
    out = []
    for i in range(3):
        for v in (0, 1):
            params = [0.5, 0.5, 0.5]
            # Q_2 is parameterized by its value-0 probability
            params[i] = float(v if i < 2 else 1 - v)
            out.append(tuple(params))
    return out


def _maximize_state(space, weights, grid, refine, restarts, rng) -> _Cand:
    axis = space.axis(grid)
    seeds = []
    for ci, chart in enumerate(space.charts):
        for x0 in axis:
            for x1 in axis:
                cand = _evaluate(space, chart, (x0, x1), weights)
                if cand is not None:
                    seeds.append((cand.key(), ci, (float(x0), float(x1))))
    best = None
    # canonical pure states are pure for every r
    for params in space.fixed_seeds():
        u0, u1 = space.u(params)
        best = _better(best, _Cand(float(weights[0] * u0 + weights[1] * u1), params))
    seeds.sort(reverse=True)
    for key, _, _ in seeds[:1]:
        best = _better(best, _Cand(*key))

    starts = [(ci, np.array(x)) for _, ci, x in seeds[:refine]]
    lo, hi = float(axis[0]), float(axis[-1])
    for _ in range(restarts):
        starts.append((int(rng.integers(len(space.charts))), rng.uniform(lo, hi, size=2)))

    for ci, x0 in starts:
        chart = space.charts[ci]
        found = [None]

        def h(x, chart=chart, found=found):
            if not space.in_box(x):
                return PENALTY
            cand = _evaluate(space, chart, x, weights)
            if cand is None:
                return PENALTY
            found[0] = _better(found[0], cand)
            return -cand.value

        step = 0.02 * (hi - lo)
        minimize(h, x0, method="Nelder-Mead",
                 options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 800,
                          "initial_simplex": _simplex(x0, step, space)})
        best = _better(best, found[0])
    return best


def _simplex(x0, step, space):
    pts = [x0.copy(), x0.copy(), x0.copy()]
    for j in range(2):
        pts[j + 1][j] += step
        if not space.in_box(pts[j + 1]):
            pts[j + 1][j] -= 2 * step
    return np.array(pts)


def max_chsh(r: float, mode: OptMode = "nonneg", seed: int = 0, grid: int = DEFAULT_GRID,
             refine: int = DEFAULT_REFINE, restarts: int = DEFAULT_RESTARTS) -> SweepPoint:
    """Best |B| found over pure S, S' at r.

    Deterministic for fixed ``(seed, grid, refine, restarts)``. More
    ``restarts`` with the same seed never lowers the result.
    """
    r = check_mode_r(r, mode)
    space = _WeightChart(r) if mode == "nonneg" else _FiducialChart(r, mode)
    sides = {}
    # S wants u0 + u1 large, S' wants u0 - u1 large; the mirrored pair
    # covers negative B
    for name, w in (("S+", (1, 1)), ("S'+", (1, -1)), ("S-", (-1, -1)), ("S'-", (-1, 1))):
        sides[name] = _maximize_state(space, np.array(w, dtype=float), grid, refine, restarts,
                                      np.random.default_rng([seed, len(sides)]))
    plus = sides["S+"].value + sides["S'+"].value
    minus = sides["S-"].value + sides["S'-"].value
    if (plus, sides["S+"].params) >= (minus, sides["S-"].params):
        s, sp, b = sides["S+"], sides["S'+"], plus
    else:
        s, sp, b = sides["S-"], sides["S'-"], minus
    point = SweepPoint(r, float(b), space.state(s.params), space.state(sp.params), mode)
    _check_point(point)
    return point


def _check_point(point: SweepPoint):
    for st in (point.argmax_S, point.argmax_Sprime):
        n = measure_n(st, point.r)
        if abs(n - 0.5) > 1e-6:
            raise InfeasibleError(f"argmax state not pure: N_r = {n}")
        if point.mode == "nonneg" and q_to_p(st).weights.min() < -1e-9:
            raise InfeasibleError("argmax state has negative weights in nonneg mode")


def sweep_r(r_grid: Iterable[float], mode: OptMode = "nonneg", **kwargs) -> list[SweepPoint]:
    r_grid = [check_mode_r(r, mode) for r in r_grid]
    return [max_chsh(r, mode, **kwargs) for r in r_grid]


CSV_HEADER = ["r", "b_max", "mode", "q0_S", "q1_S", "q2_S", "q0_Sp", "q1_Sp", "q2_Sp"]


def _fmt(v):
    return format(v, ".17g") if isinstance(v, float) else str(v)


def sweep_csv(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in points:
        w.writerow([_fmt(v) for v in pt.row()])
    return buf.getvalue()
