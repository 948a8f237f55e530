import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from toymodel.states import EpistemicDist, FiducialSet, p_to_q

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_q(weights: np.ndarray, p: int) -> np.ndarray:
    """Level-set sums by explicit loops: X_0 = x_a, X_{k+1} = x_b + k x_a."""
    q = np.zeros((p + 1, p))
    for xa in range(p):
        for xb in range(p):
            q[0, xa] += weights[xa, xb]
            for k in range(p):
                q[k + 1, (xb + k * xa) % p] += weights[xa, xb]
    return q


def brute_p(q: np.ndarray, p: int) -> np.ndarray:
    """Invert the level-set map by least squares on its explicit matrix."""
    A = np.zeros(((p + 1) * p, p * p))
    for xa in range(p):
        for xb in range(p):
            col = xa * p + xb
            A[xa, col] = 1
            for k in range(p):
                A[(k + 1) * p + (xb + k * xa) % p, col] = 1
    sol, *_ = np.linalg.lstsq(A, q.ravel(), rcond=None)
    return sol.reshape(p, p)


def random_dist(rng, p: int, sparse: bool = False) -> EpistemicDist:
    w = rng.dirichlet(np.full(p * p, 0.7))
    if sparse:
        w[rng.random(p * p) < 0.3] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
        w /= w.sum()
    return EpistemicDist(p, w.reshape(p, p))


def random_fiducial(rng, p: int) -> FiducialSet:
    return FiducialSet(p, rng.dirichlet(np.ones(p), size=p + 1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_pure(rng, r: float, mode: str):
    """A random pure p = 2 fiducial set at r.

    Extended mode completes two random fiducial values with the constraint
    solver. Nonneg mode slides a random distribution towards a random
    ontic state until M_r hits 1/2, which also reaches the nearly
    degenerate pure states that exist near r -> -1.
    """
    from scipy.optimize import brentq

    from toymodel.errors import InfeasibleError
    from toymodel.measures import measure_array
    from toymodel.optimizer import solve_constrained_q

    if mode == "nonneg":
        while True:
            w = rng.dirichlet(np.ones(4))
            delta = np.eye(4)[rng.integers(4)]

            def g(t):
                return float(measure_array((1 - t) * w + t * delta, r)) - 0.5

            if g(0.0) < 0:
                t = brentq(g, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
                return p_to_q(EpistemicDist(2, ((1 - t) * w + t * delta).reshape(2, 2)))
    while True:
        slot = int(rng.integers(3))
        others = [k for k in range(3) if k != slot]
        free = {k: float(rng.random()) for k in others}
        try:
            return solve_constrained_q(free, r, slot, mode)
        except InfeasibleError:
            continue


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.line(n))
