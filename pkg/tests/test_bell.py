import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_pure
from toymodel.bell import (
    BellScenario,
    chsh,
    chsh_from_fiducials,
    correlators,
    eq_s,
    eq_sprime,
    joint_outcome_table,
    negativity_witness,
    no_signaling_check,
    order_independent,
    sample_chsh,
    scenario_report,
    tilde_s,
    tilde_sprime,
)
from toymodel.errors import InvalidStateError, UndefinedByModelError
from toymodel.measurements import GenMeasurement, complement
from toymodel.multisystem import JointDist, product
from toymodel.states import canonical_pure, uniform_dist

R_EQ = -0.14739606083204737


def eq_scenario():
    return BellScenario(GenMeasurement(eq_s(), R_EQ), GenMeasurement(eq_sprime(), R_EQ))


def tilde_scenario():
    return BellScenario(GenMeasurement(tilde_s(), 1.0), GenMeasurement(tilde_sprime(), 1.0))


def test_worked_example_b_equals_three():
    sc = eq_scenario()
    e = correlators(sc)
    # hand values: 2 Q_i(1) - 1 for the measured observable
    assert e["aS"] == pytest.approx(0.8, abs=1e-12)
    assert e["bS"] == pytest.approx(0.8, abs=1e-12)
    assert e["aS'"] == pytest.approx(0.8, abs=1e-12)
    assert e["bS'"] == pytest.approx(-0.6, abs=1e-12)
    assert chsh(sc) == pytest.approx(3.0, abs=1e-12)
    assert chsh_from_fiducials(eq_s(), eq_sprime()) == pytest.approx(3.0, abs=1e-12)


def test_tilde_states_reach_two_root_two():
    assert chsh(tilde_scenario()) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_table_is_a_distribution():
    t = joint_outcome_table(eq_scenario(), "a", "S")
    assert t.shape == (2, 2)
    assert t.sum() == pytest.approx(1.0)
    assert t.min() >= 0
    # X_a uniform on the correlated pair
    assert t.sum(axis=1) == pytest.approx([0.5, 0.5])


def test_negativity_witnesses():
    assert negativity_witness(eq_s()) == []
    ((cell, w),) = negativity_witness(complement(eq_s()))
    assert cell == (1, 1) and w == pytest.approx(-0.3, abs=1e-12)
    for Q in (tilde_s(), tilde_sprime()):
        assert negativity_witness(Q) or negativity_witness(complement(Q))


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(1.0, "extended"), (3.0, "extended"),
                                                   (-0.5, "nonneg"), (0.0, "nonneg"), (2.5, "nonneg")]))
def test_order_independence_and_no_signaling(seed, rm):
    r, mode = rm
    rng = np.random.default_rng(seed)
    sc = BellScenario(GenMeasurement(random_pure(rng, r, mode), r),
                      GenMeasurement(random_pure(rng, r, mode), r))
    assert order_independent(sc)
    assert no_signaling_check(sc)
    assert abs(chsh(sc)) <= 4 + 1e-12


def test_report_fields():
    rep = scenario_report(eq_scenario())
    assert rep["B"] == pytest.approx(3.0)
    assert set(rep["correlators"]) == {"aS", "bS", "aS'", "bS'"}
    assert rep["negativity"]["S_perp"][0]["P"] == pytest.approx(-0.3)
    assert rep["no_signaling"] is True


def test_sampling_is_seeded():
    sc = eq_scenario()
    a = sample_chsh(sc, 4000, seed=7)
    assert a == sample_chsh(sc, 4000, seed=7)
    assert abs(a["B_est"] - 3.0) < 5 * a["stderr"]


def test_invalid_joint_rejected():
    M = GenMeasurement(eq_s(), R_EQ)
    with pytest.raises(InvalidStateError):
        BellScenario(M, M, state=product(uniform_dist(2), uniform_dist(2)))
    with pytest.raises(InvalidStateError):
        BellScenario(M, M, state=JointDist(2, 1, [0.25] * 4))


def test_collapse_first_needs_correlated_pair():
    M = GenMeasurement(eq_s(), R_EQ)
    J = product(canonical_pure(0, 0, 2), canonical_pure(1, 0, 2))
    sc = BellScenario(M, M, state=J, validate=False)
    with pytest.raises(UndefinedByModelError):
        joint_outcome_table(sc, "a", "S", "side2_first")
