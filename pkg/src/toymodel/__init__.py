"""Extended epistemic toy model: finite-field observables, epistemic and
instrumental states, predictability measures, generalized measurements and
a Bell-CHSH harness."""

from .bell import BellScenario, chsh, correlator, joint_outcome_table, negativity_witness, no_signaling_check
from .field import FieldElement, fp_add, fp_inv, fp_mul
from .measurements import GenMeasurement, complement, mix, prob_yes, rotate, update_after
from .measures import is_pure, measure_m, measure_n, solve_r
from .multisystem import JointDist, correlated_pair, is_valid_pure_joint, marginal
from .optimizer import SweepPoint, max_chsh, solve_constrained_q, sweep_r
from .states import (
    EpistemicDist,
    FiducialSet,
    Observable,
    binary_fiducial,
    canonical_pure,
    eval_observable,
    observables,
    p_to_q,
    q_to_p,
)

__version__ = "0.1.0"
