"""Covert distributed hypothesis testing over discrete memoryless channels.

Computes the achievable Stein exponents of remote hypothesis testing under a
warden's divergence covertness constraint, verifies the warden-side bounds
exactly, and simulates the two coding-and-testing schemes that achieve them.
"""

from .channel import ConditionReport, Dmc, find_partial_connectivity, sample_channel, validate_covert_conditions
from .covertness import (
    CovertnessReport,
    chi_squared_product,
    delta_scheme_B,
    warden_divergence_bounds,
    scheme_A_covertness,
    scheme_A_divergence,
    scheme_B_covertness,
    scheme_B_positivity,
    two_point_divergence_exact,
)
from .exponents import (
    E3Result,
    ExponentReport,
    ExponentTerm,
    Improvement,
    PbarSet,
    ConnectivityCase,
    compute_E1,
    compute_E2,
    compute_E3,
    compute_T_U,
    i_projection_coupling,
    improvement_check,
    local_exponent,
    pbar_contains,
    pbar_threshold,
    achievable_exponent,
)
from .probability import (
    Alphabet,
    JointPmf,
    LogBase,
    Pmf,
    SymbolSequence,
    chi_squared,
    empirical_type,
    entropy,
    is_strongly_typical,
    joint_type,
    kl_divergence,
    sample_iid,
)
from .simulation import (
    ExponentFit,
    SchemeConfig,
    SimulationResult,
    decide_scheme_A,
    decide_scheme_B,
    empirical_exponent,
    encode_scheme_A,
    encode_scheme_B,
    exact_error_probs,
    run_trials,
)

__version__ = "0.1.0"
