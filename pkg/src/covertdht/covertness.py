"""Warden-side metrics: exact mixture divergence, quadratic and type-based
bounds, transmission probabilities, and the positivity margins behind the
exponential covertness decay.

The warden sees either the all-zero product law G0^n or, with probability
delta, the constant-codeword product law G1^n. The exact divergence of the
mixture to G0^n collapses to a sum over n-types because the likelihood ratio
of two product laws with constant inputs depends on the output sequence only
through its type. Each type contributes

    p0 * [ (1+t) log1p(t) - t ],   t = delta * (p1/p0 - 1),

which is non-negative, so the sum is cancellation-free; the linear term
sums to zero exactly and is dropped analytically, not numerically.

All divergences are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import SupportViolation
from .exponents import PbarSet
from .probability import Pmf, chi_squared, kl_divergence_vec
from .typesum import (
    NEG_INF,
    check_enumerable,
    iter_types,
    log_type_class_prob,
    prob_type_event,
)

_INF = math.inf


def _check_rows(g0: Pmf, g1: Pmf) -> None:
    if g0.alphabet != g1.alphabet:
        raise SupportViolation("warden rows over different output alphabets")
    if np.any((g1.probs > 0.0) & (g0.probs == 0.0)):
        raise SupportViolation("codeword row puts mass outside the zero row's support")


def _mix_term(t: float) -> float:
    """(1+t) log1p(t) - t, the per-type divergence kernel; >= 0 for t >= -1."""
    if abs(t) < 1e-4:
        # series to avoid cancellation: t^2/2 - t^3/6 + t^4/12
        return t * t * (0.5 + t * (-1.0 / 6.0 + t / 12.0))
    return (1.0 + t) * math.log1p(t) - t


def two_point_divergence_exact(g0: Pmf, g1: Pmf, delta: float, n: int) -> float:
    """Exact D( (1-delta) G0^n + delta G1^n  ||  G0^n ) in nats.

    Sums over n-types of the output alphabet; O(n^(|Z|-1)) terms, all
    non-negative.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    _check_rows(g0, g1)
    if delta == 0.0 or np.array_equal(g0.probs, g1.probs):
        return 0.0
    check_enumerable(n, g0.alphabet.size, "exact warden divergence")
    log_ratio = np.full(g0.alphabet.size, NEG_INF)
    mask = g1.probs > 0.0
    log_ratio[mask] = np.log(g1.probs[mask]) - np.log(g0.probs[mask])
    total = 0.0
    log_delta = math.log(delta)
    for counts in iter_types(n, g0.alphabet.size):
        lp0 = log_type_class_prob(counts, g0.probs)
        if lp0 == NEG_INF:
            continue
        active = counts > 0
        ell = float(np.sum(counts[active] * log_ratio[active]))
        if ell <= 500.0:
            term = _mix_term(delta * math.expm1(ell))
            total += math.exp(lp0) * term
        else:
            # t is astronomically large: (1+t)log1p(t) - t = log1p(t) + t*(log1p(t)-1)
            # with p0*t = delta*(p1-p0) evaluated in logs.
            lt = log_delta + ell  # log t up to the negligible -delta term
            p0 = math.exp(lp0)
            p1 = math.exp(lp0 + ell)
            total += p0 * lt + delta * (p1 - p0) * (lt - 1.0)
    return max(total, 0.0)


def chi_squared_product(g0: Pmf, g1: Pmf, n: int) -> float:
    """Chi-squared distance between the product laws G1^n and G0^n.

    Equals (1 + chi2(G1||G0))^n - 1; evaluated as expm1(n log1p(chi2)).
    """
    _check_rows(g0, g1)
    c = chi_squared(g1, g0)
    return float(math.expm1(n * math.log1p(c)))


def warden_divergence_bounds(
    g0: Pmf, g1: Pmf, delta: float, n: int, literal: bool = False
) -> tuple[float, float]:
    """Quadratic and type-based upper bounds on the warden divergence.

    quad_bound = delta^2 * chi2(G1^n || G0^n).
    type_bound = (n+1)^|Z| * max over n-types pi of
        exp(-n D(pi||G0)) * (exp(-n (D(pi||G1) - D(pi||G0))) - 1)^2.
    The derivation produces the G0 exponent in the leading factor (the type
    probability is taken under G0); ``literal=True`` evaluates the G1 variant
    instead, for comparison.
    """
    _check_rows(g0, g1)
    quad = delta * delta * chi_squared_product(g0, g1, n)
    check_enumerable(n, g0.alphabet.size, "type-based warden bound")
    best = 0.0
    for counts in iter_types(n, g0.alphabet.size):
        t = counts / n
        try:
            d0 = kl_divergence_vec(t, g0.probs)
        except SupportViolation:
            continue  # zero-probability direction under both laws
        try:
            d1 = kl_divergence_vec(t, g1.probs)
        except SupportViolation:
            d1 = _INF
        lead = d1 if literal else d0
        if d1 == _INF:
            # (e^{-n(d1-d0)} - 1)^2 -> 1
            term = math.exp(-n * lead) if lead < _INF else 0.0
        else:
            # e^{-n lead} (e^{-n(d1-d0)} - 1)^2, expanded for stability
            exps = [-n * lead - 2.0 * n * (d1 - d0), -n * lead - n * (d1 - d0), -n * lead]
            term = math.exp(exps[0]) - 2.0 * math.exp(exps[1]) + math.exp(exps[2])
        best = max(best, term)
    type_bound = (n + 1) ** g0.alphabet.size * best
    return quad, type_bound


def delta_scheme_B(p_u: Pmf, pbar: PbarSet, n: int) -> tuple[float, float]:
    """Probability that the full-block scheme transmits the codeword.

    Returns (exact, bound): the exact probability that the observed source
    type crosses the divergence threshold, and the polynomial-times-
    exponential upper bound (n+1)^|U| max e^{-n D}.
    """
    tau = pbar.tau_nats
    check_enumerable(n, p_u.alphabet.size, "transmission probability")
    logs = []
    best_exp = NEG_INF
    for counts in iter_types(n, p_u.alphabet.size):
        t = counts / n
        try:
            d = kl_divergence_vec(t, p_u.probs)
        except SupportViolation:
            d = _INF
        if d < tau:
            continue
        if d < _INF:
            best_exp = max(best_exp, -n * d)
        lp = log_type_class_prob(counts, p_u.probs)
        if lp > NEG_INF:
            logs.append(lp)
    exact = float(min(math.exp(logsumexp(logs)), 1.0)) if logs else 0.0
    bound = (n + 1) ** p_u.alphabet.size * math.exp(best_exp) if best_exp > NEG_INF else 0.0
    return exact, bound


def scheme_B_positivity(
    p_u: Pmf,
    pbar: PbarSet,
    g0: Pmf,
    g1: Pmf,
    grid_step: float = 1e-2,
) -> tuple[float, float, float]:
    """Minima of the three covertness decay exponents over a simplex grid.

    The three expressions, minimized over warden-output pmfs pi and source
    types pi_U inside the transmission set, are

        3 D(pi||G1) - 2 D(pi||G0) + 2 D(pi_U||P_U)
        2 D(pi||G1) -   D(pi||G0) + 2 D(pi_U||P_U)
          D(pi||G1)               + 2 D(pi_U||P_U)

    All three must be positive for the warden divergence to vanish
    exponentially. The joint minimum separates into a channel part plus twice
    the source part, so the two grids are scanned independently.
    """
    _check_rows(g0, g1)
    from .exponents import _simplex_grid  # shared simplex lattice

    a1 = a2 = a3 = _INF
    for pi in _simplex_grid(g0.alphabet.size, grid_step):
        try:
            d0 = kl_divergence_vec(pi, g0.probs)
        except SupportViolation:
            continue
        try:
            d1 = kl_divergence_vec(pi, g1.probs)
        except SupportViolation:
            d1 = _INF
        if d1 == _INF:
            continue  # all three terms are +inf in this direction
        a1 = min(a1, 3.0 * d1 - 2.0 * d0)
        a2 = min(a2, 2.0 * d1 - d0)
        a3 = min(a3, d1)
    b = _INF
    for pi_u in _simplex_grid(p_u.alphabet.size, grid_step):
        try:
            du = kl_divergence_vec(pi_u, p_u.probs)
        except SupportViolation:
            continue
        if du >= pbar.tau_nats:
            b = min(b, du)
    return (a1 + 2.0 * b, a2 + 2.0 * b, a3 + 2.0 * b)


def scheme_A_atypicality(p_u: Pmf, n: int, mu: float) -> float:
    """Exact probability that the sensor's source block is mu-atypical.

    Summed directly over the atypical types rather than as 1 - Pr[typical],
    which would round to zero once the probability drops below machine
    epsilon.
    """
    probs = p_u.probs

    def atypical(t: np.ndarray) -> bool:
        if np.any((probs == 0.0) & (t > 0.0)):
            return True
        return bool(np.any(np.abs(t - probs) > mu))

    return prob_type_event(p_u, n, atypical)


def scheme_A_divergence(g0: Pmf, g1: Pmf, delta: float, k: int) -> tuple[float, float]:
    """Warden divergence of the sublinear-burst scheme, exact and quad bound.

    Only the first k channel uses carry the two-point input law; the padded
    zero tail contributes nothing, so the exact value is the mixture
    divergence at blocklength k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    exact = two_point_divergence_exact(g0, g1, delta, k)
    quad = delta * delta * chi_squared_product(g0, g1, k)
    return exact, quad


@dataclass(frozen=True)
class CovertnessReport:
    """One row of a covertness sweep (divergences in nats)."""

    n: int
    delta_n: float
    d_n_exact: float | None
    quad_bound: float
    type_bound: float
    bound_only: bool = False

    def as_row(self) -> dict:
        return {
            "n": self.n,
            "delta_n": self.delta_n,
            "d_n_exact": self.d_n_exact,
            "quad_bound": self.quad_bound,
            "type_bound": self.type_bound,
            "bound_only": self.bound_only,
        }


def scheme_B_covertness(p_u: Pmf, pbar: PbarSet, g0: Pmf, g1: Pmf, n: int) -> CovertnessReport:
    """Exact warden divergence and both bounds for the full-block scheme."""
    delta, _ = delta_scheme_B(p_u, pbar, n)
    quad, type_b = warden_divergence_bounds(g0, g1, delta, n)
    if g0.alphabet.size <= 3:
        exact = two_point_divergence_exact(g0, g1, delta, n)
        return CovertnessReport(n, delta, exact, quad, type_b)
    return CovertnessReport(n, delta, None, quad, type_b, bound_only=True)


def scheme_A_covertness(
    p_u: Pmf, g0: Pmf, g1: Pmf, n: int, k: int, mu: float
) -> CovertnessReport:
    """Exact warden divergence and both bounds for the sublinear-burst scheme."""
    delta = scheme_A_atypicality(p_u, n, mu)
    quad, type_b = warden_divergence_bounds(g0, g1, delta, k)
    if g0.alphabet.size <= 3:
        exact, _ = scheme_A_divergence(g0, g1, delta, k)
        return CovertnessReport(n, delta, exact, quad, type_b)
    return CovertnessReport(n, delta, None, quad, type_b, bound_only=True)
