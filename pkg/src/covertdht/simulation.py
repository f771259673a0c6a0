"""Encoders, decision rules, exact error probabilities and Monte-Carlo
estimation for the two covert testing schemes.

Scheme A (sublinear burst): the sensor checks whether its source block is
strongly typical; if so it stays silent (all zeros), otherwise it sends the
designated non-zero symbol over the first k(n) channel uses and zeros after.
The decision center declares the null hypothesis iff the marker output
appears among the first k(n) outputs and its own observations are typical.
The marker scan is restricted to the burst window: the zero-input tail emits
the marker with positive probability, so scanning the whole block would
saturate the Type-II error.

Scheme B (full block): the sensor transmits the constant codeword iff its
observed source type crosses the divergence threshold, else all zeros. The
decision center declares the null hypothesis iff its observations and the
channel outputs are both strongly typical (outputs tested against the
zero-input row).

Exact error probabilities sum over joint source types; both encoders depend
on the block only through the type of U^n and both decisions only through
the types of V^n and Y^n, so no sequence enumeration is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp, xlogy

from .channel import Dmc
from .errors import ConfigMismatch, DegenerateInput
from .exponents import PbarSet
from .probability import (
    LN2,
    JointPmf,
    Pmf,
    SymbolSequence,
    empirical_type,
    is_strongly_typical,
)
from .typesum import (
    NEG_INF,
    check_enumerable,
    iter_types,
    log_type_class_prob,
)


def make_k_rule(spec: str) -> Callable[[int], int]:
    """Burst-length rules: 'sqrt', 'log', or 'pow:a' with 0 < a < 1."""
    if spec == "sqrt":
        return lambda n: max(1, math.isqrt(n - 1) + 1)  # ceil(sqrt(n))
    if spec == "log":
        return lambda n: max(1, math.ceil(math.log(n + 1)))
    if spec.startswith("pow:"):
        a = float(spec.split(":", 1)[1])
        if not 0.0 < a < 1.0:
            raise ValueError("power rule requires 0 < a < 1")
        return lambda n: max(1, math.ceil(n**a))
    raise ValueError(f"unknown k-rule {spec!r}")


@dataclass(frozen=True)
class SchemeConfig:
    """Configuration of one coding-and-testing scheme.

    ``x1`` is the full-block codeword symbol (scheme B), ``x_hat``/``y_star``
    the burst symbol and marker output (scheme A). ``k_rule`` maps n to the
    burst length and must satisfy k(n) <= n on the blocklengths in use.
    """

    scheme: str  # "A" or "B"
    mu: float = 0.05
    x1: object = None
    x_hat: object = None
    y_star: object = None
    k_spec: str = "sqrt"

    def __post_init__(self):
        if self.scheme not in ("A", "B"):
            raise ValueError("scheme must be 'A' or 'B'")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.scheme == "A" and (self.x_hat is None or self.y_star is None):
            raise ValueError("scheme A requires x_hat and y_star")
        if self.scheme == "B" and self.x1 is None:
            raise ValueError("scheme B requires x1")

    def k(self, n: int) -> int:
        kv = make_k_rule(self.k_spec)(n)
        if kv > n:
            raise ConfigMismatch(f"k({n}) = {kv} exceeds the blocklength")
        return kv

    def validate_against(self, dmc: Dmc) -> None:
        """Scheme A needs the (x_hat, y_star) pairing to be a real dead edge."""
        if self.scheme == "A":
            if dmc.y_row(dmc.zero_symbol)[self.y_star] <= 0.0:
                raise ConfigMismatch("y_star has zero probability under the zero input")
            if dmc.y_row(self.x_hat)[self.y_star] != 0.0:
                raise ConfigMismatch("y_star is reachable from x_hat; marker is ambiguous")
        else:
            if self.x1 == dmc.zero_symbol:
                raise ConfigMismatch("x1 must differ from the zero symbol")


def encode_scheme_A(u: SymbolSequence, cfg: SchemeConfig, p_u: Pmf, dmc: Dmc) -> SymbolSequence:
    """Burst encoder: zeros if the source block is typical, else x_hat^k, then zeros."""
    n = len(u)
    k = cfg.k(n)
    x = np.full(n, dmc.zero_index, dtype=np.int64)
    if not is_strongly_typical(u, p_u, cfg.mu):
        x[:k] = dmc.input_alphabet.index(cfg.x_hat)
    return SymbolSequence(dmc.input_alphabet, x)


def decide_scheme_A(
    v: SymbolSequence, y: SymbolSequence, cfg: SchemeConfig, p_v: Pmf, dmc: Dmc
) -> int:
    """Declare 0 iff the marker appears in the burst window and V^n is typical."""
    n = len(y)
    if len(v) != n:
        raise ConfigMismatch("v and y lengths differ")
    k = cfg.k(n)
    marker = dmc.y_alphabet.index(cfg.y_star)
    if not np.any(y.data[:k] == marker):
        return 1
    if not is_strongly_typical(v, p_v, cfg.mu):
        return 1
    return 0


def encode_scheme_B(
    u: SymbolSequence, cfg: SchemeConfig, p_u: Pmf, pbar: PbarSet, dmc: Dmc
) -> SymbolSequence:
    """Full-block encoder: x1^n iff the source type crosses the threshold."""
    from .exponents import pbar_contains

    n = len(u)
    if pbar_contains(empirical_type(u), p_u, pbar):
        return SymbolSequence(
            dmc.input_alphabet, np.full(n, dmc.input_alphabet.index(cfg.x1), dtype=np.int64)
        )
    return SymbolSequence(dmc.input_alphabet, np.full(n, dmc.zero_index, dtype=np.int64))


def decide_scheme_B(
    v: SymbolSequence, y: SymbolSequence, cfg: SchemeConfig, p_v: Pmf, dmc: Dmc
) -> int:
    """Declare 0 iff V^n and Y^n are both typical (Y against the zero-input row)."""
    if len(v) != len(y):
        raise ConfigMismatch("v and y lengths differ")
    if not is_strongly_typical(v, p_v, cfg.mu):
        return 1
    if not is_strongly_typical(y, dmc.y_row(dmc.zero_symbol), cfg.mu):
        return 1
    return 0


def _typical_mask(t: np.ndarray, ref: np.ndarray, mu: float) -> bool:
    if np.any((ref == 0.0) & (t > 0.0)):
        return False
    return bool(np.all(np.abs(t - ref) <= mu))


def _log_prob_y_typical(dmc: Dmc, x_symbol, n: int, mu: float) -> float:
    """log Pr[Y^n mu-typical for the zero-input row | X^n = x^n constant]."""
    row = dmc.y_row(x_symbol).probs
    ref = dmc.y_row(dmc.zero_symbol).probs
    check_enumerable(n, dmc.y_alphabet.size, "output typicality")
    logs = []
    for counts in iter_types(n, dmc.y_alphabet.size):
        t = counts / n
        if not _typical_mask(t, ref, mu):
            continue
        lp = log_type_class_prob(counts, row)
        if lp > NEG_INF:
            logs.append(lp)
    return float(min(logsumexp(logs), 0.0)) if logs else NEG_INF


def _pbar_member(t_u: np.ndarray, p_u: np.ndarray, tau: float) -> bool:
    mask = t_u > 0.0
    if np.any(mask & (p_u == 0.0)):
        return True
    d = float(np.sum(t_u[mask] * np.log(t_u[mask] / p_u[mask])))
    return d >= tau


def _log_accept_prob(
    cfg: SchemeConfig,
    joint: JointPmf,
    p_u: Pmf,
    p_v: Pmf,
    dmc: Dmc,
    n: int,
    pbar: PbarSet | None,
) -> tuple[float, float]:
    """log Pr[decide 0] and the codeword-transmission probability under `joint`.

    Sums over joint source types; the per-type acceptance factor depends only
    on which constant codeword the encoder emits.
    """
    cells = p_u.alphabet.size * p_v.alphabet.size
    check_enumerable(n, cells, "joint source type enumeration")
    if cfg.scheme == "B":
        if pbar is None:
            raise ConfigMismatch("scheme B needs the threshold set")
        log_acc = {
            "silent": _log_prob_y_typical(dmc, dmc.zero_symbol, n, cfg.mu),
            "active": _log_prob_y_typical(dmc, cfg.x1, n, cfg.mu),
        }
    else:
        k = cfg.k(n)
        p_star0 = dmc.y_row(dmc.zero_symbol)[cfg.y_star]
        p_star1 = dmc.y_row(cfg.x_hat)[cfg.y_star]
        log_acc = {
            "silent": math.log1p(-((1.0 - p_star0) ** k)) if p_star0 > 0 else NEG_INF,
            "active": math.log1p(-((1.0 - p_star1) ** k)) if p_star1 > 0 else NEG_INF,
        }
    logs = []
    logs_active = []
    du = p_u.alphabet.size
    dv = p_v.alphabet.size
    for counts in iter_types(n, cells):
        lp = log_type_class_prob(counts, joint.probs.ravel())
        if lp == NEG_INF:
            continue
        mat = (counts / n).reshape(du, dv)
        t_u = mat.sum(axis=1)
        t_v = mat.sum(axis=0)
        if cfg.scheme == "B":
            active = _pbar_member(t_u, p_u.probs, pbar.tau_nats)
        else:
            active = not _typical_mask(t_u, p_u.probs, cfg.mu)
        if active:
            logs_active.append(lp)
        if not _typical_mask(t_v, p_v.probs, cfg.mu):
            continue
        la = log_acc["active"] if active else log_acc["silent"]
        if la > NEG_INF:
            logs.append(lp + la)
    log_accept = float(min(logsumexp(logs), 0.0)) if logs else NEG_INF
    p_active = float(min(math.exp(logsumexp(logs_active)), 1.0)) if logs_active else 0.0
    return log_accept, p_active


def exact_error_probs(
    cfg: SchemeConfig,
    p_uv: JointPmf,
    q_uv: JointPmf,
    dmc: Dmc,
    n: int,
    pbar: PbarSet | None = None,
) -> tuple[float, float]:
    """Exact (alpha_n, beta_n) by joint-type enumeration.

    Feasible for small alphabets only; raises AlphabetTooLarge otherwise,
    directing the caller to Monte Carlo.
    """
    cfg.validate_against(dmc)
    p_u, p_v = p_uv.row_marginal(), p_uv.col_marginal()
    log_acc_h0, _ = _log_accept_prob(cfg, p_uv, p_u, p_v, dmc, n, pbar)
    log_acc_h1, _ = _log_accept_prob(cfg, q_uv, p_u, p_v, dmc, n, pbar)
    alpha = -math.expm1(log_acc_h0) if log_acc_h0 > NEG_INF else 1.0
    beta = math.exp(log_acc_h1) if log_acc_h1 > NEG_INF else 0.0
    return max(alpha, 0.0), beta


def exact_log_beta(
    cfg: SchemeConfig,
    p_uv: JointPmf,
    q_uv: JointPmf,
    dmc: Dmc,
    n: int,
    pbar: PbarSet | None = None,
) -> float:
    """log beta_n, exact; usable far below floating-point underflow of beta."""
    cfg.validate_against(dmc)
    p_u, p_v = p_uv.row_marginal(), p_uv.col_marginal()
    log_acc_h1, _ = _log_accept_prob(cfg, q_uv, p_u, p_v, dmc, n, pbar)
    return log_acc_h1


@dataclass(frozen=True)
class SimulationResult:
    """Error estimates for one (scheme, n) cell."""

    scheme: str
    n: int
    mu: float
    k: int | None
    alpha: float
    beta: float
    method: str  # "exact" or "mc"
    alpha_ci: float = 0.0  # 95% Wilson half-width (mc only)
    beta_ci: float = 0.0
    trials: int = 0
    seed: int | None = None
    beta_is_upper_bound: bool = False  # rule-of-three stand-in for zero counts
    weight_mean: float = 0.0  # mean Hamming-weight fraction of X^n under H0
    a_bar: float = 0.0  # sqrt of the mean per-position activity under H0

    def as_row(self) -> dict:
        return {
            "scheme": self.scheme,
            "n": self.n,
            "mu": self.mu,
            "k": self.k if self.k is not None else "",
            "alpha": self.alpha,
            "alpha_ci": self.alpha_ci,
            "beta": self.beta,
            "beta_ci": self.beta_ci,
            "method": self.method,
            "seed": self.seed if self.seed is not None else "",
        }


def _wilson_halfwidth(successes: int, trials: int, z: float = 1.959963984540054) -> float:
    if trials == 0:
        return 0.0
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    # distance from the raw estimate to the further Wilson bound
    return max(abs(center + half - phat), abs(center - half - phat))


def _kl_rows_to(p_rows: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise D(row || q) in nats, +inf where absolute continuity fails."""
    out = np.sum(xlogy(p_rows, p_rows), axis=1)
    with np.errstate(divide="ignore"):
        logq = np.log(q)
    bad = (p_rows > 0) & (q == 0.0)[None, :]
    cross = np.where(p_rows > 0, p_rows * logq[None, :], 0.0)
    out = out - cross.sum(axis=1)
    out[np.any(bad, axis=1)] = np.inf
    return out


def _sample_counts(rng, pmf_flat: np.ndarray, trials: int, n: int) -> np.ndarray:
    """Per-trial symbol counts of i.i.d. draws: multinomial, vectorized."""
    return rng.multinomial(n, pmf_flat, size=trials)


def run_trials(
    cfg: SchemeConfig,
    p_uv: JointPmf,
    q_uv: JointPmf,
    dmc: Dmc,
    n: int,
    trials: int,
    seed: int,
    pbar: PbarSet | None = None,
    chunk: int = 200_000,
) -> SimulationResult:
    """Monte-Carlo estimate of (alpha_n, beta_n) with Wilson 95% intervals.

    Per-chunk randomness is derived from (seed, hypothesis, chunk index), so
    results are reproducible and independent of scheduling. Both encoders and
    decisions are functions of the source/output types only, so per-trial
    type counts are sampled directly (multinomially) instead of materializing
    every sequence; the distribution of every decision is identical.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cfg.validate_against(dmc)
    p_u, p_v = p_uv.row_marginal(), p_uv.col_marginal()
    ref_y = dmc.y_row(dmc.zero_symbol).probs
    k = cfg.k(n) if cfg.scheme == "A" else None

    du, dv = p_u.alphabet.size, p_v.alphabet.size
    errors = {0: 0, 1: 0}  # H0: count Hhat=1; H1: count Hhat=0
    active_total = 0

    for hyp, law in ((0, p_uv), (1, q_uv)):
        flat = law.probs.ravel()
        done = 0
        chunk_idx = 0
        while done < trials:
            m = min(chunk, trials - done)
            rng = np.random.default_rng([seed, hyp, chunk_idx])
            joint_counts = _sample_counts(rng, flat, m, n)  # (m, du*dv)
            cu = joint_counts.reshape(m, du, dv).sum(axis=2)
            cv = joint_counts.reshape(m, du, dv).sum(axis=1)
            tu = cu / n
            tv = cv / n

            if cfg.scheme == "B":
                d_u = _kl_rows_to(tu, p_u.probs)
                active = d_u >= pbar.tau_nats
            else:
                zero_ok = ~np.any((p_u.probs == 0.0)[None, :] & (tu > 0), axis=1)
                active = ~(zero_ok & np.all(np.abs(tu - p_u.probs[None, :]) <= cfg.mu, axis=1))

            v_zero_ok = ~np.any((p_v.probs == 0.0)[None, :] & (tv > 0), axis=1)
            v_typ = v_zero_ok & np.all(np.abs(tv - p_v.probs[None, :]) <= cfg.mu, axis=1)

            if cfg.scheme == "B":
                # sample channel output counts for each trial's constant codeword
                row_active = dmc.y_row(cfg.x1).probs
                cy = np.empty((m, dmc.y_alphabet.size), dtype=np.int64)
                n_act = int(active.sum())
                if n_act:
                    cy[active] = rng.multinomial(n, row_active, size=n_act)
                if m - n_act:
                    cy[~active] = rng.multinomial(n, ref_y, size=m - n_act)
                ty = cy / n
                y_zero_ok = ~np.any((ref_y == 0.0)[None, :] & (ty > 0), axis=1)
                y_typ = y_zero_ok & np.all(np.abs(ty - ref_y[None, :]) <= cfg.mu, axis=1)
                accept = v_typ & y_typ
            else:
                p_star0 = dmc.y_row(dmc.zero_symbol)[cfg.y_star]
                p_star1 = dmc.y_row(cfg.x_hat)[cfg.y_star]
                star_counts = np.where(
                    active,
                    rng.binomial(k, p_star1, size=m),
                    rng.binomial(k, p_star0, size=m),
                )
                accept = v_typ & (star_counts > 0)

            if hyp == 0:
                errors[0] += int(np.count_nonzero(~accept))
                active_total += int(active.sum())
            else:
                errors[1] += int(np.count_nonzero(accept))
            done += m
            chunk_idx += 1

    alpha = errors[0] / trials
    beta = errors[1] / trials
    beta_is_ub = False
    if errors[1] == 0:
        beta = 3.0 / trials  # rule of three: no misses observed
        beta_is_ub = True
    frac_active = active_total / trials
    block = k if cfg.scheme == "A" else n
    weight_mean = frac_active * block / n
    a_bar = math.sqrt(frac_active * block / n)
    return SimulationResult(
        scheme=cfg.scheme,
        n=n,
        mu=cfg.mu,
        k=k,
        alpha=alpha,
        beta=beta,
        method="mc",
        alpha_ci=_wilson_halfwidth(errors[0], trials),
        beta_ci=_wilson_halfwidth(errors[1], trials),
        trials=trials,
        seed=seed,
        beta_is_upper_bound=beta_is_ub,
        weight_mean=weight_mean,
        a_bar=a_bar,
    )


@dataclass(frozen=True)
class ExponentFit:
    """Per-blocklength Type-II exponents and their linear trend (bits)."""

    ns: tuple
    exponents_bits: tuple  # -(1/n) log2 beta_n
    slope_bits: float  # least-squares slope of -log2 beta_n vs n
    intercept_bits: float
    monotone_increasing: bool
    excluded_ns: tuple = ()


def empirical_exponent(ns, betas=None, log_betas=None) -> ExponentFit:
    """Fit the exponential decay of beta_n over a blocklength grid.

    Accepts either raw beta values or natural-log values (preferred when
    beta underflows). Points with beta exactly zero are excluded and listed.
    Non-monotone finite-n behavior is flagged, never smoothed.
    """
    ns = list(ns)
    if log_betas is None:
        if betas is None:
            raise ValueError("provide betas or log_betas")
        log_betas = [math.log(b) if b > 0 else NEG_INF for b in betas]
    pts = [(n, lb) for n, lb in zip(ns, log_betas) if lb > NEG_INF]
    excluded = tuple(n for n, lb in zip(ns, log_betas) if lb == NEG_INF)
    if len(pts) < 3:
        raise DegenerateInput("need at least 3 blocklengths with positive beta")
    xs = np.array([p[0] for p in pts], dtype=float)
    neg_log2_beta = np.array([-p[1] / LN2 for p in pts])
    slope, intercept = np.polyfit(xs, neg_log2_beta, 1)
    exps = neg_log2_beta / xs
    mono = bool(np.all(np.diff(exps) > -1e-12))
    return ExponentFit(
        ns=tuple(int(x) for x in xs),
        exponents_bits=tuple(float(e) for e in exps),
        slope_bits=float(slope),
        intercept_bits=float(-intercept),
        monotone_increasing=mono,
        excluded_ns=excluded,
    )


def exact_weight_stats(
    cfg: SchemeConfig, p_uv: JointPmf, dmc: Dmc, n: int, pbar: PbarSet | None = None
) -> tuple[float, float]:
    """Exact (mean weight fraction, a_bar) of the encoder output under the null.

    The codeword occupies the whole block (scheme B) or the first k uses
    (scheme A), so both statistics reduce to the transmission probability.
    """
    p_u, p_v = p_uv.row_marginal(), p_uv.col_marginal()
    _, p_active = _log_accept_prob(cfg, p_uv, p_u, p_v, dmc, n, pbar)
    block = cfg.k(n) if cfg.scheme == "A" else n
    return p_active * block / n, math.sqrt(p_active * block / n)
