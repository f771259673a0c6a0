"""Method-of-types enumeration helpers.

Exact probabilities of type-level events for i.i.d. sequences are computed by
summing over all n-types (compositions of n) in the log domain. The number of
n-types over an alphabet of size d is C(n+d-1, d-1); callers are expected to
keep d small and are rejected beyond a hard cap rather than silently thrashing.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterator

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import AlphabetTooLarge
from .probability import Pmf

#: Upper bound on enumerated types per call.
MAX_TYPES = 5_000_000

NEG_INF = -math.inf


def num_types(n: int, dim: int) -> int:
    return math.comb(n + dim - 1, dim - 1)


def check_enumerable(n: int, dim: int, what: str = "type enumeration") -> None:
    if num_types(n, dim) > MAX_TYPES:
        raise AlphabetTooLarge(
            f"{what}: {num_types(n, dim)} n-types over {dim} symbols exceeds the "
            f"cap {MAX_TYPES}; use Monte Carlo instead"
        )


def iter_types(n: int, dim: int) -> Iterator[np.ndarray]:
    """All count vectors of length `dim` summing to n."""
    if dim == 1:
        yield np.array([n])
        return
    for head in range(n + 1):
        for tail in iter_types(n - head, dim - 1):
            yield np.concatenate(([head], tail))


def log_type_class_prob(counts: np.ndarray, p: np.ndarray) -> float:
    """log Pr[type(X^n) = counts/n] for X i.i.d. p; -inf on impossible types."""
    counts = np.asarray(counts)
    n = int(counts.sum())
    p = np.asarray(p, dtype=float)
    if np.any((counts > 0) & (p == 0.0)):
        return NEG_INF
    mask = counts > 0
    log_multinom = gammaln(n + 1) - gammaln(counts + 1).sum()
    return float(log_multinom + np.sum(counts[mask] * np.log(p[mask])))


def log_prob_type_event(p: Pmf, n: int, predicate: Callable[[np.ndarray], bool]) -> float:
    """log Pr[type(X^n) satisfies predicate], X i.i.d. p; -inf when impossible.

    The predicate receives the type as a probability vector counts/n.
    """
    check_enumerable(n, p.alphabet.size)
    logs = []
    for counts in iter_types(n, p.alphabet.size):
        if predicate(counts / n):
            lp = log_type_class_prob(counts, p.probs)
            if lp > NEG_INF:
                logs.append(lp)
    if not logs:
        return NEG_INF
    return float(min(logsumexp(logs), 0.0))


def prob_type_event(p: Pmf, n: int, predicate: Callable[[np.ndarray], bool]) -> float:
    """Exact Pr[type(X^n) satisfies predicate], X i.i.d. p."""
    lp = log_prob_type_event(p, n, predicate)
    return 0.0 if lp == NEG_INF else math.exp(lp)


def prob_typical(p: Pmf, n: int, mu: float) -> float:
    """Exact Pr[X^n strongly mu-typical for p], X i.i.d. p."""
    probs = p.probs

    def pred(t: np.ndarray) -> bool:
        if np.any((probs == 0.0) & (t > 0.0)):
            return False
        return bool(np.all(np.abs(t - probs) <= mu))

    return prob_type_event(p, n, pred)


def prob_typical_for(source: Pmf, reference: Pmf, n: int, mu: float) -> float:
    """Exact Pr[X^n strongly mu-typical for `reference`], X i.i.d. `source`."""
    ref = reference.probs

    def pred(t: np.ndarray) -> bool:
        if np.any((ref == 0.0) & (t > 0.0)):
            return False
        return bool(np.all(np.abs(t - ref) <= mu))

    return prob_type_event(source, n, pred)


def iter_types_with_logprob(p: Pmf, n: int):
    """Pairs (type vector counts/n, log class probability) over all n-types."""
    check_enumerable(n, p.alphabet.size)
    for counts in iter_types(n, p.alphabet.size):
        yield counts / n, log_type_class_prob(counts, p.probs)
