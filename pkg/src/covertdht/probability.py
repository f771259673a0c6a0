"""Finite-alphabet probability primitives.

Pmfs, joint pmfs, symbol sequences, KL and chi-squared divergences,
empirical types, strong typicality and i.i.d. sampling. All divergences are
computed internally in nats; ``LogBase.BITS`` converts on the way out
(one multiplication by 1/ln 2, nothing else).

Conventions: 0*log(0/q) = 0 by continuity. A positive p-mass on a q-zero is
not silently mapped to infinity; ``kl_divergence`` raises
:class:`SupportViolation` so callers handle the infinite case explicitly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphabetMismatch,
    DivisionBySupportZero,
    EmptySequence,
    LengthMismatch,
    SupportViolation,
)

LN2 = math.log(2.0)

#: Mass deviations up to this are renormalized; larger ones are rejected.
_MASS_SLACK = 1e-9


class LogBase(enum.Enum):
    """Logarithm base for reported information quantities."""

    NATS = "nats"
    BITS = "bits"

    def from_nats(self, value: float) -> float:
        if self is LogBase.NATS:
            return value
        return value / LN2


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet with a bijective index <-> label mapping."""

    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(self.symbols) == 0:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise KeyError(f"symbol {symbol!r} not in alphabet {self.symbols}") from None

    def __len__(self) -> int:
        return len(self.symbols)


def _as_prob_vector(probs, what: str) -> np.ndarray:
    arr = np.asarray(probs, dtype=float)
    if np.any(arr < 0):
        raise ValueError(f"{what} has negative entries")
    total = float(arr.sum())
    if abs(total - 1.0) > _MASS_SLACK:
        raise ValueError(f"{what} mass {total} deviates from 1 by more than {_MASS_SLACK}")
    arr = arr / total
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Pmf:
    """Probability mass function over a finite alphabet.

    Construction normalizes inputs whose total mass is within 1e-9 of 1 and
    rejects anything further off.
    """

    alphabet: Alphabet
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _as_prob_vector(self.probs, "pmf")
        if arr.shape != (self.alphabet.size,):
            raise ValueError(
                f"pmf length {arr.shape} does not match alphabet size {self.alphabet.size}"
            )
        object.__setattr__(self, "probs", arr)

    def __getitem__(self, symbol) -> float:
        return float(self.probs[self.alphabet.index(symbol)])

    def support(self) -> np.ndarray:
        """Boolean mask of symbols with positive probability."""
        return self.probs > 0.0

    @staticmethod
    def bernoulli(p: float, alphabet: Alphabet | None = None) -> "Pmf":
        """Bern(p) on {0, 1}: probability p on symbol 1."""
        if alphabet is None:
            alphabet = Alphabet((0, 1))
        return Pmf(alphabet, np.array([1.0 - p, p]))


@dataclass(frozen=True)
class JointPmf:
    """Joint pmf over a product of two finite alphabets (rows x columns)."""

    row_alphabet: Alphabet
    col_alphabet: Alphabet
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if arr.shape != (self.row_alphabet.size, self.col_alphabet.size):
            raise ValueError("joint pmf shape does not match alphabets")
        flat = _as_prob_vector(arr.ravel(), "joint pmf")
        arr = flat.reshape(arr.shape)
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    def row_marginal(self) -> Pmf:
        return Pmf(self.row_alphabet, self.probs.sum(axis=1))

    def col_marginal(self) -> Pmf:
        return Pmf(self.col_alphabet, self.probs.sum(axis=0))

    @staticmethod
    def product(p_row: Pmf, p_col: Pmf) -> "JointPmf":
        return JointPmf(p_row.alphabet, p_col.alphabet, np.outer(p_row.probs, p_col.probs))


@dataclass(frozen=True)
class SymbolSequence:
    """Length-n sequence of alphabet indices (not labels)."""

    alphabet: Alphabet
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("sequence data must be one-dimensional")
        if arr.size and (arr.min() < 0 or arr.max() >= self.alphabet.size):
            raise ValueError("sequence contains indices outside the alphabet")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def __len__(self) -> int:
        return int(self.data.size)

    def hamming_weight(self, zero_index: int = 0) -> int:
        """Number of positions different from the given index."""
        return int(np.count_nonzero(self.data != zero_index))


def _check_same_alphabet(p: Pmf, q: Pmf) -> None:
    if p.alphabet != q.alphabet:
        raise AlphabetMismatch(f"{p.alphabet.symbols} vs {q.alphabet.symbols}")


def kl_divergence(p: Pmf, q: Pmf, base: LogBase = LogBase.NATS) -> float:
    """D(p || q) = sum_a p(a) log(p(a)/q(a)), with 0 log(0/.) = 0.

    Raises SupportViolation when p puts mass where q does not (the +inf case).
    """
    _check_same_alphabet(p, q)
    return base.from_nats(kl_divergence_vec(p.probs, q.probs))


def kl_divergence_vec(p: np.ndarray, q: np.ndarray) -> float:
    """Nats-valued KL divergence on raw probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        raise SupportViolation("p is not absolutely continuous w.r.t. q")
    val = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    return max(val, 0.0)


def joint_kl_divergence(p: JointPmf, q: JointPmf, base: LogBase = LogBase.NATS) -> float:
    """KL divergence between joint pmfs on the same product alphabet."""
    if p.row_alphabet != q.row_alphabet or p.col_alphabet != q.col_alphabet:
        raise AlphabetMismatch("joint pmfs over different product alphabets")
    return base.from_nats(kl_divergence_vec(p.probs.ravel(), q.probs.ravel()))


def chi_squared(p: Pmf, q: Pmf) -> float:
    """Chi-squared distance sum_a (p(a)-q(a))^2 / q(a)."""
    _check_same_alphabet(p, q)
    diff = p.probs - q.probs
    bad = (q.probs == 0.0) & (diff != 0.0)
    if np.any(bad):
        raise DivisionBySupportZero("p differs from q on a q-zero symbol")
    mask = q.probs > 0.0
    return float(np.sum(diff[mask] ** 2 / q.probs[mask]))


def entropy(p: Pmf, base: LogBase = LogBase.NATS) -> float:
    """Shannon entropy -sum p log p."""
    mask = p.probs > 0.0
    val = -float(np.sum(p.probs[mask] * np.log(p.probs[mask])))
    return base.from_nats(max(val, 0.0))


def empirical_type(s: SymbolSequence) -> Pmf:
    """Empirical distribution (type) of a sequence."""
    if len(s) == 0:
        raise EmptySequence("cannot take the type of an empty sequence")
    counts = np.bincount(s.data, minlength=s.alphabet.size)
    return Pmf(s.alphabet, counts / len(s))


def joint_type(s1: SymbolSequence, s2: SymbolSequence) -> JointPmf:
    """Joint empirical distribution of two equal-length sequences."""
    if len(s1) == 0 or len(s2) == 0:
        raise EmptySequence("cannot take the joint type of empty sequences")
    if len(s1) != len(s2):
        raise LengthMismatch(f"{len(s1)} vs {len(s2)}")
    flat = s1.data * s2.alphabet.size + s2.data
    counts = np.bincount(flat, minlength=s1.alphabet.size * s2.alphabet.size)
    mat = counts.reshape(s1.alphabet.size, s2.alphabet.size) / len(s1)
    return JointPmf(s1.alphabet, s2.alphabet, mat)


def is_strongly_typical(s: SymbolSequence, p: Pmf, mu: float) -> bool:
    """Strong typicality: per-letter |type - p| <= mu and exact zeros preserved.

    The closed (<=) per-letter condition is used so boundary cases are
    deterministic.
    """
    if s.alphabet != p.alphabet:
        raise AlphabetMismatch("sequence and pmf alphabets differ")
    if mu <= 0:
        raise ValueError("mu must be positive")
    pi = empirical_type(s).probs
    if np.any((p.probs == 0.0) & (pi > 0.0)):
        return False
    return bool(np.all(np.abs(pi - p.probs) <= mu))


def type_is_typical(type_probs: np.ndarray, p: Pmf, mu: float) -> bool:
    """Typicality predicate applied directly to a type vector."""
    type_probs = np.asarray(type_probs, dtype=float)
    if np.any((p.probs == 0.0) & (type_probs > 0.0)):
        return False
    return bool(np.all(np.abs(type_probs - p.probs) <= mu))


def sample_iid(j: JointPmf, n: int, seed: int) -> tuple[SymbolSequence, SymbolSequence]:
    """Draw n i.i.d. pairs from a joint pmf; deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    flat = rng.choice(j.probs.size, size=n, p=j.probs.ravel())
    rows = flat // j.col_alphabet.size
    cols = flat % j.col_alphabet.size
    return SymbolSequence(j.row_alphabet, rows), SymbolSequence(j.col_alphabet, cols)
