"""DMC representation and covert-channel admissibility checks.

A channel is stored through its two conditional marginals Y|X and Z|X only.
Every quantity computed in this library (warden divergence, error
probabilities, all exponents) depends on the joint law Y,Z|X exclusively
through these marginals, so Y and Z are sampled conditionally independently
given X.

Admissibility, in the covert-communication convention, requires that
(a) the zero-input warden row is not a mixture of the non-zero-input rows,
(b) every warden row's support is contained in the zero row's support, and
(c) the same support inclusion holds on the decision-center side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .probability import Alphabet, Pmf, SymbolSequence

#: Absolute tolerance for "row equals mixture" feasibility. Exact zeros in
#: channel matrices are compared exactly: matrices are model inputs, not
#: estimates.
_MIX_TOL = 1e-9


def _check_row_stochastic(mat: np.ndarray, rows: int, cols: int, name: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=float)
    if arr.shape != (rows, cols):
        raise ValueError(f"{name} must have shape ({rows}, {cols}), got {arr.shape}")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    if np.any(np.abs(arr.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError(f"{name} rows must each sum to 1")
    arr = arr / arr.sum(axis=1, keepdims=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dmc:
    """Discrete memoryless channel with designated zero input symbol."""

    input_alphabet: Alphabet
    y_alphabet: Alphabet
    z_alphabet: Alphabet
    y_given_x: np.ndarray = field(repr=False)
    z_given_x: np.ndarray = field(repr=False)
    zero_symbol: object = 0

    def __post_init__(self):
        object.__setattr__(
            self,
            "y_given_x",
            _check_row_stochastic(
                self.y_given_x, self.input_alphabet.size, self.y_alphabet.size, "y_given_x"
            ),
        )
        object.__setattr__(
            self,
            "z_given_x",
            _check_row_stochastic(
                self.z_given_x, self.input_alphabet.size, self.z_alphabet.size, "z_given_x"
            ),
        )
        # raises KeyError if the zero symbol is missing
        self.input_alphabet.index(self.zero_symbol)

    @property
    def zero_index(self) -> int:
        return self.input_alphabet.index(self.zero_symbol)

    def y_row(self, x) -> Pmf:
        """Output pmf of the decision-center channel for input symbol x."""
        return Pmf(self.y_alphabet, self.y_given_x[self.input_alphabet.index(x)])

    def z_row(self, x) -> Pmf:
        """Output pmf of the warden channel for input symbol x."""
        return Pmf(self.z_alphabet, self.z_given_x[self.input_alphabet.index(x)])

    def nonzero_inputs(self) -> list:
        zi = self.zero_index
        return [s for i, s in enumerate(self.input_alphabet.symbols) if i != zi]


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the three admissibility checks plus connectivity."""

    mixture_ok: bool
    warden_support_ok: bool
    center_support_ok: bool
    mixture_weights: np.ndarray | None = None  # mixture weights over non-zero inputs
    warden_support_witness: tuple | None = None  # (input symbol, z symbol)
    center_support_witness: tuple | None = None  # (input symbol, y symbol)
    partially_connected: tuple | None = None  # (x_hat, y_star)

    @property
    def all_pass(self) -> bool:
        return self.mixture_ok and self.warden_support_ok and self.center_support_ok


def _mixture_witness(dmc: Dmc) -> np.ndarray | None:
    """Weights psi over non-zero inputs with sum psi(x) Gz(.|x) = Gz(.|0), or None.

    Solved as a linear feasibility problem; point-mass psi are included
    (they are pmfs over the non-zero inputs).
    """
    zi = dmc.zero_index
    others = [i for i in range(dmc.input_alphabet.size) if i != zi]
    target = dmc.z_given_x[zi]
    rows = dmc.z_given_x[others]  # shape (m, |Z|)
    m = len(others)
    if m == 1:
        if np.max(np.abs(rows[0] - target)) <= _MIX_TOL:
            return np.array([1.0])
        return None
    # equality constraints: rows^T psi = target, sum psi = 1, psi >= 0
    a_eq = np.vstack([rows.T, np.ones((1, m))])
    b_eq = np.concatenate([target, [1.0]])
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs")
    if res.status == 0 and np.max(np.abs(a_eq @ res.x - b_eq)) <= _MIX_TOL:
        return res.x
    return None


def _support_inclusion(mat: np.ndarray, zero_index: int) -> tuple[int, int] | None:
    """First (row, col) with mat[row, col] > 0 but mat[zero, col] == 0, or None."""
    zero_supp = mat[zero_index] > 0.0
    for i in range(mat.shape[0]):
        if i == zero_index:
            continue
        viol = np.nonzero((mat[i] > 0.0) & ~zero_supp)[0]
        if viol.size:
            return i, int(viol[0])
    return None


def find_partial_connectivity(dmc: Dmc) -> tuple | None:
    """Some (x_hat, y_star) with Gy(y*|0) > 0 and Gy(y*|x_hat) = 0, if any.

    Tie-break is deterministic: smallest x_hat index, then smallest y_star
    index. Zero entries are compared exactly.
    """
    zi = dmc.zero_index
    zero_row = dmc.y_given_x[zi]
    for i in range(dmc.input_alphabet.size):
        if i == zi:
            continue
        hits = np.nonzero((zero_row > 0.0) & (dmc.y_given_x[i] == 0.0))[0]
        if hits.size:
            return (dmc.input_alphabet.symbols[i], dmc.y_alphabet.symbols[int(hits[0])])
    return None


def validate_covert_conditions(dmc: Dmc) -> ConditionReport:
    """Run the three admissibility checks and the connectivity probe."""
    zi = dmc.zero_index
    psi = _mixture_witness(dmc)
    viol_b = _support_inclusion(dmc.z_given_x, zi)
    viol_c = _support_inclusion(dmc.y_given_x, zi)
    wit_b = None
    if viol_b is not None:
        wit_b = (dmc.input_alphabet.symbols[viol_b[0]], dmc.z_alphabet.symbols[viol_b[1]])
    wit_c = None
    if viol_c is not None:
        wit_c = (dmc.input_alphabet.symbols[viol_c[0]], dmc.y_alphabet.symbols[viol_c[1]])
    return ConditionReport(
        mixture_ok=psi is None,
        warden_support_ok=viol_b is None,
        center_support_ok=viol_c is None,
        mixture_weights=psi,
        warden_support_witness=wit_b,
        center_support_witness=wit_c,
        partially_connected=find_partial_connectivity(dmc),
    )


def sample_channel(
    dmc: Dmc, x: SymbolSequence, seed: int
) -> tuple[SymbolSequence, SymbolSequence]:
    """Sample (Y^n, Z^n) given the input sequence, memorylessly.

    Y_i and Z_i are drawn conditionally independently given X_i; deterministic
    for a fixed seed.
    """
    if x.alphabet != dmc.input_alphabet:
        raise ValueError("input sequence is over a different alphabet than the channel")
    rng = np.random.default_rng(seed)
    n = len(x)
    uy = rng.random(n)
    uz = rng.random(n)
    cum_y = np.cumsum(dmc.y_given_x, axis=1)
    cum_z = np.cumsum(dmc.z_given_x, axis=1)
    y = np.empty(n, dtype=np.int64)
    z = np.empty(n, dtype=np.int64)
    for i in range(dmc.input_alphabet.size):
        mask = x.data == i
        if not np.any(mask):
            continue
        y[mask] = np.searchsorted(cum_y[i], uy[mask], side="right")
        z[mask] = np.searchsorted(cum_z[i], uz[mask], side="right")
    np.clip(y, 0, dmc.y_alphabet.size - 1, out=y)
    np.clip(z, 0, dmc.z_alphabet.size - 1, out=z)
    return SymbolSequence(dmc.y_alphabet, y), SymbolSequence(dmc.z_alphabet, z)
