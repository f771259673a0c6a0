import itertools
import math

import numpy as np
import pytest
from scipy.special import logsumexp

from covertdht.errors import AlphabetTooLarge
from covertdht.probability import Alphabet, Pmf
from covertdht.typesum import (
    check_enumerable,
    iter_types,
    log_type_class_prob,
    num_types,
    prob_type_event,
    prob_typical,
    prob_typical_for,
)

AB = Alphabet(("a", "b"))
ABC = Alphabet(("a", "b", "c"))


def test_num_types_matches_enumeration():
    for n, dim in ((5, 2), (7, 3), (4, 4)):
        types = list(iter_types(n, dim))
        assert len(types) == num_types(n, dim) == math.comb(n + dim - 1, dim - 1)
        assert all(t.sum() == n for t in types)
        assert len({tuple(t) for t in types}) == len(types)


def test_type_class_probs_sum_to_one():
    p = np.array([0.2, 0.3, 0.5])
    logs = [log_type_class_prob(c, p) for c in iter_types(9, 3)]
    assert logsumexp(logs) == pytest.approx(0.0, abs=1e-12)


def test_impossible_type_has_zero_prob():
    p = np.array([1.0, 0.0])
    assert log_type_class_prob(np.array([3, 1]), p) == -math.inf
    assert log_type_class_prob(np.array([4, 0]), p) == 0.0


def test_prob_typical_against_sequence_enumeration():
    p = Pmf(AB, np.array([0.7, 0.3]))
    n, mu = 8, 0.12
    total = 0.0
    for seq in itertools.product(range(2), repeat=n):
        t = np.bincount(seq, minlength=2) / n
        if np.all(np.abs(t - p.probs) <= mu):
            total += math.prod(p.probs[i] for i in seq)
    assert prob_typical(p, n, mu) == pytest.approx(total, rel=1e-12)


def test_prob_typical_for_other_reference():
    source = Pmf(AB, np.array([0.5, 0.5]))
    ref = Pmf(AB, np.array([0.9, 0.1]))
    # typicality window for ref is far from the source mean: small probability
    val = prob_typical_for(source, ref, 40, 0.05)
    assert 0.0 < val < prob_typical(source, 40, 0.05)


def test_prob_type_event_complement():
    p = Pmf(ABC, np.array([0.2, 0.3, 0.5]))

    def high_first(t):
        return t[0] >= 0.5

    a = prob_type_event(p, 12, high_first)
    b = prob_type_event(p, 12, lambda t: not high_first(t))
    assert a + b == pytest.approx(1.0, abs=1e-12)


def test_enumeration_cap():
    with pytest.raises(AlphabetTooLarge):
        check_enumerable(10_000, 5)
    check_enumerable(200, 3)
