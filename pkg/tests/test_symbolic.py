"""Subshift compilation and word enumeration against brute-force oracles."""

from itertools import product

import numpy as np
import pytest

from subaffine.errors import BadSubshift, EmptySubshift, LetterOutOfRange
from subaffine.symbolic import (
    SubshiftSpec,
    compile_subshift,
    contains_factor,
    full_shift,
)

from conftest import random_sft


def brute_force_kn(kappa, forbidden, n):
    """Independent enumeration of K_n straight from the definition.

    A clean word lies in K_n iff it extends to an infinite allowed
    sequence; by pumping, extending by (number of possible windows + 1)
    letters is enough to guarantee that.
    """
    m = max((len(f) for f in forbidden), default=2) - 1
    slack = kappa ** m + 1

    def clean(w):
        return not any(w[i:i + len(f)] == f
                       for f in forbidden
                       for i in range(len(w) - len(f) + 1))

    def extendable(w, k):
        if k == 0:
            return True
        return any(clean(w + (a,)) and extendable(w + (a,), k - 1)
                   for a in range(kappa))

    return [w for w in product(range(kappa), repeat=n)
            if clean(w) and extendable(w, slack)]


def test_full_shift_counts_and_words():
    auto = full_shift(2)
    for n in range(1, 11):
        assert auto.count(n) == 2 ** n
    assert list(auto.words(2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_two_fixed_points_subshift():
    auto = compile_subshift(SubshiftSpec(2, ((0, 1), (1, 0))))
    assert list(auto.words(3)) == [(0, 0, 0), (1, 1, 1)]
    assert auto.count(10) == 2
    # converse of the factor property fails: 0 and 1 are in K_1 but 01 is not
    assert auto.is_allowed((0,)) and auto.is_allowed((1,))
    assert not auto.is_allowed((0, 1))


def test_forbidden_01_subshift():
    auto = compile_subshift(SubshiftSpec(2, ((0, 1),)))
    assert list(auto.words(3)) == [(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)]
    for n in range(1, 13):
        assert auto.count(n) == n + 1
    assert not auto.is_allowed((0, 1, 1, 0))
    assert auto.is_allowed((1, 1, 0, 0))


def test_words_match_brute_force_oracle():
    rng = np.random.default_rng(7)
    for _ in range(5):
        spec, auto = random_sft(rng)
        for n in range(1, 9):
            expected = brute_force_kn(spec.kappa, spec.forbidden_words, n)
            got = list(auto.words(n))
            assert got == sorted(expected)
            assert auto.count(n) == len(expected)


def test_count_matches_oracle_kappa3():
    rng = np.random.default_rng(11)
    spec, auto = random_sft(rng, kappa=3)
    for n in range(1, 7):
        assert auto.count(n) == len(
            brute_force_kn(3, spec.forbidden_words, n))


def test_factor_property_exhaustive():
    # w in K_{n+m} implies prefix in K_n and shifted tail in K_m
    rng = np.random.default_rng(23)
    for _ in range(5):
        _, auto = random_sft(rng)
        ksets = {n: set(auto.words(n)) for n in range(1, 13)}
        for total in range(2, 13):
            for w in ksets[total]:
                for n in range(1, total):
                    assert w[:n] in ksets[n]
                    assert w[n:] in ksets[total - n]


def test_nonempty_propagation():
    rng = np.random.default_rng(41)
    for _ in range(10):
        _, auto = random_sft(rng)
        for n in (1, 5, 20):
            assert auto.count(n) >= 1


def test_lexicographic_and_duplicate_free():
    rng = np.random.default_rng(3)
    for _ in range(5):
        _, auto = random_sft(rng)
        ws = list(auto.words(7))
        assert ws == sorted(set(ws))


def test_normalization_drops_redundant_forbidden_words():
    spec = SubshiftSpec(2, ((0, 1), (0, 1, 1), (0, 1)))
    assert spec.forbidden_words == ((0, 1),)


def test_empty_subshift_is_an_error():
    with pytest.raises(EmptySubshift):
        compile_subshift(SubshiftSpec(2, ((0, 0), (0, 1), (1, 0), (1, 1))))


def test_letter_out_of_range():
    auto = full_shift(2)
    with pytest.raises(LetterOutOfRange):
        auto.is_allowed((0, 2))
    with pytest.raises(LetterOutOfRange):
        SubshiftSpec(2, ((0, 3),))


def test_short_forbidden_word_rejected():
    with pytest.raises(BadSubshift):
        SubshiftSpec(2, ((1,),))


def test_contains_factor():
    assert contains_factor((0, 1, 1, 0), (1, 1))
    assert not contains_factor((0, 1, 0, 1), (1, 1))
    assert contains_factor((0, 1), ())


def test_least_tail():
    auto = compile_subshift(SubshiftSpec(2, ((0, 1),)))
    # after a 0 every continuation must stay 0
    assert auto.least_tail((1, 1, 0), 4) == (0, 0, 0, 0)
    assert auto.least_tail((1,), 3) == (0, 0, 0)
    full = full_shift(2)
    assert full.least_tail((1, 0), 3) == (0, 0, 0)


def test_deep_count_is_exact_bigint():
    auto = full_shift(3)
    assert auto.count(64) == 3 ** 64
