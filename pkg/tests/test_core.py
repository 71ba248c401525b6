import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_distribution, triples_of
from transhuffle.core import (
    EXACT,
    REAL,
    ExactDistribution,
    LazyTransposition,
    ModeMismatchError,
    Permutation,
    ResourceGuardError,
    Shuffle,
    compose,
    evolve_all,
    evolve_distribution,
    exact_prob,
    identity,
    permutation_table,
    rank_rows,
    reverse_permutation,
    sample,
    sample_array,
    sample_many,
    swap_index,
    transposition,
    uniform_distribution,
)

F = Fraction


def perm(*xs):
    return Permutation(xs)


def test_compose_examples():
    assert compose(perm(2, 1, 3), perm(1, 3, 2)) == perm(2, 3, 1)
    p = perm(3, 1, 4, 2)
    assert compose(identity(4), p) == p
    assert compose(transposition(1, 2, 3), transposition(2, 3, 3)) == perm(2, 3, 1)


def test_compose_order_mismatch():
    with pytest.raises(ValueError):
        compose(identity(2), identity(3))


def test_transposition():
    assert transposition(1, 2, 3) == perm(2, 1, 3)
    assert transposition(2, 5, 5) == perm(1, 5, 3, 4, 2)
    t = transposition(2, 4, 5)
    assert t * t == identity(5)
    assert transposition(4, 2, 5) == t
    for a, b in [(1, 1), (0, 2), (2, 6)]:
        with pytest.raises(ValueError):
            transposition(a, b, 5)


def test_reverse_permutation():
    assert reverse_permutation(1) == perm(1)
    assert reverse_permutation(4) == perm(4, 3, 2, 1)
    rho = reverse_permutation(6)
    assert rho * rho == identity(6)


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))


perms = st.integers(1, 8).flatmap(
    lambda n: st.tuples(*[st.permutations(range(1, n + 1)).map(Permutation)] * 3))


@given(perms)
def test_compose_associative_with_identity(triple):
    x, y, z = triple
    assert (x * y) * z == x * (y * z)
    e = identity(x.n)
    assert e * x == x == x * e
    assert x * x.inverse() == e


def test_lazy_transposition_normalizes():
    s = LazyTransposition(3, 1, F(1, 3))
    assert (s.a, s.b) == (1, 3)
    with pytest.raises(ValueError):
        LazyTransposition(2, 2, F(1, 2))
    with pytest.raises(ValueError):
        LazyTransposition(1, 2, F(3, 2))
    assert LazyTransposition(1, 2, 0.5).mode == REAL
    with pytest.raises(TypeError):
        exact_prob(0.5)


def test_shuffle_rejects_mixed_modes_and_bad_positions():
    with pytest.raises(ModeMismatchError):
        Shuffle(3, (LazyTransposition(1, 2, F(1, 2)), LazyTransposition(2, 3, np.longdouble(0.5))))
    with pytest.raises(ValueError):
        Shuffle(2, (LazyTransposition(1, 3, F(1, 2)),))


def test_permutation_table_is_lex_and_ranks_match():
    from itertools import permutations
    for n in range(1, 7):
        table = permutation_table(n)
        assert [tuple(r) for r in table] == list(permutations(range(1, n + 1)))
        assert np.array_equal(rank_rows(table), np.arange(math.factorial(n)))


def test_swap_index_is_involution():
    idx = swap_index(5, 2, 4)
    assert np.array_equal(idx[idx], np.arange(120))


def test_evolve_examples():
    d = ExactDistribution.point_mass(identity(2))
    d = evolve_distribution(d, LazyTransposition(1, 2, F(1, 2)))
    assert d.as_dict() == {identity(2): F(1, 2), perm(2, 1): F(1, 2)}

    d0 = ExactDistribution.point_mass(perm(2, 3, 1))
    assert evolve_distribution(d0, LazyTransposition(1, 3, F(0))) == d0

    s = Shuffle.from_triples(3, [(1, 2, "1/2"), (2, 3, "2/3"), (1, 2, "1/2")])
    law = evolve_all(s)
    assert all(m == F(1, 6) for m in law.masses())
    assert law == uniform_distribution(3)


def test_evolve_mode_mismatch():
    d = ExactDistribution.point_mass(identity(3))
    with pytest.raises(ModeMismatchError):
        evolve_distribution(d, LazyTransposition(1, 2, np.longdouble(0.5)))


def test_resource_guard():
    with pytest.raises(ResourceGuardError):
        ExactDistribution.point_mass(identity(9))


steps_strategy = st.integers(2, 5).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(1, n), st.integers(1, n),
                       st.fractions(0, 1, max_denominator=7)).filter(lambda t: t[0] != t[1]),
             max_size=12)))


@settings(max_examples=60, deadline=None)
@given(steps_strategy)
def test_evolution_matches_outcome_enumeration(case):
    n, triples = case
    shuffle = Shuffle.from_triples(n, triples)
    law = evolve_all(shuffle)
    assert law.total() == 1
    expected = brute_distribution(n, triples_of(shuffle))
    assert law.as_dict() == {Permutation(k): v for k, v in expected.items()}


@settings(max_examples=30, deadline=None)
@given(steps_strategy)
def test_real_mode_tracks_exact_mode(case):
    n, triples = case
    exact = Shuffle.from_triples(n, triples)
    real = evolve_all(exact.to_real())
    assert real.mode == REAL
    diff = np.abs(real.numerators - np.array([float(m) for m in evolve_all(exact).masses()]))
    assert diff.max() < 1e-15
    assert abs(real.total() - 1) < 1e-15


def test_sample_edge_cases():
    assert sample(Shuffle(4), 123) == identity(4)
    s = Shuffle.from_triples(4, [(1, 2, 1), (2, 4, 1), (1, 3, 1)])
    assert sample(s, 7) == s.deterministic_composition()
    word = Shuffle.from_triples(4, [(1, 2, "1/2"), (2, 3, "2/3"), (3, 4, "3/4")])
    assert sample_many(word, 20, seed=5) == sample_many(word, 20, seed=5)


def test_sample_frequencies_match_exact_law():
    """10^6 draws of a verified order-4 shuffle: every count within 4 standard errors."""
    from transhuffle.constructions import simple_shuffle_from_word
    from transhuffle.words import bubble_sort_word

    shuffle = simple_shuffle_from_word(bubble_sort_word(4))
    count = 10 ** 6
    draws = sample_array(shuffle, count, seed=2024)
    codes = rank_rows(draws)
    freq = np.bincount(codes, minlength=24) / count
    se = math.sqrt((1 / 24) * (23 / 24) / count)
    assert np.all(np.abs(freq - 1 / 24) < 4 * se)


def test_sample_chi_squared_sanity():
    from transhuffle.constructions import simple_shuffle_from_word

    shuffle = simple_shuffle_from_word((1, 2, 1))
    draws = sample_many(shuffle, 6000, seed=11)
    counts = {}
    for p in draws:
        counts[p] = counts.get(p, 0) + 1
    assert len(counts) == 6
    chi2 = sum((c - 1000) ** 2 / 1000 for c in counts.values())
    assert chi2 < 20.5  # 99.9% point of chi-squared with 5 degrees of freedom


def test_distribution_from_mapping_and_modes():
    d = ExactDistribution.from_mapping(3, {(1, 2, 3): F(1, 3), (3, 2, 1): F(2, 3)})
    assert d.mass((3, 2, 1)) == F(2, 3)
    assert d.mass((2, 1, 3)) == 0
    r = ExactDistribution.from_mapping(3, {(1, 2, 3): 0.25, (3, 2, 1): 0.75}, mode=REAL)
    assert r.mode == REAL and r.total() == 1
    assert uniform_distribution(3, EXACT).mass((2, 3, 1)) == F(1, 6)
