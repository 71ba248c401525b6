import json
import math
import random
from fractions import Fraction
from itertools import combinations, product

import numpy as np
import pytest

from transhuffle.core import LazyTransposition, Shuffle
from transhuffle.search import (
    EXHAUSTIVE,
    FEASIBLE,
    HEURISTIC,
    INFEASIBLE,
    BudgetExceeded,
    Checkpoint,
    NetworkCandidate,
    _Objective,
    canonical_form,
    counting_lower_bound,
    endpoint_prune,
    enumerate_networks,
    feasibility_solve,
    minimum_length_survey,
    passes_half_filter,
    restart_points,
    sample_networks,
    search_length,
    symmetry_images,
)
from transhuffle.verify import exact_distribution, is_permutation_network, is_uniform

F = Fraction
SIMPLE3 = ((1, 2), (2, 3), (1, 2))
NONSIMPLE3 = ((1, 2), (2, 3), (1, 3))


def test_counting_lower_bound():
    assert [counting_lower_bound(n) for n in (1, 2, 3, 4, 5)] == [0, 1, 3, 5, 7]
    for n in range(1, 9):
        assert counting_lower_bound(n) == math.ceil(math.log2(math.factorial(n)) - 1e-12)


def test_enumeration_examples():
    got = set(c.pairs for c in enumerate_networks(3, 3))
    assert canonical_form(SIMPLE3, 3) in got
    assert canonical_form(NONSIMPLE3, 3) in got
    assert canonical_form(((1, 2),) * 3, 3) not in got
    assert list(enumerate_networks(3, 2)) == []
    assert [c.pairs for c in enumerate_networks(2, 1)] == [((1, 2),)]


def brute_canonical_networks(n, length):
    """Every sequence, pruned with the same static rules, then canonicalized."""
    pairs = list(combinations(range(1, n + 1), 2))
    out = set()
    for seq in product(pairs, repeat=length):
        if any(x == y for x, y in zip(seq, seq[1:])):
            continue
        if is_permutation_network(seq, n):
            out.add(canonical_form(seq, n))
    return out


@pytest.mark.parametrize("n,length", [(3, 3), (3, 4), (4, 5)])
def test_enumeration_matches_brute_force(n, length):
    got = [c.pairs for c in enumerate_networks(n, length)]
    assert len(got) == len(set(got))
    assert set(got) == brute_canonical_networks(n, length)


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        list(enumerate_networks(5, 9, budget=1000))


def test_canonical_form_is_class_invariant():
    rng = random.Random(3)
    pairs = list(combinations(range(1, 5), 2))
    for _ in range(30):
        seq = tuple(rng.choice(pairs) for _ in range(6))
        canon = canonical_form(seq, 4)
        for img in symmetry_images(seq, 4):
            assert canonical_form(img, 4) == canon


def test_objective_gradient_and_jacobian():
    cand = NetworkCandidate(4, ((1, 2), (2, 4), (1, 3), (3, 4), (2, 3), (1, 4)))
    obj = _Objective(cand)
    rng = np.random.default_rng(0)
    p = rng.uniform(0.1, 0.9, cand.length)
    value, grad = obj.value_and_grad(p)
    eps = 1e-6
    for i in range(cand.length):
        e = np.zeros(cand.length)
        e[i] = eps
        fd = (obj.value_and_grad(p + e)[0] - obj.value_and_grad(p - e)[0]) / (2 * eps)
        assert abs(fd - grad[i]) < 1e-8
    jac = obj.jacobian(p)
    assert np.allclose(2 * jac.T @ obj.residual(p), grad, atol=1e-14)
    # affinity: residual moves along column i exactly
    q = p.copy()
    q[2] += 0.2
    assert np.allclose(obj.residual(q) - obj.residual(p), 0.2 * jac[:, 2], atol=1e-14)


def test_feasibility_examples():
    res = feasibility_solve(NetworkCandidate(3, SIMPLE3), restarts=8)
    assert res.verdict == FEASIBLE and res.exact
    assert res.probabilities == (F(1, 2), F(2, 3), F(1, 2))
    res = feasibility_solve(NetworkCandidate(3, NONSIMPLE3), restarts=16)
    assert res.verdict == FEASIBLE and res.exact
    assert res.probabilities == (F(1, 2), F(1, 3), F(1, 2))
    s = Shuffle(3, tuple(LazyTransposition(a, b, p) for (a, b), p in zip(NONSIMPLE3, res.probabilities)))
    assert is_uniform(exact_distribution(s))
    bad = feasibility_solve(NetworkCandidate(3, ((1, 2), (1, 2), (1, 3))), restarts=8)
    assert bad.verdict == INFEASIBLE and bad.probabilities is None


def test_endpoint_prune_and_filter():
    dom = endpoint_prune(NetworkCandidate(3, NONSIMPLE3))
    assert dom.fixed == {1: F(1, 2), 3: F(1, 2)} and dom.min_halves == 2
    with pytest.raises(ValueError):
        endpoint_prune(NetworkCandidate(3, NONSIMPLE3), {1: F(1, 3)})
    assert passes_half_filter((F(1, 2), F(1, 3), F(1, 2)), 3, at_minimum=True)
    assert not passes_half_filter((F(1, 2), F(1, 3), F(1, 3)), 3, at_minimum=False)
    assert not passes_half_filter((F(1, 3), F(1, 2), F(1, 2)), 3, at_minimum=True)
    assert passes_half_filter((F(1, 3), F(1, 2), F(1, 2)), 3, at_minimum=False)


def test_restart_points_are_deterministic():
    cand = NetworkCandidate(3, SIMPLE3)
    a = restart_points(cand, 10, seed=4)
    b = restart_points(cand, 10, seed=4)
    assert len(a) == 10 and all(np.array_equal(x, y) for x, y in zip(a, b))
    assert np.array_equal(a[0], np.full(3, 0.5))
    assert np.allclose(a[1], [0.5, 2 / 3, 0.5])


def test_symmetric_partners_share_verdicts():
    rng = random.Random(1)
    cases = [(3, c.pairs) for c in enumerate_networks(3, 3)]
    cases += [(4, c.pairs) for c in enumerate_networks(4, 5)]
    cases += [(4, ((1, 2), (2, 3), (3, 4), (1, 2), (2, 3), (1, 2)))]
    for n, pairs in cases:
        base = feasibility_solve(NetworkCandidate(n, pairs), restarts=16).verdict
        images = list(symmetry_images(pairs, n))
        for img in rng.sample(images, 3):
            assert feasibility_solve(NetworkCandidate(n, img), restarts=16).verdict == base


def test_survey_small_orders_exhaustive():
    s2 = minimum_length_survey(2, 1, 1, restarts=4)
    assert s2.min_feasible_length == 1
    assert s2.reports[0].status == EXHAUSTIVE
    (cand, probs, _), = s2.reports[0].feasible_found
    assert cand.pairs == ((1, 2),) and probs == (F(1, 2),)

    s3 = minimum_length_survey(3, 2, 3, restarts=16)
    assert s3.min_feasible_length == 3
    assert all(r.status == EXHAUSTIVE for r in s3.reports)
    assert s3.reports[0].networks_examined == 0
    found = {c.pairs: p for c, p, _ in s3.reports[1].feasible_found}
    assert found[canonical_form(NONSIMPLE3, 3)] == (F(1, 2), F(1, 3), F(1, 2))
    doc = s3.to_json()
    assert doc["format_version"] == "1" and doc["counting_lower_bound"] == 3
    json.dumps(doc)


def test_sampled_search_is_heuristic():
    # length 7 networks are too rare to hit by sampling; 9 is dense enough
    cands = sample_networks(5, 9, 3, seed=0)
    assert len(cands) == 3
    assert all(c.pairs == canonical_form(c.pairs, 5) for c in cands)
    assert all(is_permutation_network(c.pairs, 5) for c in cands)
    report = search_length(5, 9, restarts=2, budget=10, sample=3)
    assert report.status == HEURISTIC
    assert report.networks_examined == 3
    with pytest.raises(BudgetExceeded):
        search_length(5, 9, budget=10)


def test_checkpoint_resume(tmp_path):
    path = tmp_path / "ckpt.jsonl"
    first = minimum_length_survey(3, 3, 3, restarts=8, checkpoint=str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == first.reports[0].networks_examined == 2
    again = minimum_length_survey(3, 3, 3, restarts=8, checkpoint=str(path))
    assert path.read_text().splitlines() == lines  # nothing re-solved
    assert again.to_json() == first.to_json()


def test_checkpoint_rejects_corrupted_feasible_entry(tmp_path):
    path = tmp_path / "ckpt.jsonl"
    cand = NetworkCandidate(3, canonical_form(NONSIMPLE3, 3), canonical=True)
    rec = {"n": 3, "pairs": [list(p) for p in cand.pairs], "verdict": FEASIBLE, "exact": True,
           "probabilities": ["1/2", "1/2", "1/2"], "residual": 0.0, "restarts": 8, "tol": 1e-9}
    path.write_text(json.dumps(rec) + "\n")
    assert Checkpoint(path, 8, 1e-9).lookup(cand) is None
    assert Checkpoint(path, 9, 1e-9).lookup(cand) is None


def test_stop_on_feasible_marks_heuristic():
    report = search_length(3, 4, restarts=8, stop_on_feasible=True)
    assert report.any_feasible
    if report.networks_examined < len(list(enumerate_networks(3, 4))):
        assert report.status == HEURISTIC


@pytest.mark.slow
def test_order_four_length_five_infeasible():
    report = search_length(4, 5, restarts=64)
    assert report.status == EXHAUSTIVE
    assert report.networks_examined == 4 and not report.any_feasible
