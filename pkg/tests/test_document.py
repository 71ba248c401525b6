import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from transhuffle.core import EXACT, REAL, LazyTransposition, Shuffle
from transhuffle.document import (
    DocumentError,
    ShuffleDocument,
    emit,
    format_real,
    parse,
    shuffles_identical,
)


def random_shuffle(rng: random.Random, mode: str) -> Shuffle:
    n = rng.randint(1, 8)
    steps = []
    for _ in range(rng.randint(0, 15) if n > 1 else 0):
        a, b = rng.sample(range(1, n + 1), 2)
        if mode == EXACT:
            den = rng.choice([2, 3, 7, 10 ** 30 + 7])
            p = Fraction(rng.randint(0, den), den)
        else:
            p = np.longdouble(rng.random()) / np.longdouble(rng.choice([1, 3, 7]))
        steps.append(LazyTransposition(a, b, p))
    return Shuffle(n, tuple(steps), mode)


@pytest.mark.parametrize("mode", [EXACT, REAL])
def test_round_trip_bit_exact(mode):
    rng = random.Random(2024 if mode == EXACT else 7)
    for _ in range(100):
        doc = ShuffleDocument(random_shuffle(rng, mode), {"method": "random"})
        back = parse(emit(doc))
        assert back == doc
        assert emit(back) == emit(doc)


@settings(max_examples=200)
@given(st.floats(0, 1))
def test_real_text_round_trips_longdouble(x):
    p = np.longdouble(x) / np.longdouble(3)
    text = format_real(p)
    back = np.longdouble(text)
    assert back == p and np.signbit(back) == np.signbit(p)
    digits = text.split("e")[0].replace(".", "").replace("-", "").lstrip("0")
    assert len(digits) >= 17 or p == 0


def test_exact_encoding_shape():
    s = Shuffle.from_triples(3, [(1, 2, "1/2"), (2, 3, "2/3")])
    data = json.loads(emit(s))
    assert data["format_version"] == "1" and data["mode"] == "exact"
    assert data["steps"][1] == {"a": 2, "b": 3, "p": {"num": "2", "den": "3"}}


def test_empty_real_shuffle_keeps_mode():
    s = Shuffle(4, (), REAL)
    assert parse(emit(s)).shuffle.mode == REAL


def test_identity_compares_types():
    exact = Shuffle.from_triples(2, [(1, 2, "1/2")])
    assert not shuffles_identical(exact, exact.to_real())
    nudged = exact.to_real().with_probabilities([np.nextafter(np.longdouble(0.5), np.longdouble(1))])
    assert not shuffles_identical(exact.to_real(), nudged)


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"n": 2, "steps": []}',
    '{"format_version": "2", "n": 2, "steps": []}',
    '{"format_version": "1", "n": 2, "mode": "fuzzy", "steps": []}',
    '{"format_version": "1", "n": 2, "mode": "exact", "steps": [{"a": 1, "b": 2, "p": 0.5}]}',
    '{"format_version": "1", "n": 2, "mode": "exact", "steps": [{"a": 1, "b": 2, "p": {"num": "1", "den": "0"}}]}',
    '{"format_version": "1", "n": 2, "mode": "real", "steps": [{"a": 1, "b": 2, "p": 0.5}]}',
    '{"format_version": "1", "n": 2, "mode": "exact", "steps": [{"a": 1, "b": 3, "p": {"num": "1", "den": "2"}}]}',
    '{"format_version": "1", "n": 2, "mode": "exact", "steps": [{"a": 1, "b": 2, "p": {"num": "3", "den": "2"}}]}',
])
def test_parse_errors(text):
    with pytest.raises(DocumentError):
        parse(text)
