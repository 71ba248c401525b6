"""Permutations, lazy transpositions, shuffles and their exact distributions.

Conventions: permutations are stored in one-line notation with 1-based values,
``image[i-1] = pi(i)``, and composition is ``(sigma tau)(i) = sigma(tau(i))``.
Right-multiplying by ``t(a, b)`` therefore swaps the entries at positions
``a`` and ``b``, which is how a lazy transposition acts on the running
composition ``T_1 ... T_j``.

Probabilities come in two modes. Exact mode uses :class:`fractions.Fraction`;
real mode uses ``numpy.longdouble`` (64-bit significand on x86-64 Linux).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

EXACT = "exact"
REAL = "real"

Prob = Union[Fraction, np.longdouble]

#: Largest order for which dense exact distributions are built.
MAX_EXACT_ORDER = 8
#: Largest order for which dense real distributions are built.
MAX_REAL_ORDER = 10
DEFAULT_REAL_TOL = 1e-12


class ResourceGuardError(RuntimeError):
    """A computation would exceed the desk-scale limits of this package."""


class ModeMismatchError(ValueError):
    pass


# -- probabilities -----------------------------------------------------------

def prob_mode(p) -> str:
    if isinstance(p, (Fraction, int)):
        return EXACT
    return REAL


def exact_prob(p) -> Fraction:
    """Coerce ``p`` to an exact probability in ``[0, 1]``.

    Strings like ``"2/3"`` and integers are accepted; floats are rejected
    because they do not carry an exact value.
    """
    if isinstance(p, float) or isinstance(p, np.floating):
        raise TypeError(f"refusing to treat float {p!r} as an exact probability")
    q = Fraction(p)
    if not 0 <= q <= 1:
        raise ValueError(f"probability {q} outside [0, 1]")
    return q


def real_prob(p) -> np.longdouble:
    if isinstance(p, Fraction):
        x = np.longdouble(p.numerator) / np.longdouble(p.denominator)
    elif isinstance(p, str):
        x = np.longdouble(p)
    else:
        x = np.longdouble(p)
    if not (0 <= x <= 1):
        raise ValueError(f"probability {x} outside [0, 1]")
    return x


def as_prob(p, mode: str) -> Prob:
    if mode == EXACT:
        return exact_prob(p)
    if mode == REAL:
        return real_prob(p)
    raise ValueError(f"unknown mode {mode!r}")


# -- permutations ------------------------------------------------------------

@dataclass(frozen=True)
class Permutation:
    """An element of S_n in one-line notation, 1-based."""

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        object.__setattr__(self, "image", image)
        if sorted(image) != list(range(1, len(image) + 1)):
            raise ValueError(f"{image} is not a permutation of 1..{len(image)}")

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __len__(self) -> int:
        return len(self.image)

    def __iter__(self) -> Iterator[int]:
        return iter(self.image)

    def inverse(self) -> Permutation:
        inv = [0] * self.n
        for i, x in enumerate(self.image, start=1):
            inv[x - 1] = i
        return Permutation(tuple(inv))

    def position_of(self, element: int) -> int:
        """``pi^{-1}(element)``: the position currently holding ``element``."""
        return self.image.index(element) + 1

    def swap_positions(self, a: int, b: int) -> Permutation:
        """Right-multiply by ``t(a, b)``."""
        image = list(self.image)
        image[a - 1], image[b - 1] = image[b - 1], image[a - 1]
        return Permutation(tuple(image))

    def __repr__(self) -> str:
        return f"Permutation({list(self.image)})"


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """``(sigma tau)(i) = sigma(tau(i))``.

    >>> compose(Permutation((2, 1, 3)), Permutation((1, 3, 2)))
    Permutation([2, 3, 1])
    """
    if sigma.n != tau.n:
        raise ValueError(f"order mismatch: {sigma.n} vs {tau.n}")
    return Permutation(tuple(sigma.image[t - 1] for t in tau.image))


def transposition(a: int, b: int, n: int) -> Permutation:
    """The swap ``t(a, b)`` in S_n.

    >>> transposition(2, 5, 5)
    Permutation([1, 5, 3, 4, 2])
    """
    a, b = _check_pair(a, b, n)
    return identity(n).swap_positions(a, b)


def reverse_permutation(n: int) -> Permutation:
    if n < 1:
        raise ValueError("n must be positive")
    return Permutation(tuple(range(n, 0, -1)))


def _check_pair(a: int, b: int, n: int) -> tuple[int, int]:
    a, b = int(a), int(b)
    if a == b:
        raise ValueError(f"degenerate transposition ({a}, {b})")
    if a > b:
        a, b = b, a
    if a < 1 or b > n:
        raise ValueError(f"positions ({a}, {b}) out of range for order {n}")
    return a, b


# -- lazy transpositions and shuffles ----------------------------------------

@dataclass(frozen=True)
class LazyTransposition:
    """Equals ``t(a, b)`` with probability ``p`` and the identity otherwise.

    The pair is normalized so that ``a < b``.
    """

    a: int
    b: int
    p: Prob

    def __post_init__(self):
        a, b = int(self.a), int(self.b)
        if a == b:
            raise ValueError(f"degenerate transposition ({a}, {b})")
        if a > b:
            a, b = b, a
        if a < 1:
            raise ValueError(f"position {a} out of range")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "p", as_prob(self.p, prob_mode(self.p)))

    @property
    def mode(self) -> str:
        return prob_mode(self.p)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b)

    def with_p(self, p) -> LazyTransposition:
        return LazyTransposition(self.a, self.b, p)

    def shifted(self, offset: int) -> LazyTransposition:
        return LazyTransposition(self.a + offset, self.b + offset, self.p)


def step(a: int, b: int, p) -> LazyTransposition:
    """Shorthand accepting ``"2/3"``-style strings for exact probabilities."""
    if isinstance(p, str) and "/" in p:
        p = Fraction(p)
    return LazyTransposition(a, b, p)


@dataclass(frozen=True)
class Shuffle:
    """An order ``n`` and an ordered sequence of lazy transpositions."""

    n: int
    steps: tuple[LazyTransposition, ...] = ()
    mode: str | None = None

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        if self.n < 1:
            raise ValueError("order must be positive")
        for s in steps:
            if s.b > self.n:
                raise ValueError(f"step ({s.a}, {s.b}) out of range for order {self.n}")
        modes = {s.mode for s in steps}
        if len(modes) > 1:
            raise ModeMismatchError("all steps of a shuffle must share one probability mode")
        mode = self.mode or (modes.pop() if modes else EXACT)
        if mode not in (EXACT, REAL):
            raise ValueError(f"unknown mode {mode!r}")
        if steps and steps[0].mode != mode:
            raise ModeMismatchError(f"{steps[0].mode} steps in a {mode} shuffle")
        object.__setattr__(self, "mode", mode)

    @classmethod
    def from_triples(cls, n: int, triples: Iterable[tuple]) -> Shuffle:
        return cls(n, tuple(step(a, b, p) for a, b, p in triples))

    @property
    def length(self) -> int:
        return len(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def probabilities(self) -> tuple[Prob, ...]:
        return tuple(s.p for s in self.steps)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(s.pair for s in self.steps)

    def to_real(self) -> Shuffle:
        return Shuffle(self.n, tuple(s.with_p(real_prob(s.p)) for s in self.steps), REAL)

    def with_probabilities(self, probs: Sequence) -> Shuffle:
        if len(probs) != len(self.steps):
            raise ValueError("need one probability per step")
        steps = tuple(s.with_p(p) for s, p in zip(self.steps, probs))
        return Shuffle(self.n, steps, steps[0].mode if steps else self.mode)

    def shifted(self, offset: int, n: int) -> Shuffle:
        """Move every step ``offset`` positions to the right inside order ``n``."""
        return Shuffle(n, tuple(s.shifted(offset) for s in self.steps), self.mode)

    def __add__(self, other: Shuffle) -> Shuffle:
        if self.n != other.n:
            raise ValueError("cannot concatenate shuffles of different orders")
        if self.mode != other.mode:
            raise ModeMismatchError("cannot concatenate shuffles of different modes")
        return Shuffle(self.n, self.steps + other.steps, self.mode)

    def deterministic_composition(self) -> Permutation:
        """The composition when every step fires (``sigma_l``)."""
        perm = identity(self.n)
        for s in self.steps:
            perm = perm.swap_positions(s.a, s.b)
        return perm


# -- dense indexing of S_n ---------------------------------------------------

@lru_cache(maxsize=None)
def permutation_table(n: int) -> np.ndarray:
    """All of S_n in lexicographic order of one-line notation, shape (n!, n)."""
    if n > MAX_REAL_ORDER:
        raise ResourceGuardError(f"order {n} exceeds dense limit {MAX_REAL_ORDER}")
    if n <= 1:
        table = np.ones((1, n), dtype=np.int8)
    else:
        sub = permutation_table(n - 1)
        blocks = []
        for first in range(1, n + 1):
            rest = sub + (sub >= first)
            head = np.full((len(sub), 1), first, dtype=np.int8)
            blocks.append(np.hstack([head, rest.astype(np.int8)]))
        table = np.vstack(blocks)
    table.setflags(write=False)
    return table


def rank_rows(rows: np.ndarray) -> np.ndarray:
    """Lexicographic rank (Lehmer code) of each row of 1-based permutations."""
    count, n = rows.shape
    ranks = np.zeros(count, dtype=np.int64)
    for i in range(n):
        smaller_after = (rows[:, i + 1:] < rows[:, i:i + 1]).sum(axis=1)
        ranks += smaller_after * math.factorial(n - 1 - i)
    return ranks


def permutation_rank(perm: Permutation | Sequence[int]) -> int:
    return int(rank_rows(np.array([tuple(perm)], dtype=np.int16))[0])


@lru_cache(maxsize=None)
def swap_index(n: int, a: int, b: int) -> np.ndarray:
    """``idx[r] = rank(sigma_r . t(a, b))`` for every rank ``r``."""
    table = permutation_table(n).copy()
    table[:, [a - 1, b - 1]] = table[:, [b - 1, a - 1]]
    idx = rank_rows(table)
    idx.setflags(write=False)
    return idx


# -- distributions -----------------------------------------------------------

class ExactDistribution:
    """The law of a random element of S_n, stored densely in lex order.

    In exact mode the masses are ``numerators / denominator`` with Python
    integers; in real mode ``numerators`` is a ``longdouble`` array and the
    denominator is 1.
    """

    __slots__ = ("n", "mode", "numerators", "denominator")

    def __init__(self, n: int, mode: str, numerators: np.ndarray, denominator: int = 1):
        self.n = n
        self.mode = mode
        self.numerators = numerators
        self.denominator = denominator

    @classmethod
    def point_mass(cls, perm: Permutation, mode: str = EXACT) -> ExactDistribution:
        n = perm.n
        _guard(n, mode)
        size = math.factorial(n)
        if mode == EXACT:
            nums = np.zeros(size, dtype=object)
            nums[:] = 0
            nums[permutation_rank(perm)] = 1
        else:
            nums = np.zeros(size, dtype=np.longdouble)
            nums[permutation_rank(perm)] = 1
        return cls(n, mode, nums)

    @classmethod
    def from_mapping(cls, n: int, masses: dict, mode: str = EXACT) -> ExactDistribution:
        """Build from ``{Permutation or tuple: prob}``; missing keys are zero."""
        dist = cls.point_mass(identity(n), mode)
        if mode == EXACT:
            fracs = {permutation_rank(k): exact_prob(v) for k, v in masses.items()}
            den = math.lcm(*(f.denominator for f in fracs.values())) if fracs else 1
            nums = np.zeros(len(dist.numerators), dtype=object)
            nums[:] = 0
            for r, f in fracs.items():
                nums[r] = f.numerator * (den // f.denominator)
            return cls(n, mode, nums, den)
        nums = np.zeros(len(dist.numerators), dtype=np.longdouble)
        for k, v in masses.items():
            nums[permutation_rank(k)] = real_prob(v)
        return cls(n, mode, nums)

    def __len__(self) -> int:
        return len(self.numerators)

    def mass(self, perm: Permutation | Sequence[int]) -> Prob:
        r = permutation_rank(perm)
        if self.mode == EXACT:
            return Fraction(int(self.numerators[r]), self.denominator)
        return self.numerators[r]

    def masses(self) -> list:
        if self.mode == EXACT:
            return [Fraction(int(x), self.denominator) for x in self.numerators]
        return list(self.numerators)

    def items(self) -> Iterator[tuple[Permutation, Prob]]:
        table = permutation_table(self.n)
        for row, m in zip(table, self.masses()):
            yield Permutation(tuple(int(x) for x in row)), m

    def as_dict(self, drop_zeros: bool = True) -> dict[Permutation, Prob]:
        return {k: v for k, v in self.items() if v != 0 or not drop_zeros}

    def as_float_array(self) -> np.ndarray:
        if self.mode == EXACT:
            return np.array([x / self.denominator for x in self.numerators], dtype=np.float64)
        return self.numerators.astype(np.float64)

    def total(self) -> Prob:
        if self.mode == EXACT:
            return Fraction(int(sum(self.numerators)), self.denominator)
        return self.numerators.sum()

    def normalized(self) -> ExactDistribution:
        """Divide out the common factor of numerators and denominator."""
        if self.mode != EXACT:
            return self
        g = math.gcd(self.denominator, *(int(x) for x in self.numerators))
        if g <= 1:
            return self
        return ExactDistribution(self.n, self.mode, self.numerators // g, self.denominator // g)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactDistribution):
            return NotImplemented
        if self.n != other.n or self.mode != other.mode:
            return False
        if self.mode == EXACT:
            # cross-multiply to compare without normalizing
            return bool(np.all(self.numerators * other.denominator
                               == other.numerators * self.denominator))
        return bool(np.array_equal(self.numerators, other.numerators))

    def __repr__(self) -> str:
        support = sum(1 for x in self.numerators if x != 0)
        return f"ExactDistribution(n={self.n}, mode={self.mode}, support={support})"


def _guard(n: int, mode: str) -> None:
    limit = MAX_EXACT_ORDER if mode == EXACT else MAX_REAL_ORDER
    if n > limit:
        raise ResourceGuardError(f"order {n} exceeds the {mode}-mode limit of {limit}")


def evolve_distribution(dist: ExactDistribution, step: LazyTransposition) -> ExactDistribution:
    """Push ``dist`` through one lazy transposition.

    ``new(sigma) = (1 - p) old(sigma) + p old(sigma t(a, b))``.
    """
    if step.mode != dist.mode:
        raise ModeMismatchError(f"{step.mode} step applied to {dist.mode} distribution")
    if step.b > dist.n:
        raise ValueError(f"step ({step.a}, {step.b}) out of range for order {dist.n}")
    p = step.p
    if p == 0:
        return dist
    moved = dist.numerators[swap_index(dist.n, step.a, step.b)]
    if dist.mode == EXACT:
        k, m = p.numerator, p.denominator
        if k == m:
            return ExactDistribution(dist.n, dist.mode, moved.copy(), dist.denominator)
        nums = (m - k) * dist.numerators + k * moved
        return ExactDistribution(dist.n, dist.mode, nums, dist.denominator * m)
    nums = (1 - p) * dist.numerators + p * moved
    return ExactDistribution(dist.n, dist.mode, nums)


def evolve_all(shuffle: Shuffle, start: ExactDistribution | None = None) -> ExactDistribution:
    dist = start or ExactDistribution.point_mass(identity(shuffle.n), shuffle.mode)
    for s in shuffle.steps:
        dist = evolve_distribution(dist, s)
    return dist.normalized()


def uniform_distribution(n: int, mode: str = EXACT) -> ExactDistribution:
    _guard(n, mode)
    size = math.factorial(n)
    if mode == EXACT:
        nums = np.ones(size, dtype=object)
        return ExactDistribution(n, mode, nums, size)
    return ExactDistribution(n, mode, np.full(size, 1 / np.longdouble(size), dtype=np.longdouble))


# -- sampling ----------------------------------------------------------------

def outcome_vector(shuffle: Shuffle, rng: random.Random) -> tuple[int, ...]:
    return tuple(int(rng.random() < s.p) for s in shuffle.steps)


def apply_outcomes(shuffle: Shuffle, omega: Sequence[int]) -> Permutation:
    """The composition ``T_1 ... T_l`` for a fixed outcome vector."""
    if len(omega) != len(shuffle.steps):
        raise ValueError("outcome vector length must equal the shuffle length")
    image = list(range(1, shuffle.n + 1))
    for s, w in zip(shuffle.steps, omega):
        if w:
            image[s.a - 1], image[s.b - 1] = image[s.b - 1], image[s.a - 1]
    return Permutation(tuple(image))


def sample(shuffle: Shuffle, seed: int | random.Random) -> Permutation:
    """Draw one permutation; deterministic given ``seed``.

    Passing a :class:`random.Random` instead of an integer continues that
    stream, which is how repeated sampling stays reproducible.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    return apply_outcomes(shuffle, outcome_vector(shuffle, rng))


def sample_many(shuffle: Shuffle, count: int, seed: int) -> list[Permutation]:
    rng = random.Random(seed)
    return [sample(shuffle, rng) for _ in range(count)]


def sample_array(shuffle: Shuffle, count: int, seed: int) -> np.ndarray:
    """Vectorized sampling: ``count`` one-line permutations as rows.

    Uses a separate numpy stream, so rows do not coincide with
    :func:`sample_many` for the same seed; both are deterministic.
    """
    rng = np.random.default_rng(seed)
    perms = np.tile(np.arange(1, shuffle.n + 1, dtype=np.int16), (count, 1))
    for s in shuffle.steps:
        fire = rng.random(count) < float(s.p)
        col_a = perms[fire, s.a - 1].copy()
        perms[fire, s.a - 1] = perms[fire, s.b - 1]
        perms[fire, s.b - 1] = col_a
    return perms
