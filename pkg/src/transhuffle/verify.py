"""Certification of shuffles and executable checks of the structural results.

Everything here decides questions exactly in exact mode. Real-mode checks
take an explicit tolerance.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import (
    EXACT,
    MAX_EXACT_ORDER,
    MAX_REAL_ORDER,
    REAL,
    ExactDistribution,
    LazyTransposition,
    Prob,
    ResourceGuardError,
    Shuffle,
    evolve_all,
    permutation_table,
    real_prob,
    swap_index,
)
from .words import ReducedWord, as_word, trajectory_set

DEFAULT_UNIFORM_TOL = 1e-10
HALF_TOL = 1e-9
MAX_ENUMERATED_LENGTH = 20

HALF = Fraction(1, 2)


class NotUniformError(ValueError):
    pass


# -- distributions -----------------------------------------------------------

def exact_distribution(shuffle: Shuffle) -> ExactDistribution:
    """The full law of ``T_1 ... T_l`` starting from the identity."""
    limit = MAX_EXACT_ORDER if shuffle.mode == EXACT else MAX_REAL_ORDER
    if shuffle.n > limit:
        raise ResourceGuardError(f"order {shuffle.n} exceeds {shuffle.mode}-mode limit {limit}")
    return evolve_all(shuffle)


def max_deviation(dist: ExactDistribution) -> Prob:
    size = math.factorial(dist.n)
    if dist.mode == EXACT:
        target = Fraction(dist.denominator, size)
        worst = max(abs(Fraction(int(x)) - target) for x in dist.numerators)
        return worst / dist.denominator
    return np.max(np.abs(dist.numerators - 1 / np.longdouble(size)))


def is_uniform(dist: ExactDistribution, tol: float | None = None) -> bool:
    """Exact mode ignores ``tol`` and demands every mass equal ``1/n!``."""
    size = math.factorial(dist.n)
    if dist.mode == EXACT:
        nums = dist.numerators
        return bool(np.all(nums == nums[0])) and int(nums[0]) * size == dist.denominator
    tol = DEFAULT_UNIFORM_TOL if tol is None else tol
    return bool(max_deviation(dist) <= tol)


def is_transposition_shuffle(shuffle: Shuffle, tol: float | None = None) -> bool:
    return is_uniform(exact_distribution(shuffle), tol)


# -- sweeps and expected matrices --------------------------------------------

@dataclass(frozen=True)
class StochasticMatrix:
    """``entries[i-1][j-1] = P(pi(i) = j)``."""

    n: int
    entries: tuple[tuple[Prob, ...], ...]

    def row(self, i: int) -> tuple[Prob, ...]:
        return self.entries[i - 1]

    def is_doubly_stochastic(self, tol: float = 0.0) -> bool:
        rows = [sum(r) for r in self.entries]
        cols = [sum(c) for c in zip(*self.entries)]
        return all(abs(x - 1) <= tol for x in rows + cols) and all(
            x >= 0 for r in self.entries for x in r)

    def is_flat(self, tol: float = 0.0) -> bool:
        """All entries ``1/n``."""
        target = Fraction(1, self.n)
        return all(abs(x - target) <= tol for r in self.entries for x in r)


def _step_matrix(n: int, s: LazyTransposition) -> list[list]:
    one = Fraction(1) if s.mode == EXACT else np.longdouble(1)
    zero = one - one
    m = [[one if i == j else zero for j in range(n)] for i in range(n)]
    a, b = s.a - 1, s.b - 1
    m[a][a] = m[b][b] = one - s.p
    m[a][b] = m[b][a] = s.p
    return m


def expected_matrix(shuffle: Shuffle) -> StochasticMatrix:
    """``M(pi)`` with ``M[i][j] = P(pi(i) = j)`` for ``pi = T_1 ... T_l``.

    With composition ``(sigma tau)(i) = sigma(tau(i))`` one has
    ``M(sigma tau) = M(tau) M(sigma)``, so the product runs
    ``M(T_l) ... M(T_1)``; each step mixes rows ``a`` and ``b``.
    """
    n = shuffle.n
    one = Fraction(1) if shuffle.mode == EXACT else np.longdouble(1)
    m = [[one if i == j else one - one for j in range(n)] for i in range(n)]
    for s in shuffle.steps:
        a, b = s.a - 1, s.b - 1
        row_a, row_b = m[a], m[b]
        m[a] = [(1 - s.p) * x + s.p * y for x, y in zip(row_a, row_b)]
        m[b] = [s.p * x + (1 - s.p) * y for x, y in zip(row_a, row_b)]
    return StochasticMatrix(n, tuple(tuple(r) for r in m))


def marginal_matrix(dist: ExactDistribution) -> StochasticMatrix:
    """Position marginals ``P(pi(i) = j)`` read off a full distribution."""
    n = dist.n
    table = permutation_table(n)
    masses = dist.masses()
    zero = masses[0] - masses[0]
    m = [[zero] * n for _ in range(n)]
    for row, mass in zip(table, masses):
        if mass:
            for i, x in enumerate(row):
                m[i][int(x) - 1] += mass
    return StochasticMatrix(n, tuple(tuple(r) for r in m))


def last_element_law(steps: Sequence[LazyTransposition], n: int) -> list[Prob]:
    """Law of ``pi(n)`` for the composition of ``steps``."""
    return list(expected_matrix(Shuffle(n, tuple(steps))).row(n))


def is_sweep(steps: Sequence[LazyTransposition] | Shuffle, n: int | None = None,
             tol: float | None = None) -> bool:
    """Whether ``pi(n)`` is uniform on ``1..n``."""
    if isinstance(steps, Shuffle):
        n = steps.n if n is None else n
        steps = steps.steps
    steps = tuple(getattr(steps, "steps", steps))
    if n is None:
        raise ValueError("order required")
    law = last_element_law(steps, n)
    if steps and steps[0].mode == REAL:
        tol = DEFAULT_UNIFORM_TOL if tol is None else tol
        return all(abs(x - real_prob(Fraction(1, n))) <= tol for x in law)
    return all(x == Fraction(1, n) for x in law)


def transposition_graph_connected(pairs: Sequence[tuple[int, int]], n: int) -> bool:
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    return len({find(v) for v in range(1, n + 1)}) == 1


# -- half counts and ranks ---------------------------------------------------

def is_half(p, tol: float = HALF_TOL) -> bool:
    if isinstance(p, Fraction):
        return p == HALF
    return bool(abs(p - np.longdouble(0.5)) <= tol)


@dataclass(frozen=True)
class HalfCountReport:
    half_count: int
    endpoint_halves: bool
    minimum_halves: int
    violation: bool


def half_count_check(shuffle: Shuffle, assume_minimal: bool | None = None,
                     tol: float | None = None) -> HalfCountReport:
    """Count the 1/2 steps of a verified shuffle and check the lower bounds.

    ``violation`` is set when fewer than ``n - 1`` steps are 1/2, or when the
    shuffle is declared minimal (default: length ``C(n, 2)`` with ``n <= 4``,
    where the minimum is known) and an endpoint is not 1/2.
    """
    if not is_transposition_shuffle(shuffle, tol):
        raise NotUniformError("half-count check requires a verified shuffle")
    n = shuffle.n
    probs = shuffle.probabilities
    count = sum(is_half(p) for p in probs)
    endpoints = bool(probs) and is_half(probs[0]) and is_half(probs[-1])
    if n == 1:
        endpoints = True
    if assume_minimal is None:
        assume_minimal = n <= 4 and shuffle.length == math.comb(n, 2)
    violation = count < n - 1 or (assume_minimal and not endpoints)
    return HalfCountReport(count, endpoints, n - 1, violation)


def rational_rank(rows: Sequence[Sequence]) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    m = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        den = math.lcm(*(x.denominator for x in fr)) if fr else 1
        m.append([int(x * den) for x in fr])
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(rank + 1, n_rows):
            for c in range(col + 1, n_cols):
                m[r][c] = (m[r][c] * m[rank][col] - m[r][col] * m[rank][c]) // prev
            m[r][col] = 0
        prev = m[rank][col]
        rank += 1
        if rank == n_rows:
            break
    return rank


def rank_certificate(shuffle: Shuffle) -> int:
    """Minimum number of 1/2 steps implied by Sylvester's rank inequality.

    Each step matrix has full rank ``n`` unless ``p = 1/2`` (rank ``n - 1``),
    so ``n - rank(product)`` is at most the number of 1/2 steps. Returns
    ``n - rank(product)``; for a verified shuffle that is ``n - 1``.
    """
    if shuffle.mode != EXACT:
        raise ValueError("rank certificate requires exact probabilities")
    n = shuffle.n
    deficits = [n - rational_rank(_step_matrix(n, s)) for s in shuffle.steps]
    product_deficit = n - rational_rank(expected_matrix(shuffle).entries)
    if product_deficit > sum(deficits):
        raise AssertionError("rank inequality chain failed")
    return product_deficit


# -- braid moves -------------------------------------------------------------

def odds(p) -> Fraction:
    return p / (1 - p)


def braid_transform(p, q, r) -> tuple | None:
    """Probabilities for ``(2,3),(1,2),(2,3)`` matching ``(1,2,p),(2,3,q),(1,2,r)``.

    Returns ``(r, q, p)`` when ``odds(p) + odds(r) == odds(q)`` and ``None``
    when that condition fails. Probabilities must lie strictly inside (0, 1).
    """
    for x in (p, q, r):
        if not 0 < x < 1:
            raise ValueError(f"probability {x} not strictly inside (0, 1)")
    lhs, rhs = odds(p) + odds(r), odds(q)
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        ok = lhs == rhs
    else:
        ok = abs(lhs - rhs) <= HALF_TOL * max(1, abs(rhs))
    return (r, q, p) if ok else None


# -- rigidity ----------------------------------------------------------------

@dataclass(frozen=True)
class RigidityProbe:
    index: int
    A: tuple[Fraction, ...]
    B: tuple[Fraction, ...]

    @property
    def rigid(self) -> bool:
        """Some permutation's mass depends on ``p_index``."""
        return any(b != 0 for b in self.B)


def rigidity_probe(shuffle: Shuffle, i: int) -> RigidityProbe:
    """Affine coefficients ``P(pi = alpha) = A + B p_i`` for every alpha.

    ``i`` is 1-based. Two exact evaluations (``p_i = 0`` and ``p_i = 1``)
    determine the line because the dependence on one ``p_i`` is affine.
    Entries follow the lexicographic order of S_n.
    """
    if shuffle.mode != EXACT:
        raise ValueError("rigidity probe requires exact probabilities")
    if not 1 <= i <= shuffle.length:
        raise IndexError(f"step {i} out of range")
    probs = list(shuffle.probabilities)
    probs[i - 1] = Fraction(0)
    at0 = exact_distribution(shuffle.with_probabilities(probs)).masses()
    probs[i - 1] = Fraction(1)
    at1 = exact_distribution(shuffle.with_probabilities(probs)).masses()
    return RigidityProbe(i, tuple(at0), tuple(y - x for x, y in zip(at0, at1)))


# -- permutation networks ----------------------------------------------------

def is_permutation_network(pairs: Sequence[tuple[int, int]], n: int) -> bool:
    """Forward closure ``S_i = S_{i-1} u S_{i-1} t(a_i, b_i)`` reaches all of S_n."""
    if n > MAX_EXACT_ORDER:
        raise ResourceGuardError(f"order {n} exceeds limit {MAX_EXACT_ORDER}")
    if len(pairs) < (math.factorial(n) - 1).bit_length():
        return False
    reached = np.zeros(math.factorial(n), dtype=bool)
    reached[0] = True  # rank 0 is the identity
    for a, b in pairs:
        a, b = min(a, b), max(a, b)
        reached |= reached[swap_index(n, a, b)]
    return bool(reached.all())


# -- trajectories ------------------------------------------------------------

def _final_images(n: int, letters: Sequence[int], omegas: np.ndarray) -> np.ndarray:
    """Final one-line permutations for each outcome vector (rows of bits)."""
    perms = np.tile(np.arange(1, n + 1, dtype=np.int8), (len(omegas), 1))
    for i, a in enumerate(letters):
        fire = omegas[:, i].astype(bool)
        left = perms[fire, a - 1].copy()
        perms[fire, a - 1] = perms[fire, a]
        perms[fire, a] = left
    return perms


def trajectory_brute_check(word: ReducedWord, probs: Sequence) -> bool:
    """Check the characterization of ``{pi_l(n) = 1}`` by enumeration.

    Over all ``2^l`` outcome vectors: ``pi_l(n) = 1`` exactly when every
    step of the trajectory set fired; the all-ones vector yields the
    reversal; and ``P(pi_l(n) = 1)``, summed from the exact distribution,
    equals the product of the trajectory probabilities.
    """
    word = as_word(word)
    n, length = word.n, len(word)
    if length > MAX_ENUMERATED_LENGTH:
        raise ResourceGuardError(f"2^{length} outcome vectors exceeds limit")
    if len(probs) != length:
        raise ValueError("need one probability per letter")
    H = np.array(trajectory_set(word, 1).H, dtype=np.int64) - 1
    codes = np.arange(2 ** length, dtype=np.int64)
    omegas = ((codes[:, None] >> np.arange(length)) & 1).astype(np.int8)
    finals = _final_images(n, word.letters, omegas)
    lands = finals[:, n - 1] == 1
    fired = omegas[:, H].all(axis=1) if len(H) else np.ones(len(codes), dtype=bool)
    if not np.array_equal(lands, fired):
        return False
    if tuple(finals[-1]) != tuple(range(n, 0, -1)):
        return False
    shuffle = Shuffle(n, tuple(LazyTransposition(a, a + 1, p) for a, p in zip(word.letters, probs)))
    dist = exact_distribution(shuffle)
    table = permutation_table(n)
    masses = dist.masses()
    p_land = sum((m for row, m in zip(table, masses) if row[n - 1] == 1), start=masses[0] * 0)
    product = math.prod((probs[h] for h in H), start=masses[0] * 0 + 1)
    if shuffle.mode == EXACT:
        return p_land == product
    return abs(p_land - product) <= DEFAULT_UNIFORM_TOL


# -- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    uniform: bool
    max_deviation: Prob
    half_count: int
    endpoint_halves: bool
    length: int
    mode: str
    n: int

    def to_json(self) -> dict:
        d = asdict(self)
        dev = self.max_deviation
        d["max_deviation"] = str(dev) if isinstance(dev, Fraction) else float(dev)
        return d

    def to_text(self) -> str:
        lines = [
            f"order: {self.n}",
            f"length: {self.length}",
            f"mode: {self.mode}",
            f"uniform: {str(self.uniform).lower()}",
            f"max_deviation: {self.to_json()['max_deviation']}",
            f"half_count: {self.half_count}",
            f"endpoint_halves: {str(self.endpoint_halves).lower()}",
        ]
        return "\n".join(lines)


def verify_shuffle(shuffle: Shuffle, tol: float | None = None) -> VerificationReport:
    dist = exact_distribution(shuffle)
    probs = shuffle.probabilities
    return VerificationReport(
        uniform=is_uniform(dist, tol),
        max_deviation=max_deviation(dist),
        half_count=sum(is_half(p) for p in probs),
        endpoint_halves=(not probs) or (is_half(probs[0]) and is_half(probs[-1])),
        length=shuffle.length,
        mode=shuffle.mode,
        n=shuffle.n,
    )

