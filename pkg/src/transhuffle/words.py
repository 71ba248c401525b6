"""Reduced words of the reverse permutation.

A reduced word of order ``n`` is a sequence of ``C(n, 2)`` letters in
``1..n-1`` such that ``t(a_1) ... t(a_l)`` equals ``[n, ..., 1]``, where
``t(a)`` swaps positions ``a`` and ``a + 1``. Step indices (``j`` in the
move functions, members of trajectory sets) are 1-based.
"""
from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import Permutation, ResourceGuardError, identity, reverse_permutation

#: Largest order accepted by exhaustive enumeration routines.
MAX_ENUMERATION_ORDER = 5


class InvalidWordError(ValueError):
    pass


class MoveError(ValueError):
    """A commuting or braid move was requested where it does not apply."""


def _check_letters(letters: Sequence[int], n: int) -> tuple[int, ...]:
    letters = tuple(int(a) for a in letters)
    for a in letters:
        if not 1 <= a <= n - 1:
            raise InvalidWordError(f"letter {a} outside 1..{n - 1}")
    return letters


def compose_letters(letters: Sequence[int], n: int) -> Permutation:
    perm = list(range(1, n + 1))
    for a in letters:
        perm[a - 1], perm[a] = perm[a], perm[a - 1]
    return Permutation(tuple(perm))


def is_reduced_word(letters: Sequence[int], n: int) -> bool:
    """
    >>> is_reduced_word((1, 2, 1), 3), is_reduced_word((1, 1, 2), 3)
    (True, False)
    """
    letters = _check_letters(letters, n)
    if len(letters) != math.comb(n, 2):
        return False
    return compose_letters(letters, n) == reverse_permutation(n)


@dataclass(frozen=True)
class ReducedWord:
    n: int
    letters: tuple[int, ...]

    def __post_init__(self):
        letters = _check_letters(self.letters, self.n)
        object.__setattr__(self, "letters", letters)
        if not is_reduced_word(letters, self.n):
            raise InvalidWordError(f"{letters} is not a reduced word of order {self.n}")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, j: int) -> int:
        return self.letters[j]

    def trace(self) -> list[Permutation]:
        """The deterministic sequence ``sigma_0, ..., sigma_l``."""
        out = [identity(self.n)]
        for a in self.letters:
            out.append(out[-1].swap_positions(a, a + 1))
        return out

    def reflected(self) -> ReducedWord:
        """Conjugate by the reversal: each letter ``a`` becomes ``n - a``."""
        return ReducedWord(self.n, tuple(self.n - a for a in self.letters))

    def __str__(self) -> str:
        return ",".join(map(str, self.letters))


def as_word(word, n: int | None = None) -> ReducedWord:
    if isinstance(word, ReducedWord):
        return word
    letters = tuple(word)
    if n is None:
        n = _order_from_length(len(letters))
    return ReducedWord(n, letters)


def _order_from_length(length: int) -> int:
    n = 1
    while math.comb(n, 2) < length:
        n += 1
    if math.comb(n, 2) != length:
        raise InvalidWordError(f"length {length} is not a binomial C(n, 2)")
    return max(n, 2) if length else 1


def bubble_sort_word(n: int) -> ReducedWord:
    """``(1, ..., n-1, 1, ..., n-2, ..., 1, 2, 1)``."""
    if n < 1:
        raise ValueError("n must be positive")
    letters = [a for top in range(n - 1, 0, -1) for a in range(1, top + 1)]
    return ReducedWord(n, tuple(letters))


def stanley_count(n: int) -> int:
    """Number of reduced words of ``[n, ..., 1]``.

    >>> [stanley_count(n) for n in range(1, 6)]
    [1, 1, 2, 16, 768]
    """
    if n < 1:
        raise ValueError("n must be positive")
    den = 1
    for k in range(1, n):
        den *= (2 * k - 1) ** (n - k)
    num = math.factorial(math.comb(n, 2))
    count, rem = divmod(num, den)
    assert rem == 0
    return count


def iter_reduced_words(n: int) -> Iterator[ReducedWord]:
    """Lexicographic depth-first generation.

    A letter ``a`` may extend a prefix only if it creates an inversion, i.e.
    the entries at positions ``a`` and ``a + 1`` are currently increasing.
    Every maximal such path has ``C(n, 2)`` letters and ends at the reversal.
    """
    length = math.comb(n, 2)
    perm = list(range(1, n + 1))
    prefix: list[int] = []

    def extend():
        if len(prefix) == length:
            yield ReducedWord(n, tuple(prefix))
            return
        for a in range(1, n):
            if perm[a - 1] < perm[a]:
                perm[a - 1], perm[a] = perm[a], perm[a - 1]
                prefix.append(a)
                yield from extend()
                prefix.pop()
                perm[a - 1], perm[a] = perm[a], perm[a - 1]

    yield from extend()


def enumerate_reduced_words(n: int, max_order: int = MAX_ENUMERATION_ORDER) -> list[ReducedWord]:
    if n > max_order:
        raise ResourceGuardError(f"enumeration of order {n} words exceeds limit {max_order}")
    return list(iter_reduced_words(n))


# -- moves -------------------------------------------------------------------

def apply_commuting_move(word: ReducedWord, j: int) -> ReducedWord:
    """Exchange letters ``j`` and ``j + 1`` (1-based) when they differ by at least 2."""
    letters = list(word.letters)
    if not 1 <= j < len(letters):
        raise MoveError(f"index {j} out of range")
    x, y = letters[j - 1], letters[j]
    if abs(x - y) < 2:
        raise MoveError(f"letters {x}, {y} at {j} do not commute")
    letters[j - 1], letters[j] = y, x
    return ReducedWord(word.n, tuple(letters))


def apply_braid_move(word: ReducedWord, j: int) -> ReducedWord:
    """Replace ``(k, k+1, k)`` at ``j`` by ``(k+1, k, k+1)`` or vice versa."""
    letters = list(word.letters)
    if not 1 <= j <= len(letters) - 2:
        raise MoveError(f"index {j} out of range")
    x, y, z = letters[j - 1:j + 2]
    if x != z or abs(x - y) != 1:
        raise MoveError(f"no braid pattern at {j}: {(x, y, z)}")
    letters[j - 1:j + 2] = [y, x, y]
    return ReducedWord(word.n, tuple(letters))


def commuting_sites(word: ReducedWord) -> list[int]:
    a = word.letters
    return [j for j in range(1, len(a)) if abs(a[j - 1] - a[j]) >= 2]


def braid_sites(word: ReducedWord) -> list[int]:
    a = word.letters
    return [j for j in range(1, len(a) - 1)
            if a[j - 1] == a[j + 1] and abs(a[j - 1] - a[j]) == 1]


def legal_moves(word: ReducedWord) -> list[tuple[str, int]]:
    return ([("commute", j) for j in commuting_sites(word)]
            + [("braid", j) for j in braid_sites(word)])


def apply_move(word: ReducedWord, kind: str, j: int) -> ReducedWord:
    if kind == "commute":
        return apply_commuting_move(word, j)
    if kind == "braid":
        return apply_braid_move(word, j)
    raise ValueError(f"unknown move {kind!r}")


def neighbours(word: ReducedWord) -> list[ReducedWord]:
    return [apply_move(word, kind, j) for kind, j in legal_moves(word)]


def move_graph_connected(n: int, max_order: int = MAX_ENUMERATION_ORDER) -> bool:
    """Breadth-first search over the move graph on all reduced words."""
    words = enumerate_reduced_words(n, max_order)
    start = words[0]
    seen = {start.letters}
    queue = deque([start])
    while queue:
        for nxt in neighbours(queue.popleft()):
            if nxt.letters not in seen:
                seen.add(nxt.letters)
                queue.append(nxt)
    return seen == {w.letters for w in words}


def random_reduced_word(n: int, seed: int, steps: int | None = None) -> ReducedWord:
    """Random walk over the move graph from the bubble sort word.

    Takes at least ``10 * C(n, 2)`` moves, each chosen uniformly among the
    legal moves at the current word. The walk length itself is drawn from
    ``[m, 2m]`` so that periodic move graphs (n = 3 has one edge) still reach
    every word. Not uniform over reduced words.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = random.Random(seed)
    word = bubble_sort_word(n)
    budget = max(steps or 0, 10 * math.comb(n, 2))
    for _ in range(budget + rng.randrange(budget + 1)):
        moves = legal_moves(word)
        if not moves:
            break
        kind, j = rng.choice(moves)
        word = apply_move(word, kind, j)
    return word


# -- trajectories ------------------------------------------------------------

@dataclass(frozen=True)
class TrajectorySet:
    H: tuple[int, ...]
    element: int

    def __contains__(self, h: int) -> bool:
        return h in self.H

    def __len__(self) -> int:
        return len(self.H)


def trajectory_set(word: ReducedWord, element: int = 1) -> TrajectorySet:
    """Steps at which ``element`` (1 or n) moves in ``sigma_0, ..., sigma_l``.

    Element 1 only ever moves right and element n only ever moves left, so
    each moves exactly ``n - 1`` times.
    """
    word = as_word(word)
    n = word.n
    if element not in (1, n):
        raise ValueError(f"element must be 1 or {n}")
    trace = word.trace()
    H = tuple(h for h in range(1, len(word) + 1)
              if trace[h].position_of(element) != trace[h - 1].position_of(element))
    return TrajectorySet(H, element)


def swap_times(word: ReducedWord) -> dict[tuple[int, int], list[int]]:
    """For every pair of elements ``(u, v)``, ``u < v``, the steps at which they swap."""
    word = as_word(word)
    times: dict[tuple[int, int], list[int]] = {}
    perm = identity(word.n)
    for i, a in enumerate(word.letters, start=1):
        u, v = sorted((perm(a), perm(a + 1)))
        times.setdefault((u, v), []).append(i)
        perm = perm.swap_positions(a, a + 1)
    return times


def delete_trajectory(word: ReducedWord) -> ReducedWord:
    """Drop the steps moving element 1 and relabel the rest to order ``n - 1``.

    With ``x`` the position of element 1 before step ``i``: a letter left of
    it is kept, a letter right of it (``a_i >= x + 1``) is decremented, and
    steps in the trajectory set are dropped.
    """
    word = as_word(word)
    H = set(trajectory_set(word, 1).H)
    trace = word.trace()
    out = []
    for i, a in enumerate(word.letters, start=1):
        if i in H:
            continue
        x = trace[i - 1].position_of(1)
        if a + 1 < x:
            out.append(a)
        elif a > x:
            out.append(a - 1)
        else:
            raise AssertionError(f"step {i} touches element 1 outside its trajectory")
    return ReducedWord(word.n - 1, tuple(out))
