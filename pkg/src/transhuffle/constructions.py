"""Builders of transposition shuffles of length C(n, 2).

* :func:`simple_shuffle_from_word` assigns probabilities to a reduced word.
* Sweeps (:func:`simple_sweep`, :func:`star_sweep`, :func:`partition_sweep`)
  randomize the last position; :func:`shuffle_from_sweeps` stacks them.
* :func:`divide_and_conquer_shuffle` splits positions into light and heavy
  halves joined by Bernoulli bridge steps.
* :func:`unique_simple_probabilities` recovers word probabilities by the
  trajectory recursion, without using the closed-form rule.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .core import REAL, LazyTransposition, Shuffle, real_prob
from .verify import is_sweep
from .words import ReducedWord, as_word, bubble_sort_word, delete_trajectory, trajectory_set

ROOT_TOL = 1e-14
COEFF_TOL = 1e-12


class ConstructionError(RuntimeError):
    pass


# -- simple shuffles ---------------------------------------------------------

def simple_shuffle_from_word(word: ReducedWord | Sequence[int]) -> Shuffle:
    """Probability ``(v - u) / (v - u + 1)`` where ``u < v`` are the elements swapped."""
    word = as_word(word)
    image = list(range(1, word.n + 1))
    steps = []
    for a in word.letters:
        u, v = image[a - 1], image[a]
        if u >= v:
            raise AssertionError("a reduced word never un-inverts a pair")
        steps.append(LazyTransposition(a, a + 1, Fraction(v - u, v - u + 1)))
        image[a - 1], image[a] = v, u
    return Shuffle(word.n, tuple(steps))


# -- sweeps ------------------------------------------------------------------

@dataclass(frozen=True)
class Sweep:
    n: int
    steps: tuple[LazyTransposition, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def as_shuffle(self) -> Shuffle:
        return Shuffle(self.n, self.steps)

    def relabeled(self, delta: dict[int, int]) -> tuple[LazyTransposition, ...]:
        return tuple(LazyTransposition(delta[s.a], delta[s.b], s.p) for s in self.steps)


def simple_sweep(n: int) -> Sweep:
    if n < 1:
        raise ValueError("n must be positive")
    return Sweep(n, tuple(LazyTransposition(k, k + 1, Fraction(k, k + 1)) for k in range(1, n)))


def star_sweep(n: int) -> Sweep:
    if n < 1:
        raise ValueError("n must be positive")
    return Sweep(n, tuple(LazyTransposition(k, n, Fraction(1, k + 1)) for k in range(1, n)))


@dataclass(frozen=True)
class Partition:
    """Blocks covering ``1..n-1`` with one representative per block."""

    blocks: tuple[tuple[int, ...], ...]
    representatives: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "representatives", tuple(self.representatives))
        if len(blocks) != len(self.representatives):
            raise ValueError("one representative per block")
        for b, d in zip(blocks, self.representatives):
            if not b:
                raise ValueError("blocks must be non-empty")
            if d not in b:
                raise ValueError(f"representative {d} not in block {b}")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def check_covers(self, n: int) -> None:
        flat = [x for b in self.blocks for x in b]
        if sorted(flat) != list(range(1, n)):
            raise ValueError(f"blocks do not partition 1..{n - 1}")


def block_relabeling(block: Sequence[int], representative: int) -> dict[int, int]:
    """Bijection ``1..m -> block`` sending ``m`` to the representative."""
    others = [x for x in sorted(block) if x != representative]
    delta = {i: x for i, x in enumerate(others, start=1)}
    delta[len(block)] = representative
    return delta


def partition_sweep(n: int, part: Partition, sub_sweeps: Sequence[Sweep]) -> Sweep:
    """Sweep each block onto its representative, then pull into position ``n``."""
    part.check_covers(n)
    if len(sub_sweeps) != len(part.blocks):
        raise ValueError("one sub-sweep per block")
    steps: list[LazyTransposition] = []
    for block, d, sub in zip(part.blocks, part.representatives, sub_sweeps):
        if sub.n != len(block):
            raise ValueError(f"sub-sweep of order {sub.n} for block of size {len(block)}")
        steps.extend(sub.relabeled(block_relabeling(block, d)))
    seen = 1
    for m, d in zip(part.sizes, part.representatives):
        seen += m
        steps.append(LazyTransposition(d, n, Fraction(m, seen)))
    return Sweep(n, tuple(steps))


def random_partition(n: int, rng: random.Random) -> Partition:
    items = list(range(1, n))
    rng.shuffle(items)
    blocks: list[list[int]] = []
    for x in items:
        if blocks and rng.random() < 0.5:
            rng.choice(blocks).append(x)
        else:
            blocks.append([x])
    rng.shuffle(blocks)
    return Partition(tuple(tuple(b) for b in blocks), tuple(rng.choice(b) for b in blocks))


def random_sweep(n: int, rng: random.Random) -> Sweep:
    """A sweep drawn from the three families, recursing into partition blocks."""
    if n <= 1:
        return Sweep(n, ())
    family = rng.choice(("simple", "star", "partition"))
    if family == "simple":
        return simple_sweep(n)
    if family == "star":
        return star_sweep(n)
    part = random_partition(n, rng)
    return partition_sweep(n, part, [random_sweep(len(b), rng) for b in part.blocks])


SweepProvider = Callable[[int], Sweep]


def shuffle_from_sweeps(provider: SweepProvider, n: int, certify: bool = True) -> Shuffle:
    """``sweep(n)``, then ``sweep(n-1)`` on positions ``1..n-1``, ..., ``sweep(2)``."""
    steps: list[LazyTransposition] = []
    for order in range(n, 1, -1):
        sweep = provider(order)
        if sweep.n != order:
            raise ConstructionError(f"provider returned order {sweep.n} for {order}")
        if certify and not is_sweep(sweep.steps, order):
            raise ConstructionError(f"provider returned a non-sweep at order {order}")
        steps.extend(sweep.steps)
    return Shuffle(n, tuple(steps))


FAMILIES: dict[str, SweepProvider] = {"simple": simple_sweep, "star": star_sweep}


# -- divide and conquer ------------------------------------------------------

@dataclass(frozen=True)
class HypergeometricSpec:
    """Law of the number of heavy positions holding light elements."""

    n: int
    h: int
    pmf: tuple[Fraction, ...]


def hypergeometric_pmf(n: int, h: int | None = None) -> HypergeometricSpec:
    if h is None:
        h = n // 2
    if not 1 <= h < n:
        raise ValueError(f"need 1 <= h < n, got h={h}, n={n}")
    total = math.comb(n, h)
    pmf = tuple(Fraction(math.comb(n - h, k) * math.comb(h, h - k), total)
                for k in range(h + 1))
    return HypergeometricSpec(n, h, pmf)


def _poly_eval(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _derivative(coeffs: Sequence[Fraction]) -> list[Fraction]:
    return [k * c for k, c in enumerate(coeffs)][1:]


def _bisect(coeffs, lo: Fraction, hi: Fraction, width: Fraction) -> Fraction:
    f_lo = _poly_eval(coeffs, lo)
    if f_lo == 0:
        return lo
    while hi - lo > width:
        mid = (lo + hi) / 2
        f_mid = _poly_eval(coeffs, mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return (lo + hi) / 2


def real_roots(coeffs: Sequence[Fraction], width: Fraction = Fraction(1, 2 ** 96)) -> list[Fraction]:
    """All roots of a real-rooted polynomial with simple roots, ascending.

    Roots of the derivative interlace those of the polynomial, so they split
    a Cauchy-bounded interval into brackets holding one root each; every
    bracket is then bisected with exact rational evaluation.
    """
    coeffs = [Fraction(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    degree = len(coeffs) - 1
    if degree < 1:
        return []
    lead = coeffs[-1]
    bound = 1 + max(abs(c / lead) for c in coeffs[:-1])
    if degree == 1:
        return [-coeffs[0] / coeffs[1]]
    critical = real_roots(_derivative(coeffs), width)
    edges = [-bound] + critical + [bound]
    roots = []
    for lo, hi in zip(edges, edges[1:]):
        f_lo, f_hi = _poly_eval(coeffs, lo), _poly_eval(coeffs, hi)
        if f_lo == 0:
            if not roots or roots[-1] != lo:
                roots.append(lo)
            continue
        if f_hi == 0:
            roots.append(hi)
            continue
        if (f_lo > 0) != (f_hi > 0):
            roots.append(_bisect(coeffs, lo, hi, width))
    return roots


def bernoulli_factorization(spec: HypergeometricSpec) -> list[np.longdouble]:
    """Bernoulli parameters ``q_1 <= ... <= q_h`` whose sum has law ``spec.pmf``.

    The generating polynomial ``sum p_k x^k`` factors as
    ``prod (1 - q_j + q_j x)``; its root ``x_j`` gives ``q_j = 1 / (1 - x_j)``.
    """
    pmf = list(spec.pmf)
    roots = real_roots(pmf)
    if len(roots) != spec.h or any(r >= 0 for r in roots):
        raise ConstructionError(
            f"expected {spec.h} negative real roots, found {len(roots)}")
    qs = sorted(real_prob(1 / (1 - r)) for r in roots)
    expanded = bernoulli_product_coefficients(qs)
    err = max(abs(c - real_prob(p)) for c, p in zip(expanded, pmf))
    if err > COEFF_TOL:
        raise ConstructionError(f"factorization residual {err} exceeds {COEFF_TOL}")
    return qs


def bernoulli_product_coefficients(qs: Sequence) -> list:
    """Coefficients of ``prod (1 - q + q x)`` in ascending powers."""
    coeffs = [np.longdouble(1)] if qs and not isinstance(qs[0], Fraction) else [Fraction(1)]
    for q in qs:
        nxt = [coeffs[0] * 0] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k] += c * (1 - q)
            nxt[k + 1] += c * q
        coeffs = nxt
    return coeffs


ShuffleProvider = Callable[[int], Shuffle]


def default_sub_provider(order: int) -> Shuffle:
    """Recursive divide and conquer, bottoming out in simple shuffles at order <= 2."""
    if order <= 2:
        return simple_shuffle_from_word(bubble_sort_word(order))
    return divide_and_conquer_shuffle(order)


def divide_and_conquer_shuffle(n: int, sub_provider: ShuffleProvider | None = None) -> Shuffle:
    """Shuffle light and heavy halves, bridge them, then shuffle both again.

    Length is ``2 l_h + 2 l_{n-h} + h``. The result is in real mode.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    provider = sub_provider or default_sub_provider
    h = n // 2
    light = _sub_shuffle(provider, h).to_real()
    heavy = _sub_shuffle(provider, n - h).to_real()
    light_steps = light.steps
    heavy_steps = heavy.shifted(h, n).steps
    qs = bernoulli_factorization(hypergeometric_pmf(n, h))
    bridge = tuple(LazyTransposition(j, j + h, q) for j, q in enumerate(qs, start=1))
    steps = light_steps + heavy_steps + bridge + light_steps + heavy_steps
    return Shuffle(n, steps, REAL)


def _sub_shuffle(provider: ShuffleProvider, order: int) -> Shuffle:
    if order == 1:
        return Shuffle(1, (), REAL)
    sub = provider(order)
    if sub.n != order:
        raise ConstructionError(f"provider returned order {sub.n} for {order}")
    return sub


def bridge_indices(n: int, sub_lengths: tuple[int, int] | None = None) -> list[int]:
    """1-based step indices of the bridge steps in a divide-and-conquer shuffle."""
    h = n // 2
    if sub_lengths is None:
        sub_lengths = (math.comb(h, 2), math.comb(n - h, 2))
    start = sub_lengths[0] + sub_lengths[1]
    return list(range(start + 1, start + h + 1))


# -- uniqueness --------------------------------------------------------------

def unique_simple_probabilities(word: ReducedWord | Sequence[int]) -> tuple[Fraction, ...]:
    """The only probabilities making ``word`` a shuffle, found recursively.

    Conditioned on element 1 ending in position n, the steps off its
    trajectory form the shuffle of the deleted word, which fixes every
    ``p_i`` with ``i`` outside the trajectory set ``H``. The same argument
    on the reflected word fixes everything outside the trajectory set of
    element n. The one step where 1 and n meet is then fixed by
    ``prod_{h in H} p_h = 1/n``.
    """
    return _unique(as_word(word).letters, as_word(word).n)


@lru_cache(maxsize=None)
def _unique(letters: tuple[int, ...], n: int) -> tuple[Fraction, ...]:
    if n <= 1:
        return ()
    if n == 2:
        return (Fraction(1, 2),)
    word = ReducedWord(n, letters)
    probs: list[Fraction | None] = [None] * len(letters)

    H = trajectory_set(word, 1).H
    off_H = [i for i in range(1, len(letters) + 1) if i not in H]
    for i, p in zip(off_H, _unique(delete_trajectory(word).letters, n - 1)):
        probs[i - 1] = p

    mirror = word.reflected()
    H_hat = trajectory_set(mirror, 1).H  # element n's trajectory in the original
    off_H_hat = [i for i in range(1, len(letters) + 1) if i not in H_hat]
    for i, p in zip(off_H_hat, _unique(delete_trajectory(mirror).letters, n - 1)):
        if probs[i - 1] is not None and probs[i - 1] != p:
            raise AssertionError(f"inconsistent recursion at step {i}")
        probs[i - 1] = p

    (k,) = set(H) & set(H_hat)
    rest = math.prod(probs[h - 1] for h in H if h != k)
    probs[k - 1] = Fraction(1, n) / rest
    return tuple(probs)


# -- registry used by the CLI ------------------------------------------------

def sweep_shuffle(n: int, family: str = "simple") -> Shuffle:
    if family not in FAMILIES:
        raise ValueError(f"unknown sweep family {family!r}")
    return shuffle_from_sweeps(FAMILIES[family], n)

