"""Numerical search for short transposition shuffles.

Networks (pair sequences without probabilities) are enumerated up to
reversal and relabeling of positions, pruned by cheap necessary conditions,
and handed to a multistart least-squares solver for the probabilities.
An infeasible verdict is evidence from a failed search, never a proof.
"""
from __future__ import annotations

import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .constructions import simple_shuffle_from_word
from .core import LazyTransposition, Shuffle, swap_index
from .verify import (
    DEFAULT_UNIFORM_TOL,
    exact_distribution,
    is_half,
    is_permutation_network,
    is_uniform,
    transposition_graph_connected,
)
from .words import is_reduced_word

EXHAUSTIVE = "exhaustive"
HEURISTIC = "heuristic"
FEASIBLE = "feasible"
INFEASIBLE = "heuristically-infeasible"

DEFAULT_RESTARTS = 64
DEFAULT_TOL = 1e-9
DEFAULT_BUDGET = 10 ** 6
DENOMINATOR_BOUND = 10 ** 4

Pairs = tuple[tuple[int, int], ...]


class BudgetExceeded(RuntimeError):
    pass


def counting_lower_bound(n: int) -> int:
    """``ceil(log2 n!)``: fewer steps cannot reach every permutation."""
    if n < 1:
        raise ValueError("n must be positive")
    return (math.factorial(n) - 1).bit_length()


# -- candidates and canonical forms ------------------------------------------

@dataclass(frozen=True)
class NetworkCandidate:
    n: int
    pairs: Pairs
    canonical: bool = False

    def __post_init__(self):
        pairs = tuple((min(a, b), max(a, b)) for a, b in self.pairs)
        for a, b in pairs:
            if a == b or a < 1 or b > self.n:
                raise ValueError(f"pair ({a}, {b}) invalid for order {self.n}")
        object.__setattr__(self, "pairs", pairs)

    @property
    def length(self) -> int:
        return len(self.pairs)

    def is_simple(self) -> bool:
        return all(b == a + 1 for a, b in self.pairs)


def _relabel(pairs: Sequence[tuple[int, int]], g: Sequence[int]) -> Pairs:
    out = []
    for a, b in pairs:
        x, y = g[a - 1], g[b - 1]
        out.append((x, y) if x < y else (y, x))
    return tuple(out)


def symmetry_images(pairs: Sequence[tuple[int, int]], n: int) -> Iterator[Pairs]:
    """Images under sequence reversal and every relabeling of positions."""
    for g in permutations(range(1, n + 1)):
        img = _relabel(pairs, g)
        yield img
        yield img[::-1]


def canonical_form(pairs: Sequence[tuple[int, int]], n: int) -> Pairs:
    pairs = tuple((min(a, b), max(a, b)) for a, b in pairs)
    return min(symmetry_images(pairs, n))


def _passes_static_pruning(pairs: Pairs, n: int) -> bool:
    if any(x == y for x, y in zip(pairs, pairs[1:])):
        return False
    if not transposition_graph_connected(pairs, n):
        return False
    return is_permutation_network(pairs, n)


def enumerate_networks(n: int, length: int, budget: int = DEFAULT_BUDGET) -> Iterator[NetworkCandidate]:
    """Canonical pair sequences of the given length surviving static pruning.

    Generation only introduces a new position label when it is the smallest
    one not yet used, which every lexicographically minimal relabeling
    satisfies; full canonicity is then checked at the leaves.
    """
    if length < counting_lower_bound(n):
        return
    all_pairs = list(combinations(range(1, n + 1), 2))
    if len(all_pairs) ** length > budget:
        raise BudgetExceeded(f"{len(all_pairs)}^{length} sequences exceed budget {budget}")
    prefix: list[tuple[int, int]] = []

    def extend(used: int) -> Iterator[NetworkCandidate]:
        if len(prefix) == length:
            pairs = tuple(prefix)
            if canonical_form(pairs, n) == pairs and _passes_static_pruning(pairs, n):
                yield NetworkCandidate(n, pairs, canonical=True)
            return
        for a, b in all_pairs:
            if prefix and prefix[-1] == (a, b):
                continue
            new = [x for x in (a, b) if x > used]
            if new != list(range(used + 1, used + 1 + len(new))):
                continue
            prefix.append((a, b))
            yield from extend(used + len(new))
            prefix.pop()

    yield from extend(0)


def sample_networks(n: int, length: int, count: int, seed: int,
                    max_draws: int | None = None) -> list[NetworkCandidate]:
    """Distinct canonical candidates drawn from uniformly random pair sequences."""
    if length < counting_lower_bound(n):
        return []
    rng = np.random.default_rng(seed)
    all_pairs = list(combinations(range(1, n + 1), 2))
    max_draws = max_draws or 200 * count
    seen: set[Pairs] = set()
    out = []
    for _ in range(max_draws):
        if len(out) >= count:
            break
        pairs = tuple(all_pairs[k] for k in rng.integers(len(all_pairs), size=length))
        canon = canonical_form(pairs, n)
        if canon in seen:
            continue
        seen.add(canon)
        if _passes_static_pruning(canon, n):
            out.append(NetworkCandidate(n, canon, canonical=True))
    return out


# -- objective ---------------------------------------------------------------

class _Objective:
    """Squared distance of the composed law from uniform, with exact derivatives."""

    def __init__(self, cand: NetworkCandidate):
        self.n = cand.n
        self.maps = [swap_index(cand.n, a, b) for a, b in cand.pairs]
        self.size = math.factorial(cand.n)
        self.target = 1.0 / self.size
        self.start = np.zeros(self.size)
        self.start[0] = 1.0

    def forward(self, p: np.ndarray) -> list[np.ndarray]:
        states = [self.start]
        for idx, pi in zip(self.maps, p):
            d = states[-1]
            states.append((1 - pi) * d + pi * d[idx])
        return states

    def residual(self, p: np.ndarray) -> np.ndarray:
        return self.forward(p)[-1] - self.target

    def value_and_grad(self, p: np.ndarray) -> tuple[float, np.ndarray]:
        states = self.forward(p)
        r = states[-1] - self.target
        lam = 2 * r
        grad = np.empty(len(p))
        # swap maps are involutions, so the adjoint uses the same index arrays
        for i in range(len(p) - 1, -1, -1):
            idx, d = self.maps[i], states[i]
            grad[i] = lam @ (d[idx] - d)
            lam = (1 - p[i]) * lam + p[i] * lam[idx]
        return float(r @ r), grad

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        """Column i is ``B_i``: mass at ``p_i = 1`` minus mass at ``p_i = 0``."""
        states = self.forward(p)
        cols = []
        for i, idx in enumerate(self.maps):
            v = states[i][idx] - states[i]
            for j in range(i + 1, len(self.maps)):
                v = (1 - p[j]) * v + p[j] * v[self.maps[j]]
            cols.append(v)
        return np.column_stack(cols) if cols else np.zeros((self.size, 0))


# -- feasibility -------------------------------------------------------------

@dataclass
class FeasibilityResult:
    verdict: str
    probabilities: tuple | None = None
    residual: float = math.inf
    exact: bool = False
    restarts_used: int = 0

    @property
    def feasible(self) -> bool:
        return self.verdict == FEASIBLE


@dataclass(frozen=True)
class PrunedDomain:
    """Coordinates pinned to 1/2 and the minimum number of 1/2 entries."""

    fixed: dict
    min_halves: int


def endpoint_prune(cand: NetworkCandidate, p: dict | None = None) -> PrunedDomain:
    """Pin ``p_1 = p_l = 1/2`` and require at least ``n - 1`` halves.

    Valid only when searching at the minimum length; ``p`` is an optional
    partial assignment (1-based index to value) that must not contradict it.
    """
    fixed = {1: Fraction(1, 2), cand.length: Fraction(1, 2)}
    for i, v in (p or {}).items():
        if i in fixed and v != fixed[i]:
            raise ValueError(f"partial assignment p_{i} = {v} contradicts endpoint rule")
        fixed.setdefault(i, v)
    return PrunedDomain(fixed, cand.n - 1)


def passes_half_filter(probs: Sequence, n: int, at_minimum: bool) -> bool:
    """Post-hoc filter: at least ``n - 1`` halves, plus 1/2 endpoints at minimum length."""
    halves = sum(is_half(p) for p in probs)
    if halves < n - 1:
        return False
    if at_minimum and probs and not (is_half(probs[0]) and is_half(probs[-1])):
        return False
    return True


def _seed_for(pairs: Pairs, seed: int) -> int:
    return zlib.crc32(repr(pairs).encode()) ^ seed


def restart_points(cand: NetworkCandidate, restarts: int, seed: int = 0) -> list[np.ndarray]:
    """All-1/2, the simple-word construction when it applies, then random points.

    A third of the random points start with 1/2 at both ends.
    """
    ell = cand.length
    points = [np.full(ell, 0.5)]
    if cand.is_simple():
        letters = [a for a, _ in cand.pairs]
        if is_reduced_word(letters, cand.n):
            points.append(np.array([float(p) for p in simple_shuffle_from_word(letters).probabilities]))
    rng = np.random.default_rng(_seed_for(cand.pairs, seed))
    k = 0
    while len(points) < restarts:
        x = rng.uniform(0.02, 0.98, size=ell)
        if k % 3 == 0 and ell:
            x[0] = x[-1] = 0.5
        points.append(x)
        k += 1
    return points[:max(restarts, 1)]


def _certify(cand: NetworkCandidate, x: np.ndarray) -> tuple[tuple, bool] | None:
    """Re-verify a numerical solution, exactly when it has small denominators."""
    rational = [Fraction(float(v)).limit_denominator(DENOMINATOR_BOUND) for v in np.clip(x, 0, 1)]
    shuffle = Shuffle(cand.n, tuple(LazyTransposition(a, b, p) for (a, b), p in zip(cand.pairs, rational)))
    if is_uniform(exact_distribution(shuffle)):
        return tuple(rational), True
    real = Shuffle(cand.n, tuple(LazyTransposition(a, b, np.longdouble(v))
                                 for (a, b), v in zip(cand.pairs, np.clip(x, 0, 1))))
    if is_uniform(exact_distribution(real), DEFAULT_UNIFORM_TOL):
        return tuple(real.probabilities), False
    return None


def feasibility_solve(cand: NetworkCandidate, restarts: int = DEFAULT_RESTARTS,
                      tol: float = DEFAULT_TOL, seed: int = 0,
                      at_minimum: bool = False) -> FeasibilityResult:
    """Search ``[0, 1]^l`` for probabilities making ``cand`` a shuffle.

    Each start runs L-BFGS-B on the squared deviation from uniform, then a
    bounded trust-region least-squares polish. A point with residual below
    ``tol**2`` is accepted only after re-verification and the half filter.
    """
    obj = _Objective(cand)
    ell = cand.length
    bounds = [(0.0, 1.0)] * ell
    best = math.inf
    if ell == 0:
        ok = math.factorial(cand.n) == 1
        return FeasibilityResult(FEASIBLE if ok else INFEASIBLE, () if ok else None,
                                 0.0 if ok else 1.0, True, 1)
    for used, x0 in enumerate(restart_points(cand, restarts, seed), start=1):
        res = minimize(obj.value_and_grad, x0, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 2000, "ftol": 1e-30, "gtol": 1e-14})
        x = np.clip(res.x, 0, 1)
        value = float(res.fun)
        if value < 1e-6:
            ls = least_squares(obj.residual, x, jac=obj.jacobian, bounds=(0.0, 1.0),
                               xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200)
            x = np.clip(ls.x, 0, 1)
            r = obj.residual(x)
            value = float(r @ r)
        best = min(best, value)
        if value >= tol ** 2:
            continue
        certified = _certify(cand, x)
        if certified is None:
            continue
        probs, exact = certified
        if not passes_half_filter(probs, cand.n, at_minimum):
            continue
        return FeasibilityResult(FEASIBLE, probs, value, exact, used)
    return FeasibilityResult(INFEASIBLE, None, best, False, restarts)


# -- surveys -----------------------------------------------------------------

@dataclass
class SearchReport:
    n: int
    length: int
    networks_examined: int = 0
    feasible_found: list = field(default_factory=list)
    infeasible_count: int = 0
    status: str = EXHAUSTIVE
    restarts: int = DEFAULT_RESTARTS

    @property
    def any_feasible(self) -> bool:
        return bool(self.feasible_found)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "length": self.length,
            "networks_examined": self.networks_examined,
            "feasible_found": [
                {"pairs": [list(p) for p in cand.pairs],
                 "probabilities": [_prob_text(p) for p in probs],
                 "residual": residual}
                for cand, probs, residual in self.feasible_found
            ],
            "infeasible_count": self.infeasible_count,
            "status": self.status,
            "restarts": self.restarts,
            "note": "infeasible verdicts are numerical evidence, not proofs",
        }


def _prob_text(p) -> str:
    return str(p) if isinstance(p, Fraction) else repr(float(p))


@dataclass
class SurveyReport:
    n: int
    reports: list[SearchReport]

    @property
    def min_feasible_length(self) -> int | None:
        lengths = [r.length for r in self.reports if r.any_feasible]
        return min(lengths) if lengths else None

    def to_json(self) -> dict:
        return {
            "format_version": "1",
            "n": self.n,
            "min_feasible_length": self.min_feasible_length,
            "counting_lower_bound": counting_lower_bound(self.n),
            "reports": [r.to_json() for r in self.reports],
        }


class Checkpoint:
    """Append-only JSON-lines log of per-candidate verdicts."""

    def __init__(self, path: str | os.PathLike, restarts: int, tol: float):
        self.path = Path(path)
        self.restarts = restarts
        self.tol = tol
        self.done: dict[tuple[int, Pairs], dict] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if not line.strip():
                    continue
                rec = json.loads(line)
                if rec["restarts"] != restarts or rec["tol"] != tol:
                    continue
                pairs = tuple(tuple(p) for p in rec["pairs"])
                self.done[(rec["n"], pairs)] = rec

    def lookup(self, cand: NetworkCandidate) -> FeasibilityResult | None:
        rec = self.done.get((cand.n, cand.pairs))
        if rec is None:
            return None
        if rec["verdict"] != FEASIBLE:
            return FeasibilityResult(INFEASIBLE, None, rec["residual"], False, rec["restarts"])
        exact = rec["exact"]
        probs = tuple(Fraction(p) if exact else np.longdouble(p) for p in rec["probabilities"])
        shuffle = Shuffle(cand.n, tuple(LazyTransposition(a, b, p) for (a, b), p in zip(cand.pairs, probs)))
        if not is_uniform(exact_distribution(shuffle), DEFAULT_UNIFORM_TOL):
            return None  # stale or corrupted entry: solve again
        return FeasibilityResult(FEASIBLE, probs, rec["residual"], exact, rec["restarts"])

    def record(self, cand: NetworkCandidate, result: FeasibilityResult) -> None:
        rec = {
            "n": cand.n,
            "pairs": [list(p) for p in cand.pairs],
            "verdict": result.verdict,
            "exact": result.exact,
            "probabilities": ([str(p) if result.exact else np.format_float_scientific(p, unique=True)
                               for p in result.probabilities] if result.probabilities else None),
            "residual": result.residual,
            "restarts": self.restarts,
            "tol": self.tol,
        }
        with self.path.open("a") as fh:
            fh.write(json.dumps(rec) + "\n")


def _solve_one(args) -> FeasibilityResult:
    cand, restarts, tol, seed, at_minimum = args
    return feasibility_solve(cand, restarts, tol, seed, at_minimum)


def _solve_all(cands: list[NetworkCandidate], restarts: int, tol: float, seed: int,
               at_minimum: bool, threads: int, checkpoint: Checkpoint | None,
               stop_on_feasible: bool) -> list[FeasibilityResult | None]:
    results: list[FeasibilityResult | None] = [None] * len(cands)
    todo = []
    for k, cand in enumerate(cands):
        cached = checkpoint.lookup(cand) if checkpoint else None
        if cached is not None:
            results[k] = cached
        else:
            todo.append(k)
    if stop_on_feasible and any(r is not None and r.feasible for r in results):
        return results

    def handle(k: int, res: FeasibilityResult) -> None:
        results[k] = res
        if checkpoint:
            checkpoint.record(cands[k], res)

    if threads > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, threads * 2)
            for start in range(0, len(todo), chunk):
                batch = todo[start:start + chunk]
                jobs = [(cands[k], restarts, tol, seed, at_minimum) for k in batch]
                for k, res in zip(batch, pool.map(_solve_one, jobs)):
                    handle(k, res)
                if stop_on_feasible and any(results[k].feasible for k in batch):
                    break
    else:
        for k in todo:
            handle(k, feasibility_solve(cands[k], restarts, tol, seed, at_minimum))
            if stop_on_feasible and results[k].feasible:
                break
    return results


def search_length(n: int, length: int, restarts: int = DEFAULT_RESTARTS, tol: float = DEFAULT_TOL,
                  budget: int = DEFAULT_BUDGET, sample: int | None = None, seed: int = 0,
                  threads: int = 1, checkpoint: Checkpoint | None = None,
                  stop_on_feasible: bool = False,
                  candidates: Iterable[NetworkCandidate] | None = None) -> SearchReport:
    report = SearchReport(n, length, restarts=restarts)
    if length < counting_lower_bound(n):
        return report
    if candidates is not None:
        cands = list(candidates)
        report.status = HEURISTIC
    else:
        try:
            cands = list(enumerate_networks(n, length, budget))
        except BudgetExceeded:
            if sample is None:
                raise
            cands = sample_networks(n, length, sample, seed)
            report.status = HEURISTIC
    at_minimum = length == math.comb(n, 2)
    results = _solve_all(cands, restarts, tol, seed, at_minimum, threads, checkpoint, stop_on_feasible)
    for cand, res in zip(cands, results):
        if res is None:
            report.status = HEURISTIC  # stopped early: not every candidate was solved
            continue
        report.networks_examined += 1
        if res.feasible:
            report.feasible_found.append((cand, res.probabilities, res.residual))
        else:
            report.infeasible_count += 1
    return report


def minimum_length_survey(n: int, lmin: int, lmax: int, **kwargs) -> SurveyReport:
    """Run :func:`search_length` for every length in ``lmin..lmax``.

    Keyword arguments are passed through; ``checkpoint`` may be a path.
    """
    ckpt = kwargs.pop("checkpoint", None)
    if ckpt is not None and not isinstance(ckpt, Checkpoint):
        ckpt = Checkpoint(ckpt, kwargs.get("restarts", DEFAULT_RESTARTS), kwargs.get("tol", DEFAULT_TOL))
    reports = [search_length(n, length, checkpoint=ckpt, **kwargs) for length in range(lmin, lmax + 1)]
    return SurveyReport(n, reports)
