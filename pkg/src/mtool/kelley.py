"""Intersection numbers of finite clopen families.

``k_n`` is the least, over length-n sequences from the family, of the
longest subsequence with nonempty meet. It depends only on how often each
member occurs, so multisets are enumerated. The LP value is the largest t
for which some probability measure gives every member mass at least t.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import config
from .algebra import Clopen, FiniteMeasure, check_path
from .errors import BudgetExceeded
from .lp import maximize


@dataclass(frozen=True)
class FamilySpec:
    sets: tuple[Clopen, ...]
    depth: int

    def __post_init__(self):
        sets = tuple(self.sets)
        object.__setattr__(self, "sets", sets)
        if not sets:
            raise ValueError("family must be nonempty")
        if any(c.is_empty() for c in sets):
            raise ValueError("family members must be nonempty")
        check_path("0" * self.depth)
        if any(c.depth > self.depth for c in sets):
            raise ValueError(f"member deeper than the family depth {self.depth}")

    @classmethod
    def of(cls, sets: Sequence[Clopen]) -> "FamilySpec":
        return cls(tuple(sets), max(c.depth for c in sets) if sets else 0)

    def signatures(self) -> list[int]:
        """For each depth-D atom, the bitmask of members containing it."""
        sig = [0] * (1 << self.depth)
        for i, c in enumerate(self.sets):
            for atom in c.atoms(self.depth):
                sig[atom] |= 1 << i
        return sig


@dataclass(frozen=True)
class KelleyResult:
    lp_value: Fraction | None
    witness: FiniteMeasure | None
    kn_table: tuple[tuple[int, int], ...]
    bf_upper_bound: Fraction | None


def _maximal(signatures) -> list[int]:
    sigs = sorted(set(signatures), key=lambda s: -bin(s).count("1"))
    out: list[int] = []
    for s in sigs:
        if s and not any(s & t == s for t in out):
            out.append(s)
    return out


def _best_meet(counts: Sequence[int], cliques: Sequence[int]) -> int:
    return max(sum(c for i, c in enumerate(counts) if q >> i & 1) for q in cliques)


def _min_over(args) -> int:
    size, n, first, cliques = args
    best = n
    for rest in itertools.combinations_with_replacement(range(first, size), n - 1):
        counts = [0] * size
        counts[first] += 1
        for i in rest:
            counts[i] += 1
        best = min(best, _best_meet(counts, cliques))
    return best


def _kn(size: int, n: int, cliques: list[int], workers: int) -> int:
    jobs = [(size, n, first, cliques) for first in range(size)]
    if workers > 1 and size > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return min(pool.map(_min_over, jobs))
    return min(map(_min_over, jobs))


def kelley_bf(family: FamilySpec, nmax: int, budget: int | None = None, workers: int = 1):
    """Table of (n, k_n) for n = 1..nmax and the bound min k_n / n."""
    if nmax < 1:
        raise ValueError("nmax must be at least 1")
    limit = config.budget() if budget is None else budget
    size = len(family.sets)
    work = sum(math.comb(n + size - 1, n) for n in range(1, nmax + 1))
    if work > limit:
        raise BudgetExceeded(f"{work} multisets exceed the budget {limit}")
    cliques = _maximal(family.signatures())
    table = tuple((n, _kn(size, n, cliques, workers)) for n in range(1, nmax + 1))
    return table, min(Fraction(k, n) for n, k in table)


def kelley_lp(family: FamilySpec) -> tuple[Fraction, FiniteMeasure]:
    """Best uniform lower bound on member masses, with an optimal measure.

    Atoms sharing a membership signature are merged into one variable; the
    optimal mass of a merged region is spread evenly over its atoms.
    """
    sig = family.signatures()
    regions = sorted(set(sig))
    where = {s: [a for a, t in enumerate(sig) if t == s] for s in regions}
    k = len(regions)
    # variables: region masses y_0..y_{k-1}, then t
    A = []
    for i in range(len(family.sets)):
        A.append([-Fraction(int(s >> i & 1)) for s in regions] + [Fraction(1)])
    A.append([Fraction(1)] * k + [Fraction(0)])
    b = [Fraction(0)] * len(family.sets) + [Fraction(1)]
    value, x = maximize([0] * k + [1], A, b)
    y = x[:k]
    total = sum(y, Fraction(0))
    if total != 1:
        # scaling up only raises member masses
        y = [v / total for v in y] if total else [Fraction(1, k)] * k
    atoms = [Fraction(0)] * len(sig)
    for s, mass in zip(regions, y):
        for a in where[s]:
            atoms[a] = mass / len(where[s])
    return value, FiniteMeasure(family.depth, tuple(atoms))


def kelley(family: FamilySpec, nmax: int = 6, mode: str = "both", budget: int | None = None,
           workers: int = 1) -> KelleyResult:
    lp_value = witness = None
    table, bound = (), None
    if mode in ("lp", "both"):
        lp_value, witness = kelley_lp(family)
    if mode in ("bf", "both"):
        table, bound = kelley_bf(family, nmax, budget, workers)
    return KelleyResult(lp_value, witness, table, bound)
