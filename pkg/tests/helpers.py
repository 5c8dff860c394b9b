"""Seeded random generators shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from mtool.algebra import Clopen, FiniteMeasure, paths_at
from mtool.codings import IdealSpec, WeightFn
from mtool.jordan import Selector, SpineMeasure


def rand_rat(rng: random.Random, lo: int = 1, hi: int = 9, den: int = 10) -> Fraction:
    """Rational in (0, 1) with a small denominator."""
    d = rng.randint(2, den)
    return Fraction(rng.randint(1, d - 1), d)


def rand_weight(rng: random.Random, depth: int, density: float = 0.5) -> WeightFn:
    table = {}
    for level in range(depth):
        for s in paths_at(level):
            if rng.random() < density:
                table[s] = rand_rat(rng)
    return WeightFn(depth, table, rand_rat(rng))


def rand_dyadic_weight(rng: random.Random, depth: int, choices=(Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))) -> WeightFn:
    table = {s: rng.choice(choices) for level in range(depth) for s in paths_at(level)}
    return WeightFn(depth, table)


def rand_clopen(rng: random.Random, depth: int) -> Clopen:
    return Clopen(p for p in paths_at(depth) if rng.random() < 0.5)


def rand_measure(rng: random.Random, depth: int, positive: bool = True) -> FiniteMeasure:
    raw = [rng.randint(1 if positive else 0, 6) for _ in range(1 << depth)]
    if not any(raw):
        raw[0] = 1
    total = sum(raw)
    return FiniteMeasure(depth, tuple(Fraction(x, total) for x in raw))


def rand_ideal(rng: random.Random, depth: int) -> IdealSpec:
    while True:
        gens = tuple(p for level in range(1, depth + 1) for p in paths_at(level) if rng.random() < 0.12)
        ideal = IdealSpec(depth, gens)
        if ideal.is_proper():
            return ideal


def rand_swaps(rng: random.Random, depth: int) -> frozenset[str]:
    return frozenset(s for level in range(depth) for s in paths_at(level) if rng.random() < 0.5)


def rand_selector(rng: random.Random) -> Selector:
    prefix = tuple(rng.randint(0, 1) for _ in range(rng.randint(0, 4)))
    period = tuple(rng.randint(0, 1) for _ in range(rng.randint(1, 4)))
    return Selector(prefix, period)


def rand_infinite_selector(rng: random.Random) -> Selector:
    while True:
        sel = rand_selector(rng)
        if sel.kind == "infinite":
            return sel


def rand_good_spine(rng: random.Random) -> SpineMeasure:
    """Random spine measure with limit 0, a random spine and an explicit head."""
    head = "".join(rng.choice("01") for _ in range(rng.randint(0, 3)))
    period = "".join(rng.choice("01") for _ in range(rng.randint(1, 3)))
    ratio = rand_rat(rng)
    start = rng.randint(0, 3)
    coef = Fraction(1) if not start else rand_rat(rng)
    floor = coef * ratio ** start
    explicit = {}
    share = Fraction(1)
    for n in range(start):
        explicit[n] = floor + (1 - floor) * share
        share *= rand_rat(rng)
    return SpineMeasure(head, period, tuple(explicit.items()), Fraction(0), coef, ratio, start)


def permute_weight(f: WeightFn, swaps) -> WeightFn:
    """The weight function g with g(phi(s)) = f(s) for the automorphism phi given by ``swaps``."""
    from mtool.codings import apply_automorphism

    table = {apply_automorphism(swaps, s): f.value(s) for level in range(f.depth) for s in paths_at(level)}
    return WeightFn(f.depth, table, f.default, f.kind)


def psi_pool(rng: random.Random, size: int):
    """Pairs (f, g, bits) of dyadic weight functions; about half are automorphic images."""
    pool = []
    for _ in range(size):
        depth = rng.randint(1, 4)
        bits = rng.randint(2, 8)
        f = rand_dyadic_weight(rng, depth)
        roll = rng.random()
        if roll < 0.5:
            g = permute_weight(f, rand_swaps(rng, depth))
        elif roll < 0.8:
            g = permute_weight(f, rand_swaps(rng, depth))
            s = rng.choice([p for level in range(depth) for p in paths_at(level)])
            table = dict(g.table)
            table[s] = rng.choice([x for x in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)) if x != g.value(s)])
            g = WeightFn(depth, table)
        else:
            g = rand_dyadic_weight(rng, depth)
        pool.append((f, g, bits))
    return pool
