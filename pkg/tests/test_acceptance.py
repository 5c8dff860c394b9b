"""Acceptance criteria, one test each; every test records a PASS/FAIL line with its timing."""

import itertools
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest

from conftest import ACCEPTANCE_LINES
from helpers import (
    psi_pool,
    rand_clopen,
    rand_good_spine,
    rand_ideal,
    rand_selector,
    rand_swaps,
    rand_weight,
)
from mtool.algebra import Clopen, FiniteMeasure, all_clopens, fn_dist, measure_eval, measure_range, metric_iso_finite
from mtool.algebra import clopen_to_mask, iso_from_isometry, paths_at
from mtool.codings import (
    encode_ideal,
    equiv_c,
    equiv_c_bruteforce,
    equiv_z_depth,
    m_condition,
    map_ideal,
    measure_from_weights,
    node_masses,
    psi_encode,
)
from mtool.jordan import (
    JordanAlgebra,
    SpinePartition,
    build_jordan_iso,
    canonical_targets,
    carve,
    certified_measure,
    check_iso_table,
    inner_outer,
    lebesgue_spine,
    nu_spine,
    partition_total,
    small_partition,
)
from mtool.jordan import Selector
from mtool.kelley import FamilySpec, kelley


@contextmanager
def criterion(number: int, title: str, limit: float):
    """Run a criterion body, record PASS/FAIL with elapsed time, and enforce the time limit."""
    start = time.perf_counter()
    ok = False
    detail = ""
    try:
        yield
        ok = True
    except BaseException as exc:  # includes pytest's Failed
        detail = f" ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        raise
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < limit
        verdict = "PASS" if ok and within else "FAIL"
        if ok and not within:
            detail = f" (over the {limit:g} s limit)"
        ACCEPTANCE_LINES.append(f"{verdict} {number:>2} {title} [{elapsed:.2f} s / {limit:g} s]{detail}")
    assert within, f"criterion {number} took {elapsed:.2f} s, limit {limit:g} s"


def test_01_weight_normalization():
    with criterion(1, "weight functions normalize", 5):
        rng = random.Random(101)
        for _ in range(100):
            w = rand_weight(rng, rng.randint(0, 10))
            assert sum(measure_from_weights(w).atoms) == 1


def test_02_equal_ranges_without_isomorphism():
    with criterion(2, "equal subset-sum ranges, no metric isomorphism", 1):
        mu = FiniteMeasure(2, (F(1, 4), F(1, 4), F(3, 8), F(1, 8)))
        nu = FiniteMeasure(2, (F(3, 8), F(1, 8), F(1, 8), F(3, 8)))
        eighths = {F(k, 8) for k in range(9)}
        assert measure_range(mu) == measure_range(nu) == eighths
        assert metric_iso_finite(mu, nu) == (False, None)


def test_03_good_and_bad_spine_partitions():
    with criterion(3, "spine partition totals 1 and 1/2", 1):
        leb, nu = lebesgue_spine(), nu_spine()
        assert all(leb.piece(n) == F(1, 2 ** (n + 1)) for n in range(20))
        assert all(nu.piece(n) == F(1, 2 ** (n + 2)) for n in range(20))
        assert partition_total(leb, SpinePartition(leb)) == (1, True)
        assert partition_total(nu, SpinePartition(nu)) == (F(1, 2), False)


def test_04_good_partitions_decide_membership():
    with criterion(4, "good partitions give Jordan members", 10):
        rng = random.Random(104)
        for _ in range(50):
            mu = rand_good_spine(rng)
            inner, outer, member = inner_outer(mu, SpinePartition(mu), rand_selector(rng))
            assert member and inner == outer
        nu = nu_spine()
        assert inner_outer(nu, SpinePartition(nu), Selector((), (1, 0))) == (F(1, 3), F(5, 6), False)


def test_05_carve_is_exact():
    with criterion(5, "carve hits every rational exactly", 5):
        leb = lebesgue_spine()
        third = carve(leb, "", F(1, 3))
        assert third.measure == F(1, 3) and [str(s) for _, s in third.blocks] == [":01"]
        alg = JordanAlgebra(leb)
        rng = random.Random(105)
        done = 0
        while done < 100:
            x = alg.unit() if done % 2 else alg.from_clopen(rand_clopen(rng, rng.randint(1, 4)))
            if x.is_empty():
                continue
            d = rng.randint(2, 80)
            eps = F(rng.randint(1, d - 1), d) * x.measure
            j = alg.carve(x, eps)
            assert j.measure == eps and alg.leq(j, x)
            assert eps in certified_measure(leb, j)
            done += 1


def test_06_jordan_construction_on_nu():
    with criterion(6, "8-stage construction on the nu spine", 10):
        nu = nu_spine()
        table = build_jordan_iso(nu, canonical_targets(8), 8)
        assert check_iso_table(table) == {"dyadic": True, "partition": True, "refinement": True, "density": True}


def test_07_small_partitions():
    with criterion(7, "small partitions with certificate", 5):
        for mu in (lebesgue_spine(), nu_spine()):
            for eps in (F(1, 4), F(1, 10)):
                pieces, bound, cert = small_partition(mu, eps, 4)
                assert bound < eps and cert.passed
                assert sum(mu.cylinder_mass(p) for p in pieces) <= bound


def test_08_kelley_duality():
    with criterion(8, "Kelley LP value below k_n/n, exact on known families", 60):
        rng = random.Random(108)
        for _ in range(200):
            depth = rng.randint(1, 3)
            size = rng.randint(1, 4)
            sets = []
            while len(sets) < size:
                c = rand_clopen(rng, depth)
                if not c.is_empty():
                    sets.append(c)
            result = kelley(FamilySpec(tuple(sets), depth), 6)
            assert all(result.lp_value <= F(k, n) for n, k in result.kn_table)
        exact = [
            ([Clopen(["0"]), Clopen(["1"])], F(1, 2), 2),
            ([Clopen(["0"]), Clopen(["10"]), Clopen(["11"])], F(1, 3), 3),
            ([Clopen(["0"]), Clopen(["00"]), Clopen(["000"])], F(1), 1),
        ]
        for sets, value, q in exact:
            result = kelley(FamilySpec.of(sets), 6)
            assert result.lp_value == value
            assert all(F(k, n) == value for n, k in result.kn_table if n % q == 0)


def _is_isometry(mu, f):
    elems = list(f)
    return all(fn_dist(mu, f[a], f[b]) == fn_dist(mu, a, b) for a, b in itertools.combinations(elems, 2))


def _check_repair(mu, g):
    depth = mu.depth
    full = (1 << (1 << depth)) - 1
    table = {clopen_to_mask(a, depth): clopen_to_mask(b, depth) for a, b in g.items()}
    assert sorted(table) == sorted(table.values()) == list(range(full + 1))
    for a, b in g.items():
        assert measure_eval(mu, b) == measure_eval(mu, a)
    for a in table:
        assert table[full ^ a] == full ^ table[a]
        for b in table:
            assert table[a | b] == table[a] | table[b]


def _atom_map(perm, depth):
    atoms = paths_at(depth)

    def h(a):
        return Clopen(atoms[perm[i]] for i, p in enumerate(atoms) if Clopen([p]) <= a)

    return h


def test_09_isometry_repair():
    with criterion(9, "isometries repair to measure-preserving isomorphisms", 5):
        checked = 0
        for mu in (FiniteMeasure(1, (F(1, 2), F(1, 2))), FiniteMeasure(1, (F(1, 3), F(2, 3)))):
            elems = all_clopens(1)
            for image in itertools.permutations(elems):
                f = dict(zip(elems, image))
                if _is_isometry(mu, f):
                    _check_repair(mu, iso_from_isometry(mu, mu, f))
                    checked += 1
        for atoms in ((F(1, 4),) * 4, (F(1, 4), F(1, 4), F(3, 8), F(1, 8)), (F(1, 8), F(1, 4), F(1, 8), F(1, 2))):
            mu = FiniteMeasure(2, atoms)
            elems = all_clopens(2)
            for perm in itertools.permutations(range(4)):
                if any(atoms[i] != atoms[perm[i]] for i in range(4)):
                    continue
                h = _atom_map(perm, 2)
                for c in elems:
                    g = iso_from_isometry(mu, mu, {a: h(a ^ c) for a in elems})
                    _check_repair(mu, g)
                    assert all(g[a] == h(a) for a in elems)
                    checked += 1
        assert checked > 24


def test_10_tree_code_matches_equiv_c():
    with criterion(10, "tree-code equality coincides with equiv_c and the swap oracle", 30):
        rng = random.Random(110)
        for f, g, bits in psi_pool(rng, 50):
            same = equiv_c(f, g)[0]
            assert (psi_encode(f, bits).canonical == psi_encode(g, bits).canonical) == same
            assert equiv_c_bruteforce(f, g) == same


def test_11_ideal_encoding():
    with criterion(11, "ideal encodings satisfy the M-condition and are z-invariant", 5):
        rng = random.Random(111)
        for _ in range(30):
            depth = rng.randint(1, 6)
            ideal = rand_ideal(rng, depth)
            w = encode_ideal(ideal)
            assert m_condition(w)
            masses = node_masses(w)
            assert all(sum(masses[s] for s in paths_at(level)) == 1 for level in range(depth + 1))
            image = map_ideal(ideal, rand_swaps(rng, depth))
            assert equiv_z_depth(w, encode_ideal(image))
