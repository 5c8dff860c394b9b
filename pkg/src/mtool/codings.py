"""Codings of measures on the Cantor algebra and the relations between them.

A weight function assigns to every tree node ``s`` (``len(s) < depth``) the
fraction of the mass of ``[s]`` that goes to the left child ``[s0]``. The
induced mass of a cylinder is the product of the weights along its path,
using ``1 - w`` at right turns.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .algebra import Clopen, FiniteMeasure, check_path, paths_at
from .errors import (
    DepthExceeded,
    DepthMismatch,
    ImproperIdeal,
    NotStrictlyPositive,
    RangeMismatch,
)

STRICT = "strict"
M_KIND = "M"


class WeightFn:
    """Weight function of a given depth with a default for unlisted nodes.

    ``kind == "strict"`` requires every weight in the open interval (0, 1);
    ``kind == "M"`` allows [0, 1]. For M-kind functions the weight of every
    node of induced mass zero is normalised to 0, so a zero weight propagates
    to both children of a null node.
    """

    __slots__ = ("depth", "default", "kind", "table")

    def __init__(self, depth: int, table: Mapping[str, Fraction] | None = None,
                 default: Fraction = Fraction(1, 2), kind: str = STRICT):
        if kind not in (STRICT, M_KIND):
            raise ValueError(f"unknown weight kind {kind!r}")
        if depth < 0:
            raise ValueError("negative depth")
        check_path("0" * depth)
        self.depth = depth
        self.kind = kind
        self.default = Fraction(default)
        entries: dict[str, Fraction] = {}
        for path, value in (table or {}).items():
            check_path(path)
            if len(path) >= depth:
                raise ValueError(f"node [{path}] is not above depth {depth}")
            entries[path] = Fraction(value)
        self.table = entries
        for path, value in [("default", self.default), *entries.items()]:
            if kind == STRICT and not 0 < value < 1:
                raise ValueError(f"weight {value} at {path} outside (0, 1)")
            if kind == M_KIND and not 0 <= value <= 1:
                raise ValueError(f"weight {value} at {path} outside [0, 1]")
        if kind == M_KIND:
            self._zero_null_nodes()

    def _zero_null_nodes(self) -> None:
        level = [("", Fraction(1))]
        for _ in range(self.depth):
            nxt = []
            for s, mass in level:
                w = self.value(s)
                if mass == 0 and w != 0:
                    self.table[s] = Fraction(0)
                    w = Fraction(0)
                nxt.append((s + "0", mass * w))
                nxt.append((s + "1", mass * (1 - w)))
            level = nxt

    def value(self, path: str) -> Fraction:
        return self.table.get(path, self.default)

    def with_depth(self, depth: int) -> "WeightFn":
        table = {s: v for s, v in self.table.items() if len(s) < depth}
        return WeightFn(depth, table, self.default, self.kind)

    def _key(self):
        return (self.depth, self.kind, self.default, tuple(sorted(self.table.items())))

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightFn) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return (f"WeightFn(depth={self.depth}, kind={self.kind!r}, default={self.default}, "
                f"table={dict(sorted(self.table.items()))})")


def node_masses(w: WeightFn) -> dict[str, Fraction]:
    """Induced mass of every cylinder ``[s]`` with ``len(s) <= w.depth``."""
    masses = {"": Fraction(1)}
    level = [""]
    for _ in range(w.depth):
        nxt = []
        for s in level:
            mass, weight = masses[s], w.value(s)
            masses[s + "0"] = mass * weight
            masses[s + "1"] = mass * (1 - weight)
            nxt += [s + "0", s + "1"]
        level = nxt
    return masses


def measure_from_weights(w: WeightFn) -> FiniteMeasure:
    masses = [Fraction(1)]
    paths = [""]
    for _ in range(w.depth):
        nxt_m, nxt_p = [], []
        for s, mass in zip(paths, masses):
            weight = w.value(s)
            nxt_m += [mass * weight, mass * (1 - weight)]
            nxt_p += [s + "0", s + "1"]
        masses, paths = nxt_m, nxt_p
    return FiniteMeasure(w.depth, tuple(masses))


def m_condition(w: WeightFn) -> bool:
    """Every node of induced mass zero carries weight zero, hence so do its children."""
    masses = node_masses(w)
    for s, mass in masses.items():
        if len(s) < w.depth and mass == 0:
            if w.value(s) != 0:
                return False
            for child in (s + "0", s + "1"):
                if len(child) < w.depth and w.value(child) != 0:
                    return False
    return True


# -- tree automorphisms --------------------------------------------------------


def apply_automorphism(swaps: Iterable[str], path: str) -> str:
    """Image of ``path`` under the tree automorphism swapping children at ``swaps``."""
    swaps = swaps if isinstance(swaps, (set, frozenset)) else set(swaps)
    out = []
    for i, bit in enumerate(path):
        if path[:i] in swaps:
            bit = "1" if bit == "0" else "0"
        out.append(bit)
    return "".join(out)


def _canon_ids(w: WeightFn, intern: dict) -> dict[str, int]:
    ids: dict[str, int] = {}
    leaf = intern.setdefault(("leaf",), len(intern))
    for s in paths_at(w.depth):
        ids[s] = leaf
    for level in range(w.depth - 1, -1, -1):
        for s in paths_at(level):
            a, b = ids[s + "0"], ids[s + "1"]
            key = (w.value(s), min(a, b), max(a, b))
            ids[s] = intern.setdefault(key, len(intern))
    return ids


def equiv_c(f: WeightFn, g: WeightFn) -> tuple[bool, frozenset[str] | None]:
    """Decide whether some tree automorphism phi has f(s) = g(phi(s)) for all s.

    On success the witness is the set of nodes (in f's tree) at which phi
    swaps the two children.
    """
    if f.depth != g.depth:
        raise DepthMismatch(f"depths {f.depth} and {g.depth} differ")
    intern: dict = {}
    idf, idg = _canon_ids(f, intern), _canon_ids(g, intern)
    if idf[""] != idg[""]:
        return False, None
    swaps = set()
    stack = [("", "")]
    while stack:
        s, t = stack.pop()
        if len(s) == f.depth:
            continue
        if idf[s + "0"] == idg[t + "0"]:
            stack += [(s + "0", t + "0"), (s + "1", t + "1")]
        else:
            swaps.add(s)
            stack += [(s + "0", t + "1"), (s + "1", t + "0")]
    return True, frozenset(swaps)


def equiv_c_bruteforce(f: WeightFn, g: WeightFn) -> bool:
    """Oracle for :func:`equiv_c`: try every swap pattern on the internal nodes."""
    if f.depth != g.depth:
        raise DepthMismatch(f"depths {f.depth} and {g.depth} differ")
    nodes = [s for level in range(f.depth) for s in paths_at(level)]
    index = {s: i for i, s in enumerate(nodes)}
    # For each node, the indices of its proper prefixes together with the bit taken there.
    steps = [[(index[s[:i]], s[i]) for i in range(len(s))] for s in nodes]
    fvals = [f.value(s) for s in nodes]
    gval = g.value
    for pattern in range(1 << len(nodes)):
        for k, s in enumerate(nodes):
            image = "".join(
                ("1" if bit == "0" else "0") if pattern >> i & 1 else bit for i, bit in steps[k]
            )
            if fvals[k] != gval(image):
                break
        else:
            return True
    return False


# -- Psi: coding into finitely branching trees ----------------------------------


def binary_digits(x: Fraction, count: int) -> list[int]:
    """The first ``count`` binary digits of x in [0, 1] after the point."""
    x = Fraction(x)
    digits = []
    for _ in range(count):
        x *= 2
        bit = 1 if x >= 1 else 0
        digits.append(bit)
        x -= bit
    return digits


def ahu_canonical(node: list) -> str:
    """AHU parenthesis code of a rooted unordered tree given as nested child lists."""
    return "(" + "".join(sorted(ahu_canonical(child) for child in node)) + ")"


def tree_size(node: list) -> int:
    return 1 + sum(tree_size(child) for child in node)


@dataclass(frozen=True)
class TreeCode:
    canonical: str
    size: int
    root: list = field(compare=False, repr=False, default_factory=list)

    def __str__(self) -> str:
        return self.canonical


def _real_gadget(x: Fraction, bits: int) -> list:
    digits = binary_digits(x, bits)
    node: list = [[]] if digits[-1] else []
    for bit in reversed(digits[:-1]):
        node = [node, []] if bit else [node]
    return node


def psi_tree(f: WeightFn, real_bits: int) -> list:
    def build(s: str) -> list:
        children: list = [[[], [], []]]  # tag star: marks base-tree vertices
        if len(s) < f.depth:
            children.append(_real_gadget(f.value(s), real_bits))
            children += [build(s + "0"), build(s + "1")]
        return children

    return build("")


def psi_encode(f: WeightFn, real_bits: int) -> TreeCode:
    if real_bits < 1:
        raise ValueError("real_bits must be at least 1")
    root = psi_tree(f, real_bits)
    return TreeCode(ahu_canonical(root), tree_size(root), root)


# -- measures with null sets ---------------------------------------------------


def _require_m(f: WeightFn, g: WeightFn) -> None:
    if f.kind != M_KIND or g.kind != M_KIND:
        raise ValueError("relation is defined on M-kind weight functions")
    if f.depth != g.depth:
        raise DepthMismatch(f"depths {f.depth} and {g.depth} differ")


def null_nodes(w: WeightFn) -> frozenset[str]:
    return frozenset(s for s, mass in node_masses(w).items() if mass == 0)


def equiv_m(f: WeightFn, g: WeightFn) -> bool:
    """Mutual absolute continuity: the induced measures have the same null cylinders."""
    _require_m(f, g)
    return null_nodes(f) == null_nodes(g)


def equiv_z_depth(f: WeightFn, g: WeightFn) -> bool:
    """Truncated version of 'isomorphic to a measure with the same null sets'.

    At finite depth every atom permutation is a metric isomorphism, so this is
    equality of the numbers of null atoms.
    """
    _require_m(f, g)
    zf = sum(1 for x in measure_from_weights(f).atoms if x == 0)
    zg = sum(1 for x in measure_from_weights(g).atoms if x == 0)
    return zf == zg


@dataclass(frozen=True)
class IdealSpec:
    depth: int
    generators: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        for p in self.generators:
            check_path(p)
            if len(p) > self.depth:
                raise ValueError(f"generator [{p}] deeper than {self.depth}")

    @property
    def join(self) -> Clopen:
        return Clopen(self.generators)

    def contains(self, path: str) -> bool:
        """Is the cylinder [path] a member of the ideal?"""
        cyls = set(self.join.cylinders)
        return any(path[:i] in cyls for i in range(len(path) + 1))

    def is_proper(self) -> bool:
        return not self.join.is_unit()


def encode_ideal(ideal: IdealSpec) -> WeightFn:
    """Measure coding of a proper ideal: halve between children outside the
    ideal, give everything to the child outside it otherwise."""
    if not ideal.is_proper():
        raise ImproperIdeal("the ideal contains the unit")
    table: dict[str, Fraction] = {}
    masses = {"": Fraction(1)}
    for level in range(ideal.depth):
        for s in paths_at(level):
            mass = masses[s]
            if mass == 0:
                left = right = Fraction(0)
            else:
                in0, in1 = ideal.contains(s + "0"), ideal.contains(s + "1")
                if in0:
                    left, right = Fraction(0), mass
                elif in1:
                    left, right = mass, Fraction(0)
                else:
                    left = right = mass / 2
            masses[s + "0"], masses[s + "1"] = left, right
            table[s] = left / mass if mass else Fraction(0)
    return WeightFn(ideal.depth, table, Fraction(1, 2), M_KIND)


def map_ideal(ideal: IdealSpec, swaps: Iterable[str]) -> IdealSpec:
    swaps = set(swaps)
    return IdealSpec(ideal.depth, tuple(apply_automorphism(swaps, p) for p in ideal.generators))


# -- ranges of hat-sets --------------------------------------------------------


def hat_measure(m: FiniteMeasure, s: str) -> Fraction:
    """Mass of the union of same-length cylinders lexicographically before [s]."""
    if len(s) > m.depth:
        raise DepthExceeded(f"path [{s}] deeper than measure depth {m.depth}")
    start = int(s, 2) << (m.depth - len(s)) if s else 0
    return m.interval_mass(0, start)


def hat_set(s: str) -> Clopen:
    width = len(s)
    return Clopen(t for t in paths_at(width) if t < s)


@dataclass(frozen=True)
class RangeCode:
    values: tuple[Fraction, ...]
    per_level: tuple[tuple[Fraction, ...], ...]


def intertwining(per_level) -> bool:
    prev = (Fraction(0), Fraction(1))
    for level in per_level:
        cur = (Fraction(0), *level, Fraction(1))
        if len(cur) != 2 * len(prev) - 1:
            return False
        for k in range(len(prev) - 1):
            if cur[2 * k] != prev[k] or not prev[k] < cur[2 * k + 1] < prev[k + 1]:
                return False
        prev = cur
    return True


def range_code(m: FiniteMeasure, depth: int) -> tuple[RangeCode, bool]:
    if depth > m.depth:
        raise DepthExceeded(f"depth {depth} exceeds measure depth {m.depth}")
    if not m.strictly_positive:
        raise NotStrictlyPositive("range coding needs a strictly positive measure")
    per_level = tuple(
        tuple(hat_measure(m, s) for s in paths_at(level)[1:]) for level in range(1, depth + 1)
    )
    values = tuple(sorted({v for level in per_level for v in level if v != 0}))
    return RangeCode(values, per_level), intertwining(per_level)


@dataclass(frozen=True)
class IsoWitness:
    table: dict
    depth_reached: int


def iso_from_ranges(m1: FiniteMeasure, m2: FiniteMeasure, search_depth: int) -> IsoWitness:
    """Build the measure-preserving tree map induced by matching hat-values.

    Source nodes of levels 1..search_depth are matched against target
    hat-sets of every level available in ``m2``. The witness maps each source
    node ``s`` (up to ``depth_reached``) to the target clopen
    ``H(next(s)) - H(s)``, where ``H`` sends a source hat-set to the target
    hat-set of equal measure and ``H(next(last)) = 1``.
    """
    if not (m1.strictly_positive and m2.strictly_positive):
        raise NotStrictlyPositive("both measures must be strictly positive")
    if search_depth > m1.depth or search_depth > m2.depth:
        raise DepthExceeded(f"search depth {search_depth} exceeds a measure depth")
    targets: dict[Fraction, Clopen] = {Fraction(0): Clopen.empty()}
    for level in range(1, m2.depth + 1):
        for t in paths_at(level)[1:]:
            targets.setdefault(hat_measure(m2, t), hat_set(t))

    unmatched: list[Fraction] = []
    depth_reached = search_depth
    for level in range(1, search_depth + 1):
        missing = [v for v in (hat_measure(m1, s) for s in paths_at(level)[1:]) if v not in targets]
        if missing and depth_reached == search_depth:
            depth_reached = level - 1
        unmatched += missing
    table: dict[str, Clopen] = {"": Clopen.unit()}
    for level in range(1, depth_reached + 1):
        images = [targets[hat_measure(m1, s)] for s in paths_at(level)] + [Clopen.unit()]
        for k, s in enumerate(paths_at(level)):
            table[s] = images[k + 1] - images[k]
    witness = IsoWitness(table, depth_reached)
    if depth_reached == 0 and unmatched:
        raise RangeMismatch(min(unmatched), witness)
    return witness
