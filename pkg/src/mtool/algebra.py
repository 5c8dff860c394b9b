"""Exact clopen algebra of the Cantor space and finite measured algebras.

Elements of the Cantor algebra are clopen subsets of 2^omega. A clopen set is
stored as a canonical antichain of binary paths (strings over "01"): no path is
a prefix of another and no two siblings are both present. Canonical form makes
structural equality coincide with set equality.

A :class:`FiniteMeasure` is a probability vector on the 2^D atoms of the
depth-D subalgebra, indexed by depth-D paths in lexicographic order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from . import config
from .errors import (
    BudgetExceeded,
    DepthExceeded,
    DepthMismatch,
    NotAnIsometry,
    NotStrictlyPositive,
)

Rat = Fraction
BitPath = str

_Tree = Union[bool, tuple]


def fmt_rat(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{fmt_rat(self.lo)}, {fmt_rat(self.hi)}]"


def check_path(path: str, limit: int | None = None) -> str:
    if any(ch not in "01" for ch in path):
        raise ValueError(f"not a binary path: {path!r}")
    limit = config.max_depth() if limit is None else limit
    if len(path) > limit:
        raise DepthExceeded(f"path of length {len(path)} exceeds MAX_DEPTH={limit}")
    return path


def path_key(path: str) -> tuple[int, str]:
    return (len(path), path)


def paths_at(depth: int) -> list[str]:
    """All binary paths of the given length in lexicographic order."""
    if depth == 0:
        return [""]
    return ["".join(bits) for bits in itertools.product("01", repeat=depth)]


# -- binary trie helpers -------------------------------------------------------
# A trie node is True (full), False (empty) or a pair (left, right).


def _mk(left: _Tree, right: _Tree) -> _Tree:
    if left is True and right is True:
        return True
    if left is False and right is False:
        return False
    return (left, right)


def _insert(node: _Tree, path: str, i: int = 0) -> _Tree:
    if node is True or i == len(path):
        return True
    left, right = (False, False) if node is False else node
    if path[i] == "0":
        left = _insert(left, path, i + 1)
    else:
        right = _insert(right, path, i + 1)
    return _mk(left, right)


def _combine(a: _Tree, b: _Tree, op) -> _Tree:
    if isinstance(a, bool) and isinstance(b, bool):
        return op(a, b)
    a0, a1 = (a, a) if isinstance(a, bool) else a
    b0, b1 = (b, b) if isinstance(b, bool) else b
    return _mk(_combine(a0, b0, op), _combine(a1, b1, op))


def _flip(a: _Tree) -> _Tree:
    if isinstance(a, bool):
        return not a
    return (_flip(a[0]), _flip(a[1]))


def _leaves(node: _Tree, prefix: str, out: list[str]) -> None:
    if node is True:
        out.append(prefix)
    elif node is not False:
        _leaves(node[0], prefix + "0", out)
        _leaves(node[1], prefix + "1", out)


_OPS = {
    "join": lambda x, y: x or y,
    "meet": lambda x, y: x and y,
    "symdiff": lambda x, y: x != y,
    "diff": lambda x, y: x and not y,
}


class Clopen:
    """A clopen subset of 2^omega in canonical antichain form.

    >>> str(Clopen(["0", "1"]))
    '[]'
    >>> str(Clopen(["0"]) ^ Clopen(["00"]))
    '[01]'
    """

    __slots__ = ("cylinders", "_tree", "_hash")

    def __init__(self, cylinders: Iterable[str] = ()):
        tree: _Tree = False
        for p in cylinders:
            tree = _insert(tree, check_path(p))
        self._set_tree(tree)

    def _set_tree(self, tree: _Tree) -> None:
        out: list[str] = []
        _leaves(tree, "", out)
        out.sort(key=path_key)
        self._tree = tree
        self.cylinders: tuple[str, ...] = tuple(out)
        self._hash = hash(self.cylinders)

    @classmethod
    def _from_tree(cls, tree: _Tree) -> "Clopen":
        obj = cls.__new__(cls)
        obj._set_tree(tree)
        return obj

    @classmethod
    def cylinder(cls, path: str) -> "Clopen":
        return cls([path])

    @classmethod
    def unit(cls) -> "Clopen":
        return cls._from_tree(True)

    @classmethod
    def empty(cls) -> "Clopen":
        return cls._from_tree(False)

    def is_empty(self) -> bool:
        return self._tree is False

    def is_unit(self) -> bool:
        return self._tree is True

    @property
    def depth(self) -> int:
        return max((len(p) for p in self.cylinders), default=0)

    def op(self, other: "Clopen", name: str) -> "Clopen":
        return Clopen._from_tree(_combine(self._tree, other._tree, _OPS[name]))

    def __or__(self, other: "Clopen") -> "Clopen":
        return self.op(other, "join")

    def __and__(self, other: "Clopen") -> "Clopen":
        return self.op(other, "meet")

    def __xor__(self, other: "Clopen") -> "Clopen":
        return self.op(other, "symdiff")

    def __sub__(self, other: "Clopen") -> "Clopen":
        return self.op(other, "diff")

    def __invert__(self) -> "Clopen":
        return Clopen._from_tree(_flip(self._tree))

    def __le__(self, other: "Clopen") -> bool:
        return (self - other).is_empty()

    def __eq__(self, other) -> bool:
        return isinstance(other, Clopen) and self.cylinders == other.cylinders

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Clopen") -> bool:
        return [path_key(p) for p in self.cylinders] < [path_key(p) for p in other.cylinders]

    def __str__(self) -> str:
        if self.is_empty():
            return "{}"
        return "+".join(f"[{p}]" for p in self.cylinders)

    def __repr__(self) -> str:
        return f"Clopen({str(self)!r})"

    def atoms(self, depth: int) -> list[int]:
        """Indices of the depth-``depth`` atoms below this set."""
        if self.depth > depth:
            raise DepthExceeded(f"clopen of depth {self.depth} used at depth {depth}")
        out = []
        for p in self.cylinders:
            start = int(p, 2) << (depth - len(p)) if p else 0
            out.extend(range(start, start + (1 << (depth - len(p)))))
        return sorted(out)


def clopen_ops(a: Clopen, b: Clopen | None, op: str) -> Clopen:
    if op == "complement":
        return ~a
    if op not in ("join", "meet", "symdiff"):
        raise ValueError(f"unknown clopen operation {op!r}")
    return a.op(b, op)


def all_clopens(depth: int) -> list[Clopen]:
    """Every element of the depth-``depth`` subalgebra (2^(2^depth) of them)."""
    return [mask_to_clopen(mask, depth) for mask in range(1 << (1 << depth))]


def clopen_to_mask(c: Clopen, depth: int) -> int:
    mask = 0
    for p in c.cylinders:
        if len(p) > depth:
            raise DepthExceeded(f"cylinder [{p}] deeper than {depth}")
        width = 1 << (depth - len(p))
        start = int(p, 2) * width if p else 0
        mask |= ((1 << width) - 1) << start
    return mask


def mask_to_clopen(mask: int, depth: int) -> Clopen:
    atoms = paths_at(depth)
    return Clopen(atoms[i] for i in range(len(atoms)) if mask >> i & 1)


# -- finite measures ---------------------------------------------------------


@dataclass(frozen=True)
class FiniteMeasure:
    depth: int
    atoms: tuple[Fraction, ...]
    _cumulative: tuple[Fraction, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        atoms = tuple(Fraction(x) for x in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if self.depth < 0:
            raise ValueError("negative depth")
        if self.depth > config.max_depth():
            raise DepthExceeded(f"depth {self.depth} exceeds MAX_DEPTH={config.max_depth()}")
        if len(atoms) != 1 << self.depth:
            raise ValueError(f"expected {1 << self.depth} atoms, got {len(atoms)}")
        if any(x < 0 for x in atoms):
            raise ValueError("negative atom mass")
        if sum(atoms) != 1:
            raise ValueError(f"atoms sum to {sum(atoms)}, not 1")
        object.__setattr__(self, "_cumulative", tuple(itertools.accumulate(atoms, initial=Fraction(0))))

    @property
    def strictly_positive(self) -> bool:
        return all(x > 0 for x in self.atoms)

    def interval_mass(self, start: int, stop: int) -> Fraction:
        """Mass of atoms with index in [start, stop)."""
        return self._cumulative[stop] - self._cumulative[start]

    def cylinder(self, path: str) -> Fraction:
        if len(path) > self.depth:
            raise DepthExceeded(f"cylinder [{path}] deeper than measure depth {self.depth}")
        width = 1 << (self.depth - len(path))
        start = int(path, 2) * width if path else 0
        return self.interval_mass(start, start + width)

    def coarsen(self, depth: int) -> "FiniteMeasure":
        if depth > self.depth:
            raise DepthExceeded(f"cannot refine depth {self.depth} measure to {depth}")
        return FiniteMeasure(depth, tuple(self.cylinder(p) for p in paths_at(depth)))


def lebesgue(depth: int) -> FiniteMeasure:
    return FiniteMeasure(depth, (Fraction(1, 1 << depth),) * (1 << depth))


def measure_eval(m: FiniteMeasure, c: Clopen) -> Fraction:
    return sum((m.cylinder(p) for p in c.cylinders), Fraction(0))


def fn_dist(m: FiniteMeasure, a: Clopen, b: Clopen) -> Fraction:
    """Frechet-Nikodym distance m(a symmetric-difference b)."""
    return measure_eval(m, a ^ b)


def measure_range(m: FiniteMeasure) -> frozenset[Fraction]:
    """All values m takes on the depth-D subalgebra (subset sums of atoms)."""
    sums = {Fraction(0)}
    for x in m.atoms:
        sums |= {s + x for s in sums}
    return frozenset(sums)


def metric_iso_finite(m1: FiniteMeasure, m2: FiniteMeasure) -> tuple[bool, dict[int, int] | None]:
    """Decide metric isomorphism of two finite measured algebras.

    Returns ``(True, perm)`` where ``perm`` maps atom indices of ``m1`` to
    atom indices of ``m2`` with equal mass, or ``(False, None)``.
    """
    if m1.depth != m2.depth:
        raise DepthMismatch(f"depths {m1.depth} and {m2.depth} differ")
    if sorted(m1.atoms) != sorted(m2.atoms):
        return False, None
    order1 = sorted(range(len(m1.atoms)), key=lambda i: (m1.atoms[i], i))
    order2 = sorted(range(len(m2.atoms)), key=lambda i: (m2.atoms[i], i))
    return True, dict(zip(order1, order2))


def _mask_masses(m: FiniteMeasure) -> list[Fraction]:
    n = len(m.atoms)
    masses = [Fraction(0)] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        masses[mask] = masses[mask ^ low] + m.atoms[low.bit_length() - 1]
    return masses


def _check_enumerable(depth: int, limit: int | None) -> None:
    size = 1 << (1 << depth)
    limit = config.budget() if limit is None else limit
    if size > limit:
        raise BudgetExceeded(f"{size} algebra elements exceed the enumeration budget {limit}")


def iso_from_isometry(
    m1: FiniteMeasure,
    m2: FiniteMeasure,
    f: Mapping[Clopen, Clopen],
    budget: int | None = None,
) -> dict[Clopen, Clopen]:
    """Repair an isometry of Frechet-Nikodym spaces into a metric isomorphism.

    ``f`` must be a bijection from the depth-D algebra of ``m1`` onto that of
    ``m2`` preserving distances; this is checked over all pairs. The result
    is ``g(a) = f(a) ^ f(0)``, itself checked to be a measure-preserving
    Boolean isomorphism.
    """
    if m1.depth != m2.depth:
        raise DepthMismatch(f"depths {m1.depth} and {m2.depth} differ")
    if not (m1.strictly_positive and m2.strictly_positive):
        raise NotStrictlyPositive("both measures must be strictly positive")
    depth = m1.depth
    _check_enumerable(depth, budget)
    size = 1 << (1 << depth)
    full = size - 1

    table: list[int] = [-1] * size
    for a, b in f.items():
        try:
            table[clopen_to_mask(a, depth)] = clopen_to_mask(b, depth)
        except DepthExceeded as exc:
            raise NotAnIsometry(f"table entry outside the depth-{depth} algebra: {exc}") from exc
    if -1 in table:
        raise NotAnIsometry("table does not cover the whole algebra")
    if len(set(table)) != size:
        raise NotAnIsometry("table is not a bijection")

    mu, nu = _mask_masses(m1), _mask_masses(m2)
    for a in range(size):
        fa = table[a]
        for b in range(a + 1, size):
            if nu[fa ^ table[b]] != mu[a ^ b]:
                raise NotAnIsometry(
                    f"d({mask_to_clopen(a, depth)}, {mask_to_clopen(b, depth)}) is not preserved"
                )

    shift = table[0]
    g = [table[a] ^ shift for a in range(size)]
    # Cannot fail for strictly positive measures; kept as a hard check.
    for a in range(size):
        assert nu[g[a]] == mu[a]
        assert g[full ^ a] == full ^ g[a]
        for b in range(a + 1, size):
            assert g[a | b] == g[a] | g[b]
    return {mask_to_clopen(a, depth): mask_to_clopen(g[a], depth) for a in range(size)}


def density_defects(
    m: FiniteMeasure,
    candidates: Sequence[Clopen],
    budget: int | None = None,
) -> tuple[Fraction, Fraction]:
    """Finite sup-inf density defects of a candidate family.

    ``symmetric`` is the largest distance from an algebra element to its
    nearest candidate; ``uniform`` is the largest gap ``m(a - d)`` to the best
    candidate below ``a`` (``m(a)`` when no candidate lies below ``a``).
    """
    _check_enumerable(m.depth, budget)
    masks = sorted({clopen_to_mask(c, m.depth) for c in candidates})
    masses = _mask_masses(m)
    symmetric = Fraction(0)
    uniform = Fraction(0)
    for a in range(len(masses)):
        if masks:
            symmetric = max(symmetric, min(masses[a ^ d] for d in masks))
        else:
            symmetric = max(symmetric, masses[a])
        gap = masses[a]
        for d in masks:
            if d & ~a == 0:
                gap = min(gap, masses[a & ~d])
        uniform = max(uniform, gap)
    return symmetric, uniform
