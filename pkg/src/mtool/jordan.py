"""Spine measures, good partitions and exact Jordan-extension elements.

A spine measure is fixed by an infinite path (the spine) and the masses
``m_n`` of its initial cylinders: ``m_n = a + b * gamma**n`` from ``N0`` on,
explicit before. Every off-spine cylinder splits its mass evenly between its
children. The spine partition consists of the pieces
``a_n = spine|n + (1 - spine(n))``, with masses ``m_n - m_{n+1}``; it is good
(its masses sum to 1) exactly when ``a == 0``.

Elements of the Jordan extension reachable here are finite disjoint unions
of blocks ``(c, M)``: the join, inside the cylinder ``c``, of the pieces of
the canonical partition of ``c`` selected by an eventually periodic set
``M``. The canonical partition of a spine cylinder runs along the spine; of
any other cylinder, along its all-zeros path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

from . import config
from .algebra import Clopen, RatInterval, check_path, path_key, paths_at
from .errors import NotRepresentable, OutOfRange, StageBudgetExceeded

Block = tuple  # (cylinder path, Selector | None); None selects the whole cylinder

# longest binary expansion (prefix plus period) a carved selector may carry
MAX_PERIOD = 4096


# -- selectors -----------------------------------------------------------------


def _bits(text: str) -> tuple[int, ...]:
    if any(ch not in "01" for ch in text):
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(ch) for ch in text)


@dataclass(frozen=True)
class Selector:
    """Eventually periodic subset of the naturals: ``prefix`` then ``period`` repeated.

    Stored in normal form: minimal period, shortest prefix.

    >>> str(Selector((1, 1, 0), (1, 0)))
    '1:10'
    """

    prefix: tuple[int, ...]
    period: tuple[int, ...] = (0,)

    def __post_init__(self):
        prefix, period = tuple(self.prefix), tuple(self.period)
        if not period:
            raise ValueError("empty period")
        if any(b not in (0, 1) for b in prefix + period):
            raise ValueError("selector bits must be 0 or 1")
        n = len(period)
        for d in range(1, n + 1):
            if n % d == 0 and period == period[:d] * (n // d):
                period = period[:d]
                break
        while prefix and prefix[-1] == period[-1]:
            period = period[-1:] + period[:-1]
            prefix = prefix[:-1]
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "period", period)

    @classmethod
    def parse(cls, text: str) -> "Selector":
        text = text.strip()
        if text.startswith("sel "):
            text = text[4:].strip()
        if text.count(":") != 1:
            raise ValueError(f"selector literal needs exactly one ':': {text!r}")
        head, tail = text.split(":")
        return cls(_bits(head), _bits(tail))

    @classmethod
    def finite(cls, members: Iterable[int]) -> "Selector":
        members = set(members)
        size = max(members, default=-1) + 1
        return cls(tuple(int(i in members) for i in range(size)), (0,))

    @classmethod
    def all(cls) -> "Selector":
        return cls((), (1,))

    @classmethod
    def binary(cls, q: Fraction) -> "Selector":
        """Pieces selected by the binary digits of q in [0, 1): digit k+1 selects piece k."""
        q = Fraction(q)
        if not 0 <= q < 1:
            raise ValueError(f"{q} not in [0, 1)")
        num, den = q.numerator, q.denominator
        digits: list[int] = []
        seen: dict[int, int] = {}
        while num and num not in seen:
            if len(digits) > MAX_PERIOD:
                raise NotRepresentable(f"binary expansion of {q} repeats only after more than {MAX_PERIOD} digits")
            seen[num] = len(digits)
            num *= 2
            digits.append(num // den)
            num %= den
        if not num:
            return cls(tuple(digits), (0,))
        start = seen[num]
        return cls(tuple(digits[:start]), tuple(digits[start:]))

    def bit(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.period[(n - len(self.prefix)) % len(self.period)]

    def __contains__(self, n: int) -> bool:
        return bool(self.bit(n))

    @property
    def kind(self) -> str:
        if set(self.period) == {0}:
            return "finite"
        if set(self.period) == {1}:
            return "cofinite"
        return "infinite"

    def members(self) -> list[int]:
        """Members of a finite selector."""
        assert self.kind == "finite"
        return [i for i, b in enumerate(self.prefix) if b]

    def omitted(self) -> list[int]:
        """Non-members of a cofinite selector."""
        assert self.kind == "cofinite"
        return [i for i, b in enumerate(self.prefix) if not b]

    def iter_members(self) -> Iterator[int]:
        for n in itertools.count():
            if self.kind == "finite" and n >= len(self.prefix):
                return
            if self.bit(n):
                yield n

    def _binop(self, other: "Selector", fn) -> "Selector":
        p = max(len(self.prefix), len(other.prefix))
        L = math.lcm(len(self.period), len(other.period))
        prefix = tuple(fn(self.bit(n), other.bit(n)) for n in range(p))
        period = tuple(fn(self.bit(p + j), other.bit(p + j)) for j in range(L))
        return Selector(prefix, period)

    def __and__(self, other: "Selector") -> "Selector":
        return self._binop(other, lambda x, y: x & y)

    def __or__(self, other: "Selector") -> "Selector":
        return self._binop(other, lambda x, y: x | y)

    def __invert__(self) -> "Selector":
        return Selector(tuple(1 - b for b in self.prefix), tuple(1 - b for b in self.period))

    def shift(self, k: int) -> "Selector":
        """The selector n -> self(n + k)."""
        p = max(len(self.prefix) - k, 0)
        return Selector(tuple(self.bit(k + n) for n in range(p)),
                        tuple(self.bit(k + p + j) for j in range(len(self.period))))

    def weighted_sum(self, term, tail_start: int, tail_coef: Fraction, ratio: Fraction) -> Fraction:
        """Exact sum over members n of ``term(n)`` (n < tail_start) or
        ``tail_coef * ratio**n`` (n >= tail_start)."""
        p, L = len(self.prefix), len(self.period)
        q = max(p, tail_start)
        q += (p - q) % L
        total = Fraction(0)
        for n in range(q):
            if self.bit(n):
                total += term(n) if n < tail_start else tail_coef * ratio ** n
        block = sum((ratio ** j for j in range(L) if self.period[j]), Fraction(0))
        return total + tail_coef * ratio ** q * block / (1 - ratio ** L)

    def __str__(self) -> str:
        return "".join(map(str, self.prefix)) + ":" + "".join(map(str, self.period))


# -- spine measures ------------------------------------------------------------


@dataclass(frozen=True)
class SpineMeasure:
    head: str
    period: str
    explicit: tuple[tuple[int, Fraction], ...]
    limit: Fraction
    coef: Fraction
    ratio: Fraction
    start: int

    def __post_init__(self):
        _bits(self.head)
        if not self.period:
            raise ValueError("spine period must be nonempty")
        _bits(self.period)
        explicit = tuple(sorted((int(n), Fraction(v)) for n, v in dict(self.explicit).items()))
        object.__setattr__(self, "explicit", explicit)
        for name in ("limit", "coef", "ratio"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        a, b, g = self.limit, self.coef, self.ratio
        if self.start < 0:
            raise ValueError("tail start must be nonnegative")
        if a < 0:
            raise ValueError("tail limit must be nonnegative")
        if not 0 < g < 1:
            raise ValueError("tail ratio must lie in (0, 1)")
        if b <= 0:
            raise ValueError("tail coefficient must be positive for strictly decreasing masses")
        if a + b > 1:
            raise ValueError("limit + coef must not exceed 1")
        table = dict(explicit)
        for n, v in explicit:
            if n >= self.start and v != a + b * g ** n:
                raise ValueError(f"explicit m_{n} = {v} disagrees with the tail formula")
        missing = [n for n in range(self.start) if n not in table]
        if missing:
            raise ValueError(f"explicit masses missing for n = {missing}")
        if self.cyl(0) != 1:
            raise ValueError(f"m_0 = {self.cyl(0)}, must be 1")
        for n in range(self.start + 1):
            if not 0 < self.cyl(n + 1) < self.cyl(n):
                raise ValueError(f"spine masses not strictly decreasing at n = {n}")

    @classmethod
    def lebesgue(cls, head: str = "", period: str = "0") -> "SpineMeasure":
        return cls(head, period, (), Fraction(0), Fraction(1), Fraction(1, 2), 0)

    @classmethod
    def geometric(cls, limit, coef, ratio, head: str = "", period: str = "0") -> "SpineMeasure":
        return cls(head, period, (), Fraction(limit), Fraction(coef), Fraction(ratio), 0)

    def cyl(self, n: int) -> Fraction:
        """Mass of the spine cylinder of length n."""
        if n < self.start:
            return dict(self.explicit)[n]
        return self.limit + self.coef * self.ratio ** n

    def piece(self, n: int) -> Fraction:
        return self.cyl(n) - self.cyl(n + 1)

    def spine_bit(self, i: int) -> str:
        if i < len(self.head):
            return self.head[i]
        return self.period[(i - len(self.head)) % len(self.period)]

    def spine_prefix(self, n: int) -> str:
        return "".join(self.spine_bit(i) for i in range(n))

    def on_spine(self, path: str) -> bool:
        return all(path[i] == self.spine_bit(i) for i in range(len(path)))

    def cylinder_mass(self, path: str) -> Fraction:
        k = 0
        while k < len(path) and path[k] == self.spine_bit(k):
            k += 1
        if k == len(path):
            return self.cyl(k)
        return self.piece(k) / 2 ** (len(path) - k - 1)

    def clopen_mass(self, c: Clopen) -> Fraction:
        return sum((self.cylinder_mass(p) for p in c.cylinders), Fraction(0))

    # canonical partition of a cylinder

    def axis_bit(self, cyl: str, i: int) -> str:
        return self.spine_bit(i) if self.on_spine(cyl) else "0"

    def piece_path(self, cyl: str, i: int) -> str:
        """Path of piece i of the canonical partition of [cyl]."""
        n = len(cyl)
        axis = "".join(self.axis_bit(cyl, n + j) for j in range(i + 1))
        return cyl + axis[:-1] + ("1" if axis[-1] == "0" else "0")

    def axis_is_good(self, cyl: str) -> bool:
        return not self.on_spine(cyl) or self.limit == 0

    def axis_is_binary(self, cyl: str) -> bool:
        """Canonical pieces of [cyl] have masses mass(cyl) / 2**(i+1)."""
        if not self.on_spine(cyl):
            return True
        return self.limit == 0 and self.ratio == Fraction(1, 2) and len(cyl) >= self.start

    def block_sum(self, cyl: str, sel: Selector) -> Fraction:
        """Sum of the masses of the selected canonical pieces of [cyl]."""
        if not self.on_spine(cyl):
            half = self.cylinder_mass(cyl) / 2
            return sel.weighted_sum(None, 0, half, Fraction(1, 2))
        n = len(cyl)
        g = self.ratio
        return sel.weighted_sum(lambda i: self.piece(n + i), max(self.start - n, 0),
                                self.coef * g ** n * (1 - g), g)


def lebesgue_spine() -> SpineMeasure:
    return SpineMeasure.lebesgue()


def nu_spine() -> SpineMeasure:
    """Spine measure whose spine pieces have masses 2**-(n+2)."""
    return SpineMeasure.geometric(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))


def spine_cyl(mu: SpineMeasure, n: int) -> Fraction:
    return mu.cyl(n)


def piece_measure(mu: SpineMeasure, n: int) -> Fraction:
    return mu.piece(n)


# -- partitions ----------------------------------------------------------------


@dataclass(frozen=True)
class SpinePartition:
    """The spine partition of a measure, optionally refined finitely.

    ``splits`` maps a piece index to a finite partition of that piece into
    cylinders.
    """

    base: SpineMeasure
    splits: tuple[tuple[int, tuple[str, ...]], ...] = ()

    def __post_init__(self):
        splits = tuple(sorted((int(n), tuple(paths)) for n, paths in dict(self.splits).items()))
        object.__setattr__(self, "splits", splits)
        for n, paths in splits:
            piece = Clopen([self.piece_path(n)])
            parts = [Clopen([p]) for p in paths]
            union = Clopen()
            for part in parts:
                if not (union & part).is_empty():
                    raise ValueError(f"refinement of piece {n} is not disjoint")
                union = union | part
            if union != piece:
                raise ValueError(f"refinement of piece {n} does not cover it")

    def piece_path(self, n: int) -> str:
        return self.base.piece_path("", n)

    def pieces(self, count: int) -> list[str]:
        out = []
        refined = dict(self.splits)
        for n in range(count):
            out += list(refined.get(n, (self.piece_path(n),)))
        return out


def partition_total(mu: SpineMeasure, part: SpinePartition) -> tuple[Fraction, bool]:
    """Closed-form sum of the masses of all pieces, and whether it equals 1."""
    refined = dict(part.splits)
    total = mu.cyl(0) - mu.limit
    for n, paths in refined.items():
        total += sum((mu.cylinder_mass(p) for p in paths), Fraction(0)) - mu.piece(n)
    return total, total == 1


def inner_outer(mu: SpineMeasure, part: SpinePartition, sel: Selector) -> tuple[Fraction, Fraction, bool]:
    """Inner and outer measure of the join of the selected spine pieces.

    Finite and cofinite joins are clopen, so both values are its mass.
    """
    if part.base != mu:
        raise ValueError("partition is not built over this measure")
    pieces_sum = lambda s: s.weighted_sum(mu.piece, mu.start, mu.coef * (1 - mu.ratio), mu.ratio)
    if sel.kind == "finite":
        value = sum((mu.piece(n) for n in sel.members()), Fraction(0))
        return value, value, True
    if sel.kind == "cofinite":
        value = 1 - sum((mu.piece(n) for n in sel.omitted()), Fraction(0))
        return value, value, True
    inner = pieces_sum(sel)
    outer = 1 - pieces_sum(~sel)
    return inner, outer, inner == outer


# -- Jordan elements -----------------------------------------------------------


@dataclass(frozen=True)
class JordanElement:
    clopen: Clopen
    blocks: tuple[tuple[str, Selector], ...]
    measure: Fraction

    def is_empty(self) -> bool:
        return self.clopen.is_empty() and not self.blocks

    def all_blocks(self) -> list[Block]:
        return [(c, None) for c in self.clopen.cylinders] + list(self.blocks)

    def lines(self) -> list[str]:
        out = [f"block {c or '-'} sel :1" for c in self.clopen.cylinders]
        out += [f"block {c or '-'} sel {sel}" for c, sel in self.blocks]
        out.append(f"measure {self.measure}")
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def _is_prefix(p: str, q: str) -> bool:
    return q.startswith(p)


class JordanAlgebra:
    """Boolean operations on block unions for one spine measure."""

    def __init__(self, mu: SpineMeasure):
        self.mu = mu

    # construction

    def element(self, blocks: Iterable[Block]) -> JordanElement:
        mu = self.mu
        cyls: list[str] = []
        infinite: dict[str, Selector] = {}
        pending = list(blocks)
        while pending:
            c, sel = pending.pop()
            if sel is None:
                cyls.append(c)
            elif sel.kind == "finite":
                cyls += [mu.piece_path(c, i) for i in sel.members()]
            elif sel.kind == "cofinite":
                rest = Clopen([c]) - Clopen(mu.piece_path(c, i) for i in sel.omitted())
                cyls += rest.cylinders
            elif c in infinite:
                merged = infinite.pop(c) | sel
                pending.append((c, merged))
            else:
                infinite[c] = sel
        for c in infinite:
            if not mu.axis_is_good(c):
                raise NotRepresentable(
                    f"block at [{c}] selects from a partition that is not good; not a Jordan element"
                )
        clopen = Clopen(cyls)
        ordered = tuple(sorted(infinite.items(), key=lambda item: path_key(item[0])))
        measure = mu.clopen_mass(clopen) + sum(
            (mu.block_sum(c, sel) for c, sel in ordered), Fraction(0)
        )
        return JordanElement(clopen, ordered, measure)

    def from_clopen(self, c: Clopen) -> JordanElement:
        return self.element((p, None) for p in c.cylinders)

    def unit(self) -> JordanElement:
        return self.from_clopen(Clopen.unit())

    def empty(self) -> JordanElement:
        return self.from_clopen(Clopen.empty())

    # block algebra

    def _meet_cyl(self, block: Block, t: str) -> Block | None:
        c, sel = block
        if _is_prefix(t, c):
            return block
        if not _is_prefix(c, t):
            return None
        n = len(c)
        for i in range(len(t) - n):
            if t[n + i] != self.mu.axis_bit(c, n + i):
                # t lies inside piece i of c
                return (t, None) if sel is None or i in sel else None
        return (t, None if sel is None else sel.shift(len(t) - n))

    def _meet_blocks(self, b1: Block, b2: Block) -> Block | None:
        if len(b1[0]) > len(b2[0]):
            b1, b2 = b2, b1
        cut = self._meet_cyl(b1, b2[0])
        if cut is None:
            return None
        s1, s2 = cut[1], b2[1]
        if s1 is None:
            return b2
        if s2 is None:
            return cut
        return (b2[0], s1 & s2)

    def meet(self, x: JordanElement, y: JordanElement) -> JordanElement:
        out = []
        for b1 in x.all_blocks():
            for b2 in y.all_blocks():
                b = self._meet_blocks(b1, b2)
                if b is not None:
                    out.append(b)
        return self.element(out)

    def _complement_block(self, block: Block) -> JordanElement:
        c, sel = block
        outside = [(p, None) for p in (~Clopen([c])).cylinders]
        if sel is not None:
            outside.append((c, ~sel))
        return self.element(outside)

    def complement(self, x: JordanElement) -> JordanElement:
        result = self.unit()
        for block in x.all_blocks():
            result = self.meet(result, self._complement_block(block))
        return result

    def difference(self, x: JordanElement, y: JordanElement) -> JordanElement:
        if y.is_empty():
            return x
        return self.meet(x, self.complement(y))

    def join(self, x: JordanElement, y: JordanElement) -> JordanElement:
        return self.element(x.all_blocks() + self.difference(y, x).all_blocks())

    def leq(self, x: JordanElement, y: JordanElement) -> bool:
        return self.difference(x, y).is_empty()

    def disjoint(self, x: JordanElement, y: JordanElement) -> bool:
        return self.meet(x, y).is_empty()

    # carving

    def _greedy(self, pieces: Iterable[tuple[Block, Fraction]], r: Fraction) -> list[Block]:
        """Take whole pieces while they fit, carve the residue in the first one that does not."""
        out: list[Block] = []
        for steps, (block, mass) in enumerate(pieces):
            if steps > 10_000:
                raise NotRepresentable("greedy carving did not terminate")
            if mass <= r:
                out.append(block)
                r -= mass
                if r == 0:
                    return out
            else:
                return out + self._carve_block(block, r)
        raise NotRepresentable(f"residue {r} left after exhausting the pieces")

    def _spine_pieces(self, cyl: str, stop: int | None = None):
        n = len(cyl)
        for i in itertools.count() if stop is None else range(stop):
            yield (self.mu.piece_path(cyl, i), None), self.mu.piece(n + i)

    def _carve_block(self, block: Block, r: Fraction) -> list[Block]:
        c, sel = block
        mu = self.mu
        if sel is not None:
            total = mu.block_sum(c, sel)
            if r > total / 2:
                rest = self.element(self._carve_block(block, total - r))
                return self.difference(self.element([block]), rest).all_blocks()
            members = ((mu.piece_path(c, i), None) for i in sel.iter_members())
            return self._greedy(((b, mu.cylinder_mass(b[0])) for b in members), r)
        mass = mu.cylinder_mass(c)
        if not 0 < r < mass:
            raise OutOfRange(f"{r} not strictly between 0 and {mass}")
        if mu.axis_is_binary(c):
            return [(c, Selector.binary(r / mass))]
        n, a = len(c), mu.limit
        if a == 0 and r > mass / 2:
            # carve the smaller complement: the greedy run along the spine stays short
            rest = self.element(self._carve_block(block, mass - r))
            return self.difference(self.element([block]), rest).all_blocks()
        if r < mass - a:
            return self._greedy(self._spine_pieces(c), r)
        if r > a:
            k = n + 1
            while mu.cyl(k) > r:
                k += 1
            core = [(mu.spine_prefix(k), None)]
            rest = r - mu.cyl(k)
            if rest == 0:
                return core
            return core + self._greedy(self._spine_pieces(c, k - n), rest)
        raise NotRepresentable(
            f"no Jordan element below [{c}] has measure {r}: values in "
            f"[{mass - a}, {a}] are cut off by the mass {a} left on the spine"
        )

    def carve(self, x: Union[str, Clopen, JordanElement], eps: Fraction) -> JordanElement:
        """An element j <= x with measure exactly eps."""
        eps = Fraction(eps)
        if isinstance(x, str):
            x = self.from_clopen(Clopen([x]))
        elif isinstance(x, Clopen):
            x = self.from_clopen(x)
        if not 0 < eps < x.measure:
            raise OutOfRange(f"{eps} not strictly between 0 and {x.measure}")
        if eps > x.measure / 2:
            # masses reachable below x are symmetric about x.measure / 2
            return self.difference(x, self.carve(x, x.measure - eps))
        mu = self.mu
        spine = [b for b in x.all_blocks() if b[1] is None and mu.on_spine(b[0])]
        other = [b for b in x.all_blocks() if not (b[1] is None and mu.on_spine(b[0]))]
        other.sort(key=lambda b: (path_key(b[0]), b[1] is not None))
        masses = [self._block_mass(b) for b in other]
        fair_total = sum(masses, Fraction(0))
        if eps <= fair_total or not spine:
            return self.element(self._greedy(zip(other, masses), eps))
        (core,) = spine
        core_mass = mu.cylinder_mass(core[0])
        q = eps - fair_total
        try:
            blocks = self._carve_block(core, q) if q < core_mass else [core]
            return self.element(blocks + other)
        except NotRepresentable:
            pass
        a = mu.limit
        if eps >= core_mass:
            return self.element([core] + self._greedy(zip(other, masses), eps - core_mass))
        if a < eps:
            q = max(eps - fair_total, (a + eps) / 2)
        elif eps - fair_total < core_mass - a:
            q = (eps - fair_total + min(eps, core_mass - a)) / 2
        else:
            raise NotRepresentable(f"measure {eps} cannot be carved below the given element")
        blocks = self._carve_block(core, q)
        if eps - q > 0:
            blocks += self._greedy(zip(other, masses), eps - q)
        return self.element(blocks)

    def _block_mass(self, block: Block) -> Fraction:
        c, sel = block
        return self.mu.cylinder_mass(c) if sel is None else self.mu.block_sum(c, sel)

    def shallowest_fair_cylinder(self, x: JordanElement) -> str:
        mu = self.mu
        candidates = []
        for c, sel in x.all_blocks():
            if sel is None:
                candidates.append(mu.piece_path(c, 0) if mu.on_spine(c) else c)
            else:
                candidates.append(mu.piece_path(c, next(sel.iter_members())))
        if not candidates:
            raise ValueError("empty element has no fair cylinder")
        return min(candidates, key=path_key)


def carve(mu: SpineMeasure, x, eps: Fraction) -> JordanElement:
    return JordanAlgebra(mu).carve(x, eps)


def certified_measure(mu: SpineMeasure, x: JordanElement, precision: Fraction = Fraction(1, 2 ** 64)) -> RatInterval:
    """Enclosure of the measure of x from explicit partial sums of piece
    masses plus a bound on the unsummed remainder of each block."""
    lo = hi = sum((mu.cylinder_mass(c) for c in x.clopen.cylinders), Fraction(0))
    for c, sel in x.blocks:
        partial = Fraction(0)
        n = 0
        while True:
            remainder = mu.cylinder_mass(c + "".join(mu.axis_bit(c, len(c) + j) for j in range(n)))
            if remainder <= precision or n > 4096:
                break
            if n in sel:
                partial += mu.cylinder_mass(mu.piece_path(c, n))
            n += 1
        lo += partial
        hi += partial + remainder
    return RatInterval(lo, hi)


# -- the stage-wise isomorphism ------------------------------------------------


@dataclass
class IsoStage:
    level: int
    phi: dict
    target: Clopen | None = None
    anchor: str | None = None


@dataclass
class IsoTable:
    measure: SpineMeasure
    targets: list
    stages: list = field(default_factory=list)

    @property
    def final(self) -> IsoStage:
        return self.stages[-1]


def canonical_targets(count: int) -> list[Clopen]:
    """The first ``count`` cylinders in (length, lexicographic) order."""
    out = []
    for level in itertools.count():
        for p in paths_at(level):
            if len(out) == count:
                return out
            out.append(Clopen([p]))
    return out


def _block_count(phi: dict) -> int:
    return sum(len(x.all_blocks()) for x in phi.values())


def build_jordan_iso(
    mu: SpineMeasure,
    targets: Sequence[Clopen],
    stages: int,
    block_limit: int | None = None,
) -> IsoTable:
    """Run ``stages`` steps of the dyadic isomorphism construction.

    Stage k picks the lexicographically least ``s`` whose image meets target
    ``k``, carves ``y`` of measure ``2**-l`` in the shallowest fair cylinder
    of that meet, and refines the level-``m`` family to level ``l`` with
    ``phi(s + 0**(l-m)) = y``.
    """
    if stages > len(targets):
        raise ValueError(f"{stages} stages need {stages} targets, got {len(targets)}")
    limit = config.budget() if block_limit is None else block_limit
    alg = JordanAlgebra(mu)
    table = IsoTable(mu, list(targets))
    phi = {"": alg.unit()}
    level = 0
    table.stages.append(IsoStage(0, phi))
    for k in range(stages):
        d = targets[k]
        if d.is_empty():
            raise ValueError("targets must be nonempty")
        dj = alg.from_clopen(d)
        s = next(u for u in sorted(phi) if not alg.disjoint(phi[u], dj))
        site = alg.shallowest_fair_cylinder(alg.meet(phi[s], dj))
        site_mass = mu.cylinder_mass(site)
        new_level = level + 1
        while Fraction(1, 2 ** new_level) > site_mass:
            new_level += 1
        size = Fraction(1, 2 ** new_level)
        y = alg.from_clopen(Clopen([site])) if size == site_mass else alg.carve(site, size)
        steps = new_level - level
        new_phi = {}
        for u in sorted(phi):
            if u == s:
                parts = _chain(alg, phi[u], y, level, new_level)
            else:
                parts = _halve(alg, phi[u], level, steps)
            for suffix, x in parts.items():
                new_phi[u + suffix] = x
        phi, level = new_phi, new_level
        table.stages.append(IsoStage(level, phi, d, s + "0" * steps))
        if _block_count(phi) > limit:
            raise StageBudgetExceeded(f"{_block_count(phi)} blocks exceed the limit {limit}")
    return table


def _halve(alg: JordanAlgebra, x: JordanElement, level: int, steps: int) -> dict:
    if steps == 0:
        return {"": x}
    left = alg.carve(x, Fraction(1, 2 ** (level + 1)))
    right = alg.difference(x, left)
    out = {}
    for bit, part in (("0", left), ("1", right)):
        for suffix, piece in _halve(alg, part, level + 1, steps - 1).items():
            out[bit + suffix] = piece
    return out


def _chain(alg: JordanAlgebra, x: JordanElement, y: JordanElement, level: int, target_level: int) -> dict:
    if level == target_level:
        return {"": y}
    if level + 1 == target_level:
        inner = y
    else:
        extra = alg.carve(alg.difference(x, y), Fraction(1, 2 ** (level + 1)) - Fraction(1, 2 ** target_level))
        inner = alg.element(y.all_blocks() + extra.all_blocks())
    sibling = alg.difference(x, inner)
    out = {"0" + k: v for k, v in _chain(alg, inner, y, level + 1, target_level).items()}
    out.update({"1" + k: v for k, v in _halve(alg, sibling, level + 1, target_level - level - 1).items()})
    return out


def check_iso_table(table: IsoTable) -> dict[str, bool]:
    """Independently re-check the four invariants of every stage."""
    alg = JordanAlgebra(table.measure)
    ok = {"dyadic": True, "partition": True, "refinement": True, "density": True}
    prev: IsoStage | None = None
    for index, stage in enumerate(table.stages):
        phi, level = stage.phi, stage.level
        if sorted(phi) != paths_at(level):
            ok["partition"] = False
        if any(x.measure != Fraction(1, 2 ** level) for x in phi.values()):
            ok["dyadic"] = False
        union = alg.empty()
        for t in sorted(phi):
            if not alg.disjoint(union, phi[t]):
                ok["partition"] = False
            union = alg.element(union.all_blocks() + phi[t].all_blocks())
        if not alg.complement(union).is_empty():
            ok["partition"] = False
        if prev is not None:
            for t, x in phi.items():
                if not alg.leq(x, prev.phi[t[: prev.level]]):
                    ok["refinement"] = False
        for earlier in table.stages[1 : index + 1]:
            dj = alg.from_clopen(earlier.target)
            below = [t for t in sorted(phi) if t.startswith(earlier.anchor)] + sorted(phi)
            if not any(alg.leq(phi[t], dj) for t in below):
                ok["density"] = False
        prev = stage
    return ok


# -- small partitions ----------------------------------------------------------


@dataclass(frozen=True)
class SmallPartitionCertificate:
    disjoint: bool
    dense_depth: int
    dense: bool

    @property
    def passed(self) -> bool:
        return self.disjoint and self.dense


def certify_pieces(pieces: Sequence[str], depth: int) -> SmallPartitionCertificate:
    ordered = sorted(pieces)
    disjoint = all(not b.startswith(a) for a, b in zip(ordered, ordered[1:]))
    dense = all(any(p.startswith(t) or t.startswith(p) for p in pieces) for t in paths_at(depth))
    return SmallPartitionCertificate(disjoint, depth, dense)


def small_partition(mu: SpineMeasure, eps: Fraction, cert_depth: int):
    """A partition of unity in the Cohen algebra into cylinders of small total mass.

    Stage j places, inside every depth-j cylinder not yet touched, one
    cylinder of mass at most ``eps / 4**(j+1)``. Stages past ``cert_depth``
    are bounded in closed form. Returns ``(pieces, total_bound, certificate)``.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise OutOfRange("eps must be positive")
    check_path("0" * cert_depth)
    if eps > 1:
        return [""], Fraction(1), certify_pieces([""], cert_depth)
    pieces: list[str] = []
    chosen: set[str] = set()
    touched: set[str] = set()
    for j in range(cert_depth + 1):
        threshold = eps / 4 ** (j + 1)
        for t in paths_at(j):
            if t in touched or any(t[:i] in chosen for i in range(len(t) + 1)):
                continue
            p = t
            while mu.cylinder_mass(p) > threshold:
                left, right = mu.cylinder_mass(p + "0"), mu.cylinder_mass(p + "1")
                p += "1" if right < left else "0"
            check_path(p)
            pieces.append(p)
            chosen.add(p)
            touched.update(p[:i] for i in range(len(p) + 1))
    emitted = sum((mu.cylinder_mass(p) for p in pieces), Fraction(0))
    future = eps / 4 / 2 ** cert_depth
    return pieces, emitted + future, certify_pieces(pieces, cert_depth)
