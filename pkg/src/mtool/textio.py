"""Line-oriented text formats and the clopen expression grammar.

Every file is a sequence of ``directive args`` lines; ``#`` starts a
comment. The first directive ``kind <name>`` selects the object type unless
the caller fixes it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .algebra import Clopen, FiniteMeasure, fmt_rat, path_key
from .codings import M_KIND, STRICT, IdealSpec, WeightFn
from .errors import ParseError, ValidationError
from .jordan import Selector, SpineMeasure
from .kelley import FamilySpec

InputObject = Union[WeightFn, IdealSpec, SpineMeasure, FiniteMeasure, FamilySpec, Selector]

KINDS = ("weight", "M", "ideal", "spine", "measure", "family", "selector")

_RAT = re.compile(r"-?\d+(?:/\d+)?\Z")
_BITS = re.compile(r"[01]*\Z")


@dataclass
class _Token:
    text: str
    line: int
    column: int


class _Line:
    def __init__(self, number: int, raw: str):
        self.number = number
        self.tokens = [
            _Token(m.group(), number, m.start() + 1)
            for m in re.finditer(r"\S+", raw.split("#", 1)[0])
        ]

    @property
    def directive(self) -> _Token:
        return self.tokens[0]

    def args(self, count: int | None = None) -> list[_Token]:
        args = self.tokens[1:]
        if count is not None and len(args) != count:
            raise ParseError(f"{self.directive.text} takes {count} argument(s), got {len(args)}",
                             self.number, self.directive.column)
        return args


def _rat(tok: _Token) -> Fraction:
    if not _RAT.match(tok.text):
        raise ParseError(f"not a rational: {tok.text!r}", tok.line, tok.column)
    if tok.text.endswith("/0"):
        raise ParseError("zero denominator", tok.line, tok.column)
    return Fraction(tok.text)


def _int(tok: _Token) -> int:
    if not tok.text.isdigit():
        raise ParseError(f"not a natural number: {tok.text!r}", tok.line, tok.column)
    return int(tok.text)


def _path(tok: _Token, root: bool = True) -> str:
    text = tok.text
    if root and text == "-":
        return ""
    if not text or not _BITS.match(text):
        raise ParseError(f"path must be over {{0,1}}: {text!r}", tok.line, tok.column)
    return text


# -- clopen expressions --------------------------------------------------------

_EXPR_TOKEN = re.compile(r"\s*(?:(\[[01]*\])|(\{\})|([~+*(),]))")


def _lex_expr(text: str, line: int = 0, column: int = 1) -> list[_Token]:
    out, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _EXPR_TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected {text[start:start + 8]!r} in expression", line, column + start)
        tok = m.group(m.lastindex)
        out.append(_Token(tok, line, column + m.start(m.lastindex)))
        pos = m.end()
    return out


class _ExprParser:
    """``union := meet ('+' meet)*``, ``meet := unary ('*' unary)*``,
    ``unary := '~' unary | '[bits]' | '{}' | '(' union ')'``."""

    def __init__(self, tokens: list[_Token], line: int, end_column: int):
        self.tokens, self.pos = tokens, 0
        self.line, self.end_column = line, end_column

    def peek(self) -> str | None:
        return self.tokens[self.pos].text if self.pos < len(self.tokens) else None

    def fail(self, message: str):
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            raise ParseError(message, tok.line, tok.column)
        raise ParseError(message, self.line, self.end_column)

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def union(self) -> Clopen:
        value = self.meet()
        while self.peek() == "+":
            self.take()
            value = value | self.meet()
        return value

    def meet(self) -> Clopen:
        value = self.unary()
        while self.peek() == "*":
            self.take()
            value = value & self.unary()
        return value

    def unary(self) -> Clopen:
        head = self.peek()
        if head is None:
            self.fail("expression ends early")
        if head == "~":
            self.take()
            return ~self.unary()
        if head == "(":
            self.take()
            value = self.union()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.take()
            return value
        if head == "{}":
            self.take()
            return Clopen.empty()
        if head.startswith("["):
            tok = self.take()
            try:
                return Clopen([tok.text[1:-1]])
            except ValueError as exc:
                raise ParseError(str(exc), tok.line, tok.column) from None
        self.fail(f"unexpected {head!r}")


def parse_exprs(text: str, line: int = 0, column: int = 1) -> list[Clopen]:
    """Comma-separated clopen expressions, e.g. ``"[0]+[11], ~[1]"``."""
    tokens = _lex_expr(text, line, column)
    parser = _ExprParser(tokens, line, column + len(text))
    out = [parser.union()]
    while parser.peek() == ",":
        parser.take()
        out.append(parser.union())
    if parser.peek() is not None:
        parser.fail(f"unexpected {parser.peek()!r}")
    return out


def parse_expr(text: str, line: int = 0, column: int = 1) -> Clopen:
    values = parse_exprs(text, line, column)
    if len(values) != 1:
        raise ParseError("expected a single expression", line, column)
    return values[0]


# -- files ---------------------------------------------------------------------


def parse(text: str, kind: str | None = None) -> InputObject:
    """Parse and validate one object; ``kind`` overrides or checks the ``kind`` line."""
    lines = [ln for ln in (_Line(i, raw) for i, raw in enumerate(text.splitlines(), 1)) if ln.tokens]
    if lines and lines[0].directive.text == "kind":
        (tok,) = lines[0].args(1)
        if tok.text not in KINDS:
            raise ParseError(f"unknown kind {tok.text!r}", tok.line, tok.column)
        if kind is not None and tok.text != kind:
            raise ParseError(f"expected kind {kind}, found {tok.text}", tok.line, tok.column)
        kind, lines = tok.text, lines[1:]
    if kind is None:
        raise ParseError("missing 'kind' line", 1, 1)
    if kind not in KINDS:
        raise ParseError(f"unknown kind {kind!r}", 1, 1)
    reader = _READERS["weight" if kind == "M" else kind]
    try:
        return reader(lines, kind)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _directives(lines, allowed: dict[str, bool]) -> dict[str, list[_Line]]:
    """Group lines by directive; ``allowed`` maps directive -> may repeat."""
    seen: dict[str, list[_Line]] = {}
    for ln in lines:
        name = ln.directive.text
        if name not in allowed:
            raise ParseError(f"unknown directive {name!r}", ln.number, ln.directive.column)
        if name in seen and not allowed[name]:
            raise ParseError(f"duplicate directive {name!r}", ln.number, ln.directive.column)
        seen.setdefault(name, []).append(ln)
    return seen


def _required(seen, name: str) -> _Line:
    if name not in seen:
        raise ParseError(f"missing '{name}' line", 0, 0)
    return seen[name][0]


def _read_weight(lines, kind: str) -> WeightFn:
    seen = _directives(lines, {"depth": False, "default": False, "w": True})
    depth = _int(_required(seen, "depth").args(1)[0])
    default = _rat(seen["default"][0].args(1)[0]) if "default" in seen else Fraction(1, 2)
    table: dict[str, Fraction] = {}
    for ln in seen.get("w", []):
        path_tok, value_tok = ln.args(2)
        path = _path(path_tok)
        if path in table:
            raise ParseError(f"node {path_tok.text} listed twice", ln.number, path_tok.column)
        if len(path) >= depth:
            raise ValidationError(f"node [{path}] is not above depth {depth}", ln.number)
        table[path] = _rat(value_tok)
        if kind != M_KIND and not 0 < table[path] < 1:
            raise ValidationError(f"weight {table[path]} at {path_tok.text} outside (0, 1)", ln.number)
    return WeightFn(depth, table, default, M_KIND if kind == M_KIND else STRICT)


def _read_ideal(lines, kind: str) -> IdealSpec:
    seen = _directives(lines, {"depth": False, "gen": True})
    depth = _int(_required(seen, "depth").args(1)[0])
    gens = tuple(_path(ln.args(1)[0]) for ln in seen.get("gen", []))
    ideal = IdealSpec(depth, gens)
    if not ideal.is_proper():
        raise ValidationError("improper ideal: the generators cover the unit")
    return ideal


def _read_spine(lines, kind: str) -> SpineMeasure:
    seen = _directives(lines, {"spine-head": False, "spine-period": False, "cyl": True, "tail": False})
    head = _path(seen["spine-head"][0].args(1)[0]) if "spine-head" in seen else ""
    period = _path(_required(seen, "spine-period").args(1)[0], root=False)
    explicit: dict[int, Fraction] = {}
    cyl_lines: dict[int, int] = {}
    for ln in seen.get("cyl", []):
        n_tok, v_tok = ln.args(2)
        n = _int(n_tok)
        if n in explicit:
            raise ParseError(f"cyl {n} listed twice", ln.number, n_tok.column)
        explicit[n], cyl_lines[n] = _rat(v_tok), ln.number
    tail = _required(seen, "tail")
    args = tail.args(8)
    for tok, word in zip(args[0::2], ("limit", "coef", "ratio", "from")):
        if tok.text != word:
            raise ParseError(f"expected {word!r}", tok.line, tok.column)
    a, b, g = (_rat(t) for t in args[1:6:2])
    start = _int(args[7])
    for n, v in explicit.items():
        if n >= start and v != a + b * g ** n:
            raise ValidationError(f"explicit m_{n} = {v} disagrees with the tail formula", cyl_lines[n])
    return SpineMeasure(head, period, tuple(explicit.items()), a, b, g, start)


def _read_measure(lines, kind: str) -> FiniteMeasure:
    seen = _directives(lines, {"depth": False, "atoms": True})
    depth = _int(_required(seen, "depth").args(1)[0])
    atoms = [_rat(t) for ln in seen.get("atoms", []) for t in ln.args()]
    return FiniteMeasure(depth, tuple(atoms))


def _read_family(lines, kind: str) -> FamilySpec:
    seen = _directives(lines, {"depth": False, "set": True})
    sets = []
    for ln in seen.get("set", []):
        if len(ln.tokens) < 2:
            raise ParseError("set needs an expression", ln.number, ln.directive.column)
        start = ln.tokens[1].column
        raw = " ".join(t.text for t in ln.tokens[1:])
        sets.append(parse_expr(raw, ln.number, start))
    if not sets:
        raise ValidationError("family has no members")
    if "depth" in seen:
        return FamilySpec(tuple(sets), _int(seen["depth"][0].args(1)[0]))
    return FamilySpec.of(sets)


def _read_selector(lines, kind: str) -> Selector:
    seen = _directives(lines, {"sel": False})
    ln = _required(seen, "sel")
    (tok,) = ln.args(1)
    if tok.text.count(":") != 1 or not all(_BITS.match(part) for part in tok.text.split(":")):
        raise ParseError(f"selector must be <bits>:<bits>: {tok.text!r}", tok.line, tok.column)
    if tok.text.endswith(":"):
        raise ParseError("selector period must be nonempty", tok.line, tok.column)
    return Selector.parse(tok.text)


_READERS = {
    "weight": _read_weight,
    "ideal": _read_ideal,
    "spine": _read_spine,
    "measure": _read_measure,
    "family": _read_family,
    "selector": _read_selector,
}


# -- rendering -----------------------------------------------------------------


def render(obj: InputObject) -> str:
    if isinstance(obj, WeightFn):
        lines = [f"kind {'M' if obj.kind == M_KIND else 'weight'}", f"depth {obj.depth}",
                 f"default {fmt_rat(obj.default)}"]
        lines += [f"w {p or '-'} {fmt_rat(v)}" for p, v in sorted(obj.table.items(), key=lambda i: path_key(i[0]))]
    elif isinstance(obj, IdealSpec):
        lines = ["kind ideal", f"depth {obj.depth}"] + [f"gen {p or '-'}" for p in obj.generators]
    elif isinstance(obj, SpineMeasure):
        lines = ["kind spine", f"spine-head {obj.head or '-'}", f"spine-period {obj.period}"]
        lines += [f"cyl {n} {fmt_rat(v)}" for n, v in obj.explicit]
        lines.append(f"tail limit {fmt_rat(obj.limit)} coef {fmt_rat(obj.coef)} "
                     f"ratio {fmt_rat(obj.ratio)} from {obj.start}")
    elif isinstance(obj, FiniteMeasure):
        lines = ["kind measure", f"depth {obj.depth}", "atoms " + " ".join(map(fmt_rat, obj.atoms))]
    elif isinstance(obj, FamilySpec):
        lines = ["kind family", f"depth {obj.depth}"] + [f"set {render_clopen(c)}" for c in obj.sets]
    elif isinstance(obj, Selector):
        lines = ["kind selector", f"sel {obj}"]
    else:
        raise TypeError(f"cannot render {type(obj).__name__}")
    return "\n".join(lines) + "\n"


def render_clopen(c: Clopen) -> str:
    """Expression form that :func:`parse_expr` reads back."""
    if c.is_empty():
        return "{}"
    return "+".join(f"[{p}]" for p in c.cylinders)
