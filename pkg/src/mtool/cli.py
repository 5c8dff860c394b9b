"""The ``mtool`` command line."""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import algebra, codings, jordan, kelley
from .algebra import FiniteMeasure, fmt_rat
from .codings import WeightFn
from .errors import (
    BudgetExceeded,
    DepthExceeded,
    DepthMismatch,
    ImproperIdeal,
    MtoolError,
    NotAnIsometry,
    NotRepresentable,
    NotStrictlyPositive,
    OutOfRange,
    ParseError,
    RangeMismatch,
    ValidationError,
)
from .textio import parse, parse_exprs, render, render_clopen

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_LIMIT = 0, 2, 3, 4

_EXIT_FOR = (
    (ParseError, EXIT_USAGE),
    (BudgetExceeded, EXIT_LIMIT),
    (DepthExceeded, EXIT_LIMIT),
    (NotRepresentable, EXIT_LIMIT),
    (ValidationError, EXIT_INVALID),
    (DepthMismatch, EXIT_INVALID),
    (NotStrictlyPositive, EXIT_INVALID),
    (OutOfRange, EXIT_INVALID),
    (ImproperIdeal, EXIT_INVALID),
    (NotAnIsometry, EXIT_INVALID),
)


@dataclass
class Report:
    command: list[str]
    lines: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    exit_code: int = EXIT_OK

    @property
    def stdout(self) -> str:
        return "".join(line + "\n" for line in self.lines)

    @property
    def stderr(self) -> str:
        return "".join(line + "\n" for line in self.errors)


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _rat(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational: {text!r}") from None


def _load(path: str, kind: str | None = None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse(text, kind)


def _load_measure(path: str, depth: int | None) -> FiniteMeasure:
    obj = _load(path)
    if isinstance(obj, WeightFn):
        if depth is not None:
            obj = obj.with_depth(depth)
        return codings.measure_from_weights(obj)
    if isinstance(obj, FiniteMeasure):
        return obj if depth is None else obj.coarsen(depth)
    raise ValidationError(f"{path} holds no measure")


def _load_weight(path: str, depth: int | None) -> WeightFn:
    obj = _load(path)
    if not isinstance(obj, WeightFn):
        raise ValidationError(f"{path} holds no weight function")
    return obj if depth is None else obj.with_depth(depth)


def _load_family(args) -> kelley.FamilySpec:
    if args.sets is not None:
        sets = parse_exprs(args.sets)
        if any(c.is_empty() for c in sets):
            raise ValidationError("family members must be nonempty")
        return kelley.FamilySpec.of(sets)
    if args.family is not None:
        return _load(args.family, "family")
    raise ParseError("give --sets or --family")


# -- subcommands ---------------------------------------------------------------


def cmd_eval(args, out):
    m = _load_measure(args.measure, args.depth)
    out.append(fmt_rat(algebra.measure_eval(m, parse_exprs(args.expr)[0])))


def cmd_dist(args, out):
    m = _load_measure(args.measure, args.depth)
    a, b = parse_exprs(args.a)[0], parse_exprs(args.b)[0]
    out.append(fmt_rat(algebra.fn_dist(m, a, b)))


def cmd_equiv(args, out):
    if args.rel == "iso":
        f, g = _load_measure(args.f, args.depth), _load_measure(args.g, args.depth)
        verdict, perm = algebra.metric_iso_finite(f, g)
        out.append(_bool(verdict))
        if verdict:
            out.append("perm " + " ".join(str(perm[i]) for i in sorted(perm)))
        return
    f, g = _load_weight(args.f, args.depth), _load_weight(args.g, args.depth)
    if args.rel == "c":
        verdict, swaps = codings.equiv_c(f, g)
        out.append(_bool(verdict))
        if verdict:
            out.append("swaps " + (" ".join(s or "-" for s in sorted(swaps, key=algebra.path_key)) or "none"))
    elif args.rel == "m":
        out.append(_bool(codings.equiv_m(f, g)))
    else:
        out.append(_bool(codings.equiv_z_depth(f, g)))


def cmd_range(args, out):
    m = _load_measure(args.measure, None)
    code, verdict = codings.range_code(m, args.depth if args.depth is not None else m.depth)
    for level, values in enumerate(code.per_level, 1):
        out.append(f"level {level} " + " ".join(map(fmt_rat, values)))
    out.append("values " + " ".join(map(fmt_rat, code.values)))
    out.append(f"intertwining {_bool(verdict)}")


def cmd_iso_from_ranges(args, out):
    f, g = _load_measure(args.f, None), _load_measure(args.g, None)
    try:
        witness = codings.iso_from_ranges(f, g, args.depth if args.depth is not None else f.depth)
    except RangeMismatch as exc:
        out.append(f"range-mismatch {fmt_rat(exc.value)}")
        return
    for s in sorted(witness.table, key=algebra.path_key):
        out.append(f"map {s or '-'} {render_clopen(witness.table[s])}")
    out.append(f"depth-reached {witness.depth_reached}")


def cmd_encode_ideal(args, out):
    ideal = _load(args.ideal, "ideal")
    out.extend(render(codings.encode_ideal(ideal)).splitlines())


def cmd_psi(args, out):
    code = codings.psi_encode(_load_weight(args.f, args.depth), args.bits)
    out.append(code.canonical)
    out.append(f"size {code.size}")


def cmd_kelley(args, out):
    family = _load_family(args)
    result = kelley.kelley(family, args.nmax, args.mode, args.budget, args.workers)
    if result.lp_value is not None:
        out.append(f"lp {fmt_rat(result.lp_value)}")
        out.append("witness " + " ".join(map(fmt_rat, result.witness.atoms)))
    for n, k in result.kn_table:
        out.append(f"k {n} {k}")
    if result.bf_upper_bound is not None:
        out.append(f"bound {fmt_rat(result.bf_upper_bound)}")


def cmd_defects(args, out):
    m = _load_measure(args.measure, args.depth)
    # candidates may include the empty set, unlike a Kelley family
    if args.sets is not None:
        family = parse_exprs(args.sets)
    elif args.family is not None:
        family = list(_load(args.family, "family").sets)
    else:
        family = []
    symmetric, uniform = algebra.density_defects(m, family, args.budget)
    out.append(f"symmetric {fmt_rat(symmetric)}")
    out.append(f"uniform {fmt_rat(uniform)}")


def _spine(args) -> jordan.SpineMeasure:
    return _load(args.spine, "spine")


def cmd_jordan(args, out):
    mu = _spine(args)
    alg = jordan.JordanAlgebra(mu)
    if args.action == "member":
        if args.sel is None:
            raise ParseError("jordan member needs --sel")
        try:
            sel = jordan.Selector.parse(args.sel)
        except ValueError as exc:
            raise ParseError(str(exc)) from None
        inner, outer, member = jordan.inner_outer(mu, jordan.SpinePartition(mu), sel)
        out += [f"inner {fmt_rat(inner)}", f"outer {fmt_rat(outer)}", f"member {_bool(member)}"]
    elif args.action == "carve":
        if args.eps is None:
            raise ParseError("jordan carve needs --eps")
        x = args.cyl if args.cyl is not None else ""
        out.extend(alg.carve(x if x != "-" else "", _rat(args.eps)).lines())
    elif args.action == "iso":
        targets = parse_exprs(args.targets) if args.targets else jordan.canonical_targets(args.stages)
        table = jordan.build_jordan_iso(mu, targets, args.stages, args.budget)
        for k, stage in enumerate(table.stages):
            line = f"stage {k} level {stage.level} blocks {jordan._block_count(stage.phi)}"
            if stage.target is not None:
                line += f" target {render_clopen(stage.target)} at {stage.anchor or '-'}"
            out.append(line)
        for name, ok in jordan.check_iso_table(table).items():
            out.append(f"invariant {name} {_bool(ok)}")
    else:
        if args.eps is None:
            raise ParseError("jordan smallpart needs --eps")
        pieces, bound, cert = jordan.small_partition(mu, _rat(args.eps), args.cert_depth)
        out.append("pieces " + " ".join(p or "-" for p in pieces))
        out.append(f"bound {fmt_rat(bound)}")
        out.append(f"certificate {_bool(cert.passed)}")


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mtool", description="Exact computations with measures on the Cantor algebra.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--depth", type=int, default=None, help="truncation depth")
        sp.add_argument("--budget", type=int, default=None, help="bound on enumeration sizes")
        return sp

    sp = add("eval", cmd_eval, "measure of a clopen expression")
    sp.add_argument("-m", "--measure", required=True)
    sp.add_argument("-e", "--expr", required=True)

    sp = add("dist", cmd_dist, "Frechet-Nikodym distance of two expressions")
    sp.add_argument("-m", "--measure", required=True)
    sp.add_argument("-a", required=True)
    sp.add_argument("-b", required=True)

    sp = add("equiv", cmd_equiv, "decide one of the equivalence relations")
    sp.add_argument("--rel", choices=["c", "m", "z", "iso"], required=True)
    sp.add_argument("-f", required=True)
    sp.add_argument("-g", required=True)

    sp = add("range", cmd_range, "hat-value range code and intertwining check")
    sp.add_argument("-m", "--measure", required=True)

    sp = add("iso-from-ranges", cmd_iso_from_ranges, "tree map from matching hat-values")
    sp.add_argument("-f", required=True)
    sp.add_argument("-g", required=True)

    sp = add("encode-ideal", cmd_encode_ideal, "measure coding of an ideal")
    sp.add_argument("-i", "--ideal", required=True)

    sp = add("psi", cmd_psi, "tree coding of a weight function")
    sp.add_argument("-f", required=True)
    sp.add_argument("--bits", type=int, default=8)

    for name, func, help_text in (("kelley", cmd_kelley, "intersection number of a family"),
                                  ("defects", cmd_defects, "density defects of a family")):
        sp = add(name, func, help_text)
        sp.add_argument("--sets", default=None, help='comma-separated expressions, e.g. "[0],[1]"')
        sp.add_argument("-F", "--family", default=None, help="family file")
        if name == "kelley":
            sp.add_argument("--mode", choices=["bf", "lp", "both"], default="both")
            sp.add_argument("--nmax", type=int, default=6)
            sp.add_argument("--workers", type=int, default=1)
        else:
            sp.add_argument("-m", "--measure", required=True)

    sp = add("jordan", cmd_jordan, "Jordan-extension computations over a spine measure")
    sp.add_argument("action", choices=["member", "carve", "iso", "smallpart"])
    sp.add_argument("-s", "--spine", required=True)
    sp.add_argument("--sel", default=None)
    sp.add_argument("--eps", default=None)
    sp.add_argument("--cyl", default=None)
    sp.add_argument("--stages", type=int, default=1)
    sp.add_argument("--targets", default=None)
    sp.add_argument("--cert-depth", type=int, default=4)
    return p


def run(argv: list[str]) -> Report:
    report = Report(list(argv))
    try:
        with contextlib.redirect_stdout(io.StringIO()) as help_text:
            args = build_parser().parse_args(argv)
        args.func(args, report.lines)
    except SystemExit as exc:  # --help
        report.lines = help_text.getvalue().splitlines()
        report.exit_code = EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except MtoolError as exc:
        report.lines = []
        report.errors.append(f"mtool: {type(exc).__name__}: {exc}")
        report.exit_code = next((code for cls, code in _EXIT_FOR if isinstance(exc, cls)), EXIT_INVALID)
    except ValueError as exc:
        report.lines = []
        report.errors.append(f"mtool: invalid input: {exc}")
        report.exit_code = EXIT_INVALID
    return report


def main(argv: list[str] | None = None) -> int:
    report = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(report.stdout)
    sys.stderr.write(report.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
