from fractions import Fraction as F
from pathlib import Path

import pytest

from mtool.algebra import Clopen, FiniteMeasure
from mtool.codings import M_KIND, IdealSpec, WeightFn
from mtool.errors import ParseError, ValidationError
from mtool.jordan import Selector, SpineMeasure, nu_spine
from mtool.kelley import FamilySpec
from mtool.textio import parse, parse_expr, parse_exprs, render, render_clopen

CORPUS = sorted((Path(__file__).parent / "corpus").iterdir())


def test_weight_example():
    w = parse("kind weight\ndepth 2\ndefault 1/2\nw - 1/3\n")
    assert w == WeightFn(2, {"": F(1, 3)})


def test_ideal_path_error_position():
    with pytest.raises(ParseError) as info:
        parse("kind ideal\ndepth 3\ngen 2\n")
    assert (info.value.line, info.value.column) == (3, 5)


def test_spine_consistency_is_validated():
    text = "kind spine\nspine-period 0\ncyl 1 1/2\ntail limit 1/2 coef 1/2 ratio 1/2 from 0\n"
    with pytest.raises(ValidationError):
        parse(text)
    ok = text.replace("cyl 1 1/2", "cyl 1 3/4")
    assert all(parse(ok).cyl(n) == nu_spine().cyl(n) for n in range(12))


@pytest.mark.parametrize("text", [
    "kind weight\ndepth 2\nfoo 1\n",
    "kind weight\ndepth 2\nw - 1/3 extra\n",
    "kind weight\ndepth x\n",
    "kind weight\ndepth 2\nw - 1/0\n",
    "kind weight\ndepth 2\nw - 0.5\n",
    "kind weight\ndepth 2\ndepth 3\n",
    "kind weight\ndefault 1/2\n",
    "kind nonsense\n",
    "depth 2\n",
    "kind spine\nspine-period 0\ntail limit 0 coeff 1 ratio 1/2 from 0\n",
    "kind selector\nsel 01\n",
    "kind selector\nsel 01:\n",
    "kind family\nset [0] + \n",
    "kind family\nset [2]\n",
])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse(text)


@pytest.mark.parametrize("text", [
    "kind weight\ndepth 2\nw 0 1\n",
    "kind weight\ndepth 2\nw 00 1/2\n",
    "kind M\ndepth 2\nw - 3/2\n",
    "kind ideal\ndepth 2\ngen 0\ngen 1\n",
    "kind spine\nspine-period 0\ntail limit 1/2 coef 1/4 ratio 1/2 from 0\n",
    "kind measure\ndepth 1\natoms 1/2 1/3\n",
    "kind family\nset {}\n",
])
def test_validation_errors(text):
    with pytest.raises(ValidationError):
        parse(text)


def test_comments_and_blank_lines():
    w = parse("# header\n\nkind M   # measure with nulls\ndepth 1\nw - 0 # all mass right\n")
    assert w == WeightFn(1, {"": F(0)}, kind=M_KIND)


def test_kind_argument_checks_and_supplies_the_kind():
    assert parse("sel 1:0", "selector") == Selector((1,), (0,))
    with pytest.raises(ParseError):
        parse("kind ideal\ndepth 1\n", "weight")


def test_expressions():
    assert parse_expr("[0]+[11]") == Clopen(["0", "11"])
    assert parse_expr("~[0] * ([10] + [11])") == Clopen(["1"])
    assert parse_expr("~{}") == Clopen.unit()
    assert parse_exprs("[0], [1]*[10] , ~[]") == [Clopen(["0"]), Clopen(["10"]), Clopen()]
    assert parse_expr("[] * [0] + [1]") == Clopen.unit()  # '*' binds tighter than '+'
    with pytest.raises(ParseError) as info:
        parse_expr("[0] + x")
    assert info.value.column == 7
    with pytest.raises(ParseError):
        parse_expr("([0]")


def test_clopen_rendering_reparses():
    for c in (Clopen(), Clopen.unit(), Clopen(["01", "110"])):
        assert parse_expr(render_clopen(c)) == c


@pytest.mark.parametrize("path", CORPUS, ids=[p.name for p in CORPUS])
def test_round_trip_over_corpus(path):
    obj = parse(path.read_text(encoding="utf-8"))
    text = render(obj)
    again = parse(text)
    assert again == obj
    assert render(again) == text


def test_round_trip_of_constructed_objects():
    objects = [
        WeightFn(3, {"": F(1, 3), "01": F(2, 5)}, F(1, 4)),
        WeightFn(2, {"1": F(0)}, kind=M_KIND),
        IdealSpec(3, ("01",)),
        SpineMeasure("10", "011", ((0, F(1)), (1, F(2, 3))), F(0), F(1, 2), F(1, 2), 2),
        FiniteMeasure(1, (F(1, 3), F(2, 3))),
        FamilySpec.of([Clopen(["0"]), Clopen(["01", "11"])]),
        Selector((1, 0), (0, 1, 1)),
    ]
    for obj in objects:
        assert parse(render(obj)) == obj
