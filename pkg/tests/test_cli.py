import subprocess
import sys
from pathlib import Path

import pytest

from mtool.cli import main, run

CORPUS = Path(__file__).parent / "corpus"


def c(name: str) -> str:
    return str(CORPUS / name)


def test_equal_range_pair_is_not_isomorphic():
    report = run(["equiv", "--rel", "iso", "--depth", "2", "-f", c("mu.wt"), "-g", c("nu.wt")])
    assert report.stdout == "false\n" and report.exit_code == 0


def test_kelley_both_modes():
    report = run(["kelley", "--sets", "[0],[1]", "--mode", "both"])
    assert report.exit_code == 0
    assert report.lines[0] == "lp 1/2"
    assert report.lines[2:8] == [f"k {n} {-(-n // 2)}" for n in range(1, 7)]
    assert report.lines[-1] == "bound 1/2"


def test_eval_and_dist():
    assert run(["eval", "-m", c("lebesgue.wt"), "-e", "[0]+[11]"]).stdout == "3/4\n"
    assert run(["dist", "-m", c("equal-range-mu.measure"), "-a", "[00]", "-b", "[10]"]).stdout == "5/8\n"


def test_equiv_relations():
    assert run(["equiv", "--rel", "c", "-f", c("mu.wt"), "-g", c("mu.wt")]).lines == ["true", "swaps none"]
    assert run(["equiv", "--rel", "m", "-f", c("null-left.M"), "-g", c("null-left.M")]).stdout == "true\n"
    report = run(["equiv", "--rel", "z", "-f", c("null-left.M"), "-g", c("mu.wt")])
    assert report.exit_code == 3


def test_range_and_iso_from_ranges():
    report = run(["range", "-m", c("lebesgue.wt")])
    assert report.lines[-2:] == ["values 1/4 1/2 3/4", "intertwining true"]
    report = run(["iso-from-ranges", "-f", c("lebesgue.wt"), "-g", c("third.wt")])
    assert report.stdout == "range-mismatch 1/4\n" and report.exit_code == 0
    report = run(["iso-from-ranges", "-f", c("lebesgue.wt"), "-g", c("lebesgue.wt")])
    assert report.lines[-1] == "depth-reached 2" and "map 01 [01]" in report.lines


def test_encode_ideal_and_psi():
    report = run(["encode-ideal", "-i", c("gen0.ideal")])
    assert report.lines[:3] == ["kind M", "depth 3", "default 1/2"] and "w - 0" in report.lines
    a = run(["psi", "-f", c("mu.wt"), "--bits", "4"])
    b = run(["psi", "-f", c("mu.wt"), "--bits", "4"])
    assert a.stdout == b.stdout and a.lines[0].startswith("(")


def test_jordan_subcommands():
    report = run(["jordan", "member", "-s", c("nu.spine"), "--sel", ":10"])
    assert report.lines == ["inner 1/3", "outer 5/6", "member false"]
    report = run(["jordan", "carve", "-s", c("lebesgue.spine"), "--eps", "1/3"])
    assert report.lines == ["block - sel :01", "measure 1/3"]
    report = run(["jordan", "iso", "-s", c("lebesgue.spine"), "--stages", "3"])
    assert report.lines[-4:] == [f"invariant {n} true" for n in ("dyadic", "partition", "refinement", "density")]
    report = run(["jordan", "smallpart", "-s", c("nu.spine"), "--eps", "1/10"])
    assert report.lines[-1] == "certificate true"


def test_defects():
    report = run(["defects", "-m", c("lebesgue.wt"), "--sets", "{},[]"])
    assert report.lines == ["symmetric 1/2", "uniform 3/4"]


@pytest.mark.parametrize("argv,code", [
    (["bogus"], 2),
    (["eval", "-m", "missing-file.wt", "-e", "[0]"], 2),
    (["eval", "-m", str(CORPUS / "mu.wt"), "-e", "[0"], 2),
    (["equiv", "--rel", "q", "-f", "a", "-g", "b"], 2),
    (["jordan", "carve", "-s", str(CORPUS / "lebesgue.spine"), "--eps", "1"], 3),
    (["iso-from-ranges", "-f", str(CORPUS / "null-left.M"), "-g", str(CORPUS / "mu.wt")], 3),
    (["eval", "-m", str(CORPUS / "mu.wt"), "-e", "[000]"], 4),
    (["kelley", "--sets", "[0],[1],[00]", "--budget", "5"], 4),
    (["jordan", "iso", "-s", str(CORPUS / "nu.spine"), "--stages", "1"], 4),
])
def test_exit_codes(argv, code):
    report = run(argv)
    assert report.exit_code == code
    assert report.stdout == "" and report.stderr.startswith("mtool: ")


def test_false_is_not_an_error():
    report = run(["jordan", "member", "-s", c("nu.spine"), "--sel", ":10"])
    assert report.exit_code == 0 and "false" in report.stdout


def test_reports_are_byte_stable_across_runs_and_workers():
    argv = ["kelley", "-F", c("three.family"), "--mode", "both"]
    first = run(argv + ["--workers", "1"])
    assert run(argv + ["--workers", "1"]).stdout == first.stdout
    assert run(argv + ["--workers", "2"]).stdout == first.stdout


def test_help_exits_cleanly():
    report = run(["--help"])
    assert report.exit_code == 0 and any("jordan" in line for line in report.lines)


def test_main_writes_streams(capsys):
    assert main(["eval", "-m", c("lebesgue.wt"), "-e", "[1]"]) == 0
    assert capsys.readouterr().out == "1/2\n"
    assert main(["bogus"]) == 2
    assert capsys.readouterr().err.startswith("mtool: ")


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "mtool.cli", "eval", "-m", c("lebesgue.wt"), "-e", "~[0]"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "1/2\n"
