import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from comideal.cli import main, parse_bounds, parse_sequence
from comideal.exactseq import Dyadic
from comideal.report import Report, ReportError, render_table

GOLDEN = Path(__file__).parent / "golden"


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def test_parse_sequence_forms(tmp_path):
    assert parse_sequence("const:1/2:5").runs == ((Dyadic.pow2(-1), 5),)
    assert parse_sequence("geom:3").values() == [Dyadic.pow2(-1), Dyadic.pow2(-2), Dyadic.pow2(-3)]
    assert parse_sequence("dblexp:2").coverage == 15
    assert parse_sequence('["1/2", "2^-3"]').coverage == 2
    f = tmp_path / "s.json"
    f.write_text('{"runs": [{"mantissa": "1", "exponent": "-1", "length": "4"}]}')
    assert parse_sequence(f"@{f}").coverage == 4
    with pytest.raises(ValueError):
        parse_sequence("nope")


def test_parse_bounds():
    b = parse_bounds("2^20,20", 99)
    assert (b.M, b.C, b.K) == (1 << 20, 20, 99)
    assert parse_bounds("4,2,cov", 7).K == 7
    with pytest.raises(ValueError):
        parse_bounds("1", 7)


def test_gm_constant():
    r = invoke("gm", "--seq", "const:1", "--k", "100")
    assert r.exit_code == 0
    rows = json.loads(r.output)["data"]["rows"]
    assert len(rows) == 100 and {row["log2_gm"] for row in rows} == {"0"}


def test_horn_margins_nonnegative():
    r = invoke("horn", "--n", "8", "--seed", "42")
    assert r.exit_code == 0
    inst = json.loads(r.output)["data"]["instances"][0]
    assert inst["min_margin"] >= 0 and inst["diagonal_exact"]


def test_ex15_golden():
    r = invoke("ex15", "--p", "0,1,10,75,460", "--check", "product,theta,refute")
    # the theta rows for n = 2, 3 fail, hence exit 1 with the report written
    assert r.exit_code == 1
    assert r.output == (GOLDEN / "ex15_default.json").read_text()
    rep = json.loads(r.output)
    names = [c["name"] for c in rep["checks"] if c["name"].startswith("theta-lower-bound")]
    assert names == ["theta-lower-bound-n1", "theta-lower-bound-n2", "theta-lower-bound-n3"]


def test_ex15_table_golden():
    r = invoke("ex15", "--p", "0,1,10,75,460", "--check", "product,theta,refute", "--format", "table")
    assert r.output == (GOLDEN / "ex15_default.txt").read_text()


def test_ex15_checks_subset_passes():
    r = invoke("ex15", "--check", "product,refute")
    assert r.exit_code == 0


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seq": "const:1", "k": "5"}))
    r = invoke("gm", "--seq", "geom", "--k", "3", "--config", str(cfg))
    assert r.exit_code == 0
    rep = json.loads(r.output)
    assert len(rep["data"]["rows"]) == 5 and rep["config"]["seq"] == ["const:1"]


def test_out_file_and_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    invoke("decompose", "--n", "6", "--k", "6", "--seed", "3", "--out", str(a))
    invoke("decompose", "--n", "6", "--k", "6", "--seed", "3", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["config"]["seed"] == 3


def test_bad_config_exit_2():
    assert invoke("horn", "--tol", "3").exit_code == 2
    assert invoke("gm", "--seq", "bogus").exit_code == 2
    assert invoke("ideal-test", "--seq", "geom").exit_code == 2
    assert invoke("ex15", "--check", "nonsense").exit_code == 2


def test_failed_check_exit_1():
    r = invoke("ideal-test", "--seq", "const:1:64", "--seq", "geom:64", "--bounds", "2,2")
    assert r.exit_code == 1
    assert json.loads(r.output)["failed"] == 1


def test_other_subcommands_run():
    for args in (
        ("stability", "--seq", "geom:32"),
        ("commutator", "--n", "64", "--k", "2"),
        ("trace-cert", "--n", "6"),
        ("decompose", "--n", "5", "--k", "3"),
    ):
        r = invoke(*args)
        assert r.exit_code == 0, (args, r.output)


def test_render_table_cases():
    empty = Report("x", {})
    assert render_table(empty) == "check  pass  detail\n"
    one = Report("x", {})
    one.check("alpha", True, "note")
    lines = render_table(one).splitlines()
    assert lines[1] == "alpha  yes   note"
    with pytest.raises(ReportError):
        render_table({"checks": [{"oops": 1}]})
    with pytest.raises(ReportError):
        render_table({})
