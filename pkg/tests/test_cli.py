"""End-to-end tests for the command line interface.

Everything goes through cli.main(argv) so exit codes are the return
values; stdout is captured with capsys.  One subprocess test checks the
module is runnable as python -m coxarith.cli.
"""

import json
import subprocess
import sys

import pytest

from coxarith import classify, cli, fields
from coxarith.fields import element_literal, parse_element

DELTA5 = "corpus/delta5.cox"

STUCK = """
dim 2
vertices 3
edge 1 2 4
edge 2 3 4
edge 1 3 w sqrt(2)
"""

SPHERICAL = """
dim 2
vertices 3
edge 1 2 3
edge 2 3 3
"""

BAD_LABEL = """
dim 2
vertices 3
edge 1 2 7
edge 2 3 3
edge 1 3 3
"""


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


def test_classify_json_delta5(capsys):
    code, cap = run(capsys, "classify", DELTA5)
    assert code == cli.EXIT_OK
    j = json.loads(cap.out)
    assert j["diagram"] == "delta5"
    assert j["dim"] == 5 and j["vertices"] == 6
    assert j["trace_field"] == {"radicands": [2], "degree": 2}
    assert j["verdict"] == "pseudo-arithmetic-first-type"
    assert j["base_field"] == {"radicands": [], "degree": 1}
    assert j["model"]["a"] == 1
    assert isinstance(j["ms"], int) and j["ms"] >= 0


def test_classify_diagonal_literals_round_trip(capsys):
    code, cap = run(capsys, "classify", DELTA5)
    assert code == 0
    j = json.loads(cap.out)
    K = fields.make_field(j["trace_field"]["radicands"])
    for lit in j["ambient_diagonal"]:
        assert element_literal(parse_element(lit, K)) == lit


def test_classify_tsv(capsys):
    code, cap = run(capsys, "classify", DELTA5, "--tsv")
    lines = cap.out.splitlines()
    assert code == 0
    assert lines[0] == "reference\tdim\ttrace_field\tdegree\tverdict\ta"
    cells = lines[1].split("\t")
    assert cells == ["delta5", "5", "Q(sqrt(2))", "2",
                     "pseudo-arithmetic-first-type", "1"]


def test_classify_pretty(capsys):
    code, cap = run(capsys, "classify", DELTA5, "--pretty")
    assert code == 0
    assert "trace field" in cap.out
    assert "Q(sqrt(2))" in cap.out
    assert "subordinated" in cap.out


def test_classify_audit_local(capsys):
    code, cap = run(capsys, "classify", DELTA5, "--audit-local")
    assert code == 0
    j = json.loads(cap.out)
    assert j["local_audit"]
    for audit in j["local_audit"].values():
        assert audit["places"]
        assert audit["pairing_matrix"]


def test_classify_undetermined_exit(tmp_path, capsys):
    p = tmp_path / "stuck.cox"
    p.write_text(STUCK)
    code, cap = run(capsys, "classify", str(p))
    assert code == cli.EXIT_UNDETERMINED
    j = json.loads(cap.out)
    assert j["verdict"] == "undetermined"


def test_classify_error_codes(tmp_path, capsys):
    cases = [
        (BAD_LABEL, cli.EXIT_UNSUPPORTED),
        (SPHERICAL, cli.EXIT_SIGNATURE),
        ("not a diagram\n", cli.EXIT_PARSE),
    ]
    for i, (text, expected) in enumerate(cases):
        p = tmp_path / f"case{i}.cox"
        p.write_text(text)
        code, cap = run(capsys, "classify", str(p))
        assert code == expected
        assert cap.out == ""
        assert "error:" in cap.err
    code, cap = run(capsys, "classify", str(tmp_path / "missing.cox"))
    assert code == cli.EXIT_PARSE


def test_batch_corpus_tsv(capsys):
    code, cap = run(capsys, "batch", "corpus")
    assert code == 0
    lines = cap.out.splitlines()
    assert lines[0].startswith("reference\t")
    assert len(lines) == 9
    names = [ln.split("\t")[0] for ln in lines[1:]]
    assert names == sorted(names)
    assert all(ln.split("\t")[4] == "pseudo-arithmetic-first-type"
               for ln in lines[1:])
    assert all(ln.split("\t")[5] == "1" for ln in lines[1:])


def test_batch_is_deterministic_and_parallel_agrees(capsys):
    _, cap1 = run(capsys, "batch", "corpus")
    _, cap2 = run(capsys, "batch", "corpus")
    assert cap1.out == cap2.out
    code, cap3 = run(capsys, "batch", "corpus", "--jobs", "2")
    assert code == 0
    assert cap3.out == cap1.out


def test_batch_error_rows_and_first_error_exit(tmp_path, capsys):
    (tmp_path / "a_badlabel.cox").write_text(BAD_LABEL)
    (tmp_path / "b_spherical.cox").write_text(SPHERICAL)
    (tmp_path / "c_stuck.cox").write_text(STUCK)
    code, cap = run(capsys, "batch", str(tmp_path))
    assert code == cli.EXIT_UNSUPPORTED  # first error in sorted order wins
    lines = cap.out.splitlines()
    assert len(lines) == 4
    assert "error:" in lines[1] and "error:" in lines[2]
    assert lines[3].split("\t")[4] == "undetermined"


def test_batch_undetermined_without_errors(tmp_path, capsys):
    (tmp_path / "stuck.cox").write_text(STUCK)
    code, _ = run(capsys, "batch", str(tmp_path), DELTA5)
    assert code == cli.EXIT_UNDETERMINED


def test_batch_empty_dir_is_empty_table(tmp_path, capsys):
    code, cap = run(capsys, "batch", str(tmp_path))
    assert code == cli.EXIT_OK
    assert cap.out.splitlines() == ["reference\tdim\ttrace_field\tdegree\tverdict\ta"]
    code, cap = run(capsys, "batch", str(tmp_path), "--json")
    assert code == cli.EXIT_OK
    assert json.loads(cap.out) == []


def test_bound_must_be_positive(capsys):
    for sub in ("classify", "batch"):
        code, cap = run(capsys, sub, DELTA5, "--bound", "0")
        assert code == cli.EXIT_PARSE
        assert "--bound" in cap.err


def test_report_json_round_trips(tmp_path, capsys):
    stuck = tmp_path / "stuck.cox"
    stuck.write_text(STUCK)
    for path in (DELTA5, str(stuck)):
        _, cap = run(capsys, "classify", path)
        j = json.loads(cap.out)
        j.pop("ms")
        assert classify.report_from_json(j).to_json() == j


def test_batch_json_mode(capsys):
    code, cap = run(capsys, "batch", DELTA5, "--json")
    assert code == 0
    results = json.loads(cap.out)
    assert len(results) == 1 and results[0]["diagram"] == "delta5"


def test_volume_ok(capsys):
    code, cap = run(capsys, "volume", "--digits", "24")
    assert code == cli.EXIT_OK
    res = json.loads(cap.out)
    assert res["match"] is True
    assert res["certified_significant_digits"] >= 20


def test_volume_digit_bounds(capsys):
    for bad in ("4", "61"):
        code, cap = run(capsys, "volume", "--digits", bad)
        assert code == cli.EXIT_PARSE
        assert "error:" in cap.err


def test_audit(capsys):
    code, cap = run(capsys, "audit", "--field", "2,3", "--prime", "2")
    assert code == 0
    j = json.loads(cap.out)
    assert j["p"] == 2
    assert j["places"] and j["pairing_matrix"]


def test_audit_rejects_composite_prime(capsys):
    for bad in ("6", "1"):
        code, cap = run(capsys, "audit", "--prime", bad)
        assert code == cli.EXIT_PARSE
        assert "not prime" in cap.err


def test_module_is_runnable():
    proc = subprocess.run(
        [sys.executable, "-m", "coxarith.cli", "volume", "--digits", "10"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["match"] is True
