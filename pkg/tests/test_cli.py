import io
import json

import pytest

from pohammer import (
    check_closure,
    classify,
    csp_hammer,
    parse_formula,
    serialize_formula,
    serialize_structure,
    sup_transform,
)
from pohammer.cli import run
from pohammer.sentences import (
    SIG_E,
    directed_cycle,
    directed_path,
    edge_copying_sentence,
    two_clique,
)

CYCLE_TEXT = (
    "(exists2 (S 1) (forall2 (C 1) (or (exists x (atom E (x x)))"
    " (and (exists x (exists y (and (atom S (x)) (atom S (y)) (not (eq x y)))))"
    " (or (exists a (exists b (and (atom S (a)) (atom S (b)) (atom C (a))"
    " (atom E (a b)) (not (atom C (b))))))"
    " (forall x (forall y (or (not (atom S (x))) (not (atom S (y)))"
    " (not (atom C (x))) (atom C (y))))))))))"
)

COPY_TEXT = (
    "(forall2 (A 1) (exists2 (C 1) (forall x (forall y (and"
    " (or (not (atom E (x y))) (not (atom A (x))) (atom C (y)))"
    " (or (not (atom E (x y))) (not (atom C (x))) (atom A (y))))))))"
)


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def workspace(tmp_path):
    (tmp_path / "cycle.sof").write_text(CYCLE_TEXT)
    (tmp_path / "copy.sof").write_text(COPY_TEXT)
    (tmp_path / "c3.st").write_text(serialize_structure(directed_cycle(3)))
    (tmp_path / "p2.st").write_text(serialize_structure(directed_path(2)))
    (tmp_path / "k2.st").write_text(serialize_structure(two_clique()))
    return tmp_path


def test_mc_exit_codes(workspace):
    code, out, _ = invoke(
        ["mc", "--structure", str(workspace / "c3.st"), "--formula", str(workspace / "cycle.sof")]
    )
    assert code == 0
    assert out == "true\n"
    code, out, _ = invoke(
        ["mc", "--structure", str(workspace / "p2.st"), "--formula", str(workspace / "cycle.sof")]
    )
    assert code == 1
    assert out == "false\n"


def test_mc_budget_exit_code(workspace):
    code, _, err = invoke(
        ["mc", "--structure", str(workspace / "c3.st"),
         "--formula", str(workspace / "cycle.sof"), "--budget", "5"]
    )
    assert code == 3
    assert "budget" in err


def test_mc_jobs_invariance(workspace):
    base = invoke(["mc", "--structure", str(workspace / "c3.st"),
                   "--formula", str(workspace / "cycle.sof")])
    jobs = invoke(["mc", "--structure", str(workspace / "c3.st"),
                   "--formula", str(workspace / "cycle.sof"), "--jobs", "3"])
    assert base == jobs


def test_classify_copy_sentence(workspace):
    code, out, _ = invoke(
        ["classify", "--class", "forall-restricted", "--signature", "E/2",
         str(workspace / "copy.sof")]
    )
    assert code == 0
    assert out == "accepted\n"
    code, out, _ = invoke(
        ["classify", "--class", "exists-guarded", "--signature", "E/2",
         str(workspace / "copy.sof")]
    )
    assert code == 1
    assert out.startswith("rejected")


def test_classify_json_matches_library(workspace):
    code, out, _ = invoke(
        ["classify", "--class", "positive", "--signature", "E/2", "--json",
         str(workspace / "cycle.sof")]
    )
    assert code == 0
    verdict = classify(parse_formula(CYCLE_TEXT, SIG_E), "positive")
    assert json.loads(out) == json.loads(json.dumps(verdict.to_json_dict()))


def test_transform_output_is_byte_identical_to_library(workspace):
    code, out, _ = invoke(
        ["transform", "--kind", "hammer", "--signature", "E/2", str(workspace / "copy.sof")]
    )
    assert code == 0
    expected = serialize_formula(csp_hammer(parse_formula(COPY_TEXT, SIG_E))) + "\n"
    assert out == expected

    code, out, _ = invoke(
        ["transform", "--kind", "sup", "--signature", "E/2", "-"]
    )  # '-' reads stdin; emulate by file instead
    assert code == 2  # empty stdin in tests: parse error

    f = parse_formula("(exists x (atom E (x x)))", SIG_E)
    (workspace / "loop.sof").write_text(serialize_formula(f))
    code, out, _ = invoke(
        ["transform", "--kind", "sup", "--signature", "E/2", str(workspace / "loop.sof")]
    )
    assert out == serialize_formula(sup_transform(f)) + "\n"


def test_parse_canonicalizes_and_errors(workspace):
    code, out, _ = invoke(["parse", str(workspace / "k2.st")])
    assert code == 0
    assert out == serialize_structure(two_clique())
    (workspace / "bad.st").write_text("signature E/2\ndomain 2\nE: (0,9)\n")
    code, _, err = invoke(["parse", str(workspace / "bad.st")])
    assert code == 2
    assert "3:" in err  # SourceSpan line


def test_normalize_dual(workspace):
    code, out, _ = invoke(
        ["normalize", "--dual", "--signature", "E/2", str(workspace / "cycle.sof")]
    )
    assert code == 0
    assert out.startswith("(forall2 (S0 1) (exists2 (S1 1)")


def test_verify_closure_counterexample(workspace):
    code, out, _ = invoke(
        ["verify-closure", "--kind", "inverse-surjective-homs", "--max-size", "2",
         str(workspace / "copy.sof")]
    )
    assert code == 1
    assert "counterexample" in out
    report = check_closure(
        parse_formula(COPY_TEXT, SIG_E), "inverse_surjective_homs",
        sig=SIG_E, max_size=2,
    )
    assert serialize_structure(report.witness[0]) in out


def test_verify_closure_clean(workspace):
    code, out, _ = invoke(
        ["verify-closure", "--kind", "inverse-injective-homs", "--max-size", "2",
         "--json", str(workspace / "copy.sof")]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["verdict"] == "no_counterexample_up_to_bound"
    assert payload["structures_examined"] == 19


def test_solve_qbf3_and_qcsp(workspace, tmp_path):
    (tmp_path / "inst.qdimacs").write_text("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n")
    code, out, _ = invoke(["solve-qbf3", str(tmp_path / "inst.qdimacs")])
    assert (code, out) == (0, "true\n")

    (tmp_path / "r.st").write_text("signature R/2\ndomain 2\nR: (0,1) (1,0) (1,1)\n")
    (tmp_path / "i.qcsp").write_text("forall x1 ; exists y1\nR(x1,y1)\n")
    code, out, _ = invoke(
        ["solve-qcsp", "--template", str(tmp_path / "r.st"),
         "--instance", str(tmp_path / "i.qcsp")]
    )
    assert (code, out) == (0, "true\n")


def test_pipeline_and_kits(workspace, tmp_path):
    (tmp_path / "r.st").write_text("signature R/2\ndomain 2\nR: (0,1) (1,0) (1,1)\n")
    (tmp_path / "i.qcsp").write_text("forall x1 ; exists y1\nR(x1,y1)\n")
    code, out, _ = invoke(
        ["pipeline", "--qcsp", "--template", str(tmp_path / "r.st"),
         "--prefix", "ae", "--instance", str(tmp_path / "i.qcsp"), "--json"]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["agree"] is True

    code, out, _ = invoke(
        ["build-phib", "--template", str(tmp_path / "r.st"), "--prefix", "ae",
         "--out", str(tmp_path / "kit")]
    )
    assert code == 0
    assert (tmp_path / "kit" / "phi_B.sof").exists()
    assert (tmp_path / "kit" / "hammered.sof").exists()
    assert (tmp_path / "kit" / "manifest").exists()

    (tmp_path / "inst.qdimacs").write_text("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-2 0\n")
    code, out, _ = invoke(
        ["pipeline", "--qbf3", "--n", "1", "--instance", str(tmp_path / "inst.qdimacs"),
         "--json"]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["contract_holds"] is True
    assert payload["direct"] is False


def test_encode_outputs_structure_text(tmp_path):
    (tmp_path / "inst.qdimacs").write_text("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n")
    code, out, _ = invoke(
        ["encode", "--qbf3", "--n", "1", "--instance", str(tmp_path / "inst.qdimacs")]
    )
    assert code == 0
    assert out.startswith("signature R/2 Rbar/2 succ/2 S/1 T/1 E1/1 A1/1")


def test_usage_error_exit_code():
    code, _, _ = invoke(["transform", "--kind", "bogus", "--signature", "E/2", "x.sof"])
    assert code == 2
    code, _, _ = invoke(["no-such-command"])
    assert code == 2
