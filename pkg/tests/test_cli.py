import glob
import json
import os

from convexqe.cli import fixtures_dir, main
from convexqe.classifier import classify
from convexqe.models import load_model

from conftest import fixture_path


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


class TestCommands:
    def test_parse_echo(self, capsys):
        rc, out, _ = run(capsys, "parse", "E y. y + y = x")
        assert rc == 0
        from convexqe.parser import parse_formula
        from convexqe.syntax import canonicalize_bound
        assert canonicalize_bound(parse_formula(out.strip())) \
            == canonicalize_bound(parse_formula("E y. y + y = x"))

    def test_classify_json(self, capsys):
        rc, out, _ = run(capsys, "--format", "json", "classify",
                         "--model", fixture_path("q3_11pi"))
        assert rc == 0
        data = json.loads(out)
        assert data["cut_kind"] == "irrational-nonvaluational"
        assert data["falsifier_demo"] is not None

    def test_eliminate(self, capsys, m_sub2):
        rc, out, _ = run(capsys, "eliminate", "--model", "lex2_sub1.json",
                         "E y. (x < y & U(y))")
        assert rc == 0
        from convexqe.models import Point, eval_formula
        from convexqe.oracle import oracle_truth
        from convexqe.parser import parse_formula
        g = parse_formula(out.strip())
        f = parse_formula("E y. (x < y & U(y))")
        for x in (Point.of(0, 3), Point.of(2, 0), Point.of(-1, 1)):
            assert eval_formula(m_sub2, g, {"x": x}) \
                == oracle_truth(m_sub2, f, {"x": x})

    def test_fixture_name_resolution(self, capsys):
        rc, _, _ = run(capsys, "classify", "--model", "lex2_sub1.json")
        assert rc == 0

    def test_nonvaluational_exit_code(self, capsys):
        rc, _, err = run(capsys, "eliminate", "--model", "q1_pi.json",
                         "E y. (x < y & U(y))")
        assert rc == 1
        assert "stabilizer" in err

    def test_parse_error_exit_code(self, capsys):
        rc, _, err = run(capsys, "parse", "E y. ((x < y")
        assert rc == 2
        assert "syntax" in err

    def test_missing_model_is_domain_error(self, capsys):
        rc, _, _ = run(capsys, "classify", "--model", "no_such_model.json")
        assert rc == 1

    def test_skolemize_round_trips_through_verify(self, capsys, tmp_path):
        rc, out, _ = run(capsys, "--format", "json", "skolemize",
                         "--model", "lex2_sub1.json", "--target", "y",
                         "x < y & U(y)")
        assert rc == 0
        sk_file = tmp_path / "sk.json"
        sk_file.write_text(out)
        rc, out, _ = run(capsys, "--format", "json", "verify-skolem",
                         "--model", "lex2_sub1.json", "--phi", "x < y & U(y)",
                         "--target", "y", "--sk", str(sk_file),
                         "--samples", "200", "--seed", "5")
        assert rc == 0
        assert json.loads(out)["passed"] is True

    def test_eval(self, capsys):
        rc, out, _ = run(capsys, "eval", "--model", "q1_pi.json",
                         "--assign", '{"x": ["3"]}', "U(x)")
        assert rc == 0 and out.strip() == "true"

    def test_obstruct(self, capsys, tmp_path):
        fn = tmp_path / "fn.json"
        fn.write_text(json.dumps(
            {"breakpoints": [], "pieces": [{"slope": "1", "intercept": "1"}]}))
        rc, out, _ = run(capsys, "--format", "json", "obstruct",
                         "--model", "q1_pi.json", "--fn", str(fn))
        assert rc == 0
        assert json.loads(out)["violation"] == "escapes-u"

    def test_choice_demo_default_identity(self, capsys):
        rc, out, _ = run(capsys, "--format", "json", "choice-demo",
                         "--model", "lex2_sub1.json")
        assert rc == 0
        assert json.loads(out)["kind"] == "fiber-pair"

    def test_normalize_monotone(self, capsys, tmp_path):
        fn = tmp_path / "g.json"
        fn.write_text(json.dumps({"breakpoints": ["0"],
                                  "pieces": [{"slope": "-1", "intercept": "0"},
                                             {"slope": "1", "intercept": "0"}]}))
        rc, out, _ = run(capsys, "--format", "json", "normalize-monotone",
                         "--fn", str(fn))
        assert rc == 0
        data = json.loads(out)
        assert data["breakpoints"] == []
        assert data["pieces"] == [{"slope": "1", "intercept": "0"}]

    def test_check_pluslike(self, capsys, tmp_path):
        fn = tmp_path / "f.json"
        fn.write_text(json.dumps({"arity": 2, "direction": ["1", "1"],
                                  "thresholds": [],
                                  "pieces": [{"coef_x": "2", "coef_y": "3",
                                              "intercept": "0"}]}))
        rc, out, _ = run(capsys, "--format", "json", "check-pluslike",
                         "--fn", str(fn))
        assert rc == 0 and json.loads(out)["pluslike"] is True


class TestCorpus:
    def test_every_fixture_matches_its_sidecar(self):
        paths = sorted(glob.glob(os.path.join(fixtures_dir(), "*.json")))
        models = [p for p in paths if not p.endswith(".expect.json")]
        assert len(models) == 7
        for path in models:
            expect = json.load(open(path.replace(".json", ".expect.json")))
            report = classify(load_model(path)).to_json()
            for key, val in expect.items():
                assert report[key] == val, (path, key)


class TestFuzzCommand:
    def test_clean_run(self, capsys):
        rc, out, _ = run(capsys, "fuzz", "--model", "lex2_sub1.json",
                         "--count", "25", "--assignments", "40", "--seed", "7")
        assert rc == 0 and "0 discrepancies" in out

    def test_injected_bug_detected(self, capsys):
        rc, out, _ = run(capsys, "--format", "json", "fuzz",
                         "--model", "lex2_sub1.json", "--count", "120",
                         "--assignments", "40", "--seed", "7", "--inject-bug")
        assert rc == 1
        report = json.loads(out)
        assert report["discrepancy_count"] >= 1
        assert report["discrepancies"][0]["minimized"]

    def test_byte_identical_reports(self, capsys):
        args = ["--format", "json", "fuzz", "--model", "lex3_val_1pi0.json",
                "--count", "20", "--assignments", "25", "--seed", "99"]
        rc1, out1, _ = run(capsys, *args)
        rc2, out2, _ = run(capsys, *args)
        assert rc1 == rc2 == 0
        assert out1 == out2
