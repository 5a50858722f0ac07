import json
import math
from pathlib import Path

import jsonschema
import pytest

from schurprimes.cli import EXIT_ERROR, EXIT_NONE, EXIT_OK, main
from schurprimes.report import load_schema

GOLDEN = Path(__file__).parent / "golden" / "pipeline_k1_n200000.json"
GOLDEN_ARGS = ["pipeline", "--n", "200000", "--w", "3", "--kappa", "0.1", "--delta", "0.05",
               "--epsilon", "0.1", "--k", "1", "--max-witnesses", "20"]


def run_cli(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def assert_close(actual, expected, path="$"):
    """Exact for ints, strings and structure; floats to 1e-9 relative."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict) and actual.keys() == expected.keys(), path
        for key in expected:
            assert_close(actual[key], expected[key], f"{path}.{key}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_close(a, e, f"{path}[{i}]")
    elif isinstance(expected, float) and not isinstance(expected, bool):
        assert math.isclose(actual, expected, rel_tol=1e-9, abs_tol=1e-15), (path, actual, expected)
    else:
        assert actual == expected, path


@pytest.fixture(scope="module")
def golden_pair(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("golden")
    first = run_cli(GOLDEN_ARGS, tmp, "a.json")
    second = run_cli(GOLDEN_ARGS, tmp, "b.json")
    return first, second


def test_golden_run_matches_snapshot(golden_pair):
    (code, out), _ = golden_pair
    assert code == EXIT_OK
    assert_close(json.loads(out.read_text()), json.loads(GOLDEN.read_text()))


def test_golden_run_is_byte_identical(golden_pair):
    (_, a), (_, b) = golden_pair
    assert a.read_bytes() == b.read_bytes()


def test_golden_run_validates_against_schema(golden_pair):
    (_, out), _ = golden_pair
    jsonschema.validate(json.loads(out.read_text()), load_schema())


def test_search_exit_codes_and_schema(tmp_path):
    code, out = run_cli(["search", "--n", "1000"], tmp_path)
    assert code == EXIT_OK
    rep = json.loads(out.read_text())
    jsonschema.validate(rep, load_schema())
    assert rep["witness_summary"]["first_distinct"] == {
        "p1": 3, "p2": 5, "p3": 7, "color": 1, "distinct": True}
    code, out = run_cli(["search", "--n", "2"], tmp_path)
    assert code == EXIT_NONE
    assert json.loads(out.read_text())["witnesses"] == []


def test_search_stdout(capsys):
    assert main(["search", "--n", "10"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert {(w["p1"], w["p2"], w["p3"]) for w in rep["witnesses"]} >= {(2, 2, 3), (3, 5, 7)}


def test_conjecture_command(tmp_path):
    code, out = run_cli(["conjecture", "--n", "10000", "--k", "2", "--coloring", "random:1"],
                        tmp_path)
    assert code == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["quadruple_count"] == 3223
    jsonschema.validate(rep, load_schema())


def test_verify_lemmas(tmp_path):
    code, out = run_cli(["verify-lemmas", "--n", "20000", "--k", "2", "--coloring", "random:2"],
                        tmp_path)
    assert code == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["witnesses"] == []
    names = {r["name"] for r in rep["lemma_reports"]}
    assert {"lambda-sup-offzero", "upper-hypothesis", "siegel-walfisz-mass", "difference"} <= names


def test_csv_output(tmp_path):
    code, out = run_cli(["pipeline", "--n", "20000", "--format", "csv"], tmp_path)
    assert code == EXIT_OK
    header = (tmp_path / "lemma_margins.csv").read_text().splitlines()[0]
    assert "name" in header and "margin" in header
    assert (tmp_path / "per_color_counts.csv").exists()


def test_timings_are_opt_in(tmp_path):
    _, plain = run_cli(["search", "--n", "500"], tmp_path, "plain.json")
    _, timed = run_cli(["search", "--n", "500", "--timings"], tmp_path, "timed.json")
    assert json.loads(plain.read_text())["timings"] is None
    assert json.loads(timed.read_text())["timings"]["search"] >= 0


def test_errors_exit_one(tmp_path):
    assert main(["pipeline", "--n", "50", "--w", "3"]) == EXIT_ERROR
    assert main(["search", "--n", "100", "--kappa", "0.9"]) == EXIT_ERROR
    assert main(["search", "--n", "100", "--coloring", str(tmp_path / "missing.txt")]) == EXIT_ERROR


def test_theoretical_defaults_flag_warns(tmp_path, caplog):
    code, out = run_cli(["search", "--n", "1000", "--paper-defaults"], tmp_path)
    assert code == EXIT_OK
    assert any("degenerate" in r.message for r in caplog.records)
    assert json.loads(out.read_text())["config"]["w"] == 0


def test_argparse_rejects_unknown_command():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
