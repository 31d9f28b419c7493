import csv
import json

import pytest

from ws1s_nested.bench import (
    CorpusReport,
    ParameterError,
    RunReport,
    chain_grid,
    compare_corpus,
    default_atom_pool,
    exhaustive_corpus,
    generate_family,
    matrices,
    ordered_partitions,
    prefixes,
    prepare,
    run_formula,
    sample_corpus,
)
from ws1s_nested.cli import main
from ws1s_nested.formula import parse_formula, pretty


def test_chain_n2_k1_text():
    text = generate_family("chain", 2, 1)
    assert text == "ex2 Y: ~ex2 X1, X2: (~(X1 sub Y & X1 sub X2 & ~X2 sub X1) | X2 sub Y)"
    f = parse_formula(text)
    assert parse_formula(pretty(f)) == f


def test_chain_n3_k2_prefix():
    p = prepare(generate_family("chain", 3, 2))
    assert p.prefix == (("ex", ("Y",)), ("all", ("X1",)), ("ex", ("X2", "X3")))
    f = parse_formula(generate_family("chain", 3, 2))
    assert f.body.child.vars == ("X1",)
    assert f.body.child.body.child.vars == ("X2", "X3")


@pytest.mark.parametrize("name, n, k", [("chain", 2, 2), ("chain", 1, 1), ("chain", 4, 0), ("ladder", 3, 1)])
def test_family_parameter_errors(name, n, k):
    with pytest.raises(ParameterError):
        generate_family(name, n, k)


def test_corpus_shape():
    assert len(list(ordered_partitions(("X", "Y", "Z"), 3))) == 13
    assert len(list(prefixes())) == 26
    mats = matrices(default_atom_pool(), 1)
    assert len(mats) == 4 + 4 + 2 * 6
    assert len({pretty(m) for m in matrices(default_atom_pool(), 3)}) == len(matrices(default_atom_pool(), 3))
    first = list(exhaustive_corpus(max_connectives=0))
    assert len(first) == 26 * 4
    assert all(parse_formula(pretty(f)) == f for _, f in first)


def test_sample_corpus_is_deterministic():
    items = list(exhaustive_corpus(max_connectives=1))
    a = sample_corpus(items, 10, 3)
    b = sample_corpus(items, 10, 3)
    assert [x[0] for x in a] == [x[0] for x in b] and len(a) == 10
    assert sample_corpus(items[:3], 10, 3) == items[:3]


def test_run_report_round_trip():
    report = run_formula(generate_family("chain", 3, 2), "chain-n3-k2")
    assert report.status == "ok" and report.verdict is True
    text = report.to_json()
    again = RunReport.from_json(text)
    assert again == report and again.to_json() == text
    assert set(json.loads(text)) >= {
        "formula_id", "task", "mode", "verdicts", "base_states",
        "classical_states", "term_nodes", "iterations", "time_ms",
    }


def test_run_report_flags_disagreement():
    r = RunReport("x", "validity", "both", verdicts={"classical": True, "antichain": False})
    assert r.disagreement and r.verdict is None


def test_run_formula_reports_errors_and_budgets():
    bad = run_formula("X sub", "bad")
    assert bad.status == "error" and "FormulaSyntaxError" in bad.message
    tight = run_formula(generate_family("chain", 4, 3), "tight", state_budget=10, term_budget=10)
    assert tight.status == "resource"
    with pytest.raises(ValueError):
        run_formula("sing X", mode="fast")


def test_satisfiability_task():
    assert run_formula("sing X", task="satisfiability").verdict is True
    assert run_formula("sing X", task="validity").verdict is False
    assert run_formula("sing X & ~sing X", task="satisfiability").verdict is False


def test_compare_chain_grid():
    report = compare_corpus(chain_grid(3, 2))
    assert [r.formula_id for r in report.reports] == ["chain-n2-k1", "chain-n3-k1", "chain-n3-k2"]
    assert report.agreement_rate == 1.0
    rows = report.table()
    assert rows[2]["verdict"] == "valid" and rows[0]["verdict"] == "invalid"


def test_compare_empty_corpus():
    report = compare_corpus([])
    assert report.reports == [] and report.agreement_rate == 1.0
    assert report.summary()["instances"] == 0
    assert CorpusReport([]).ratios() == []


def test_compare_parallel_matches_serial():
    items = sample_corpus(exhaustive_corpus(max_connectives=1), 12, 0)
    serial = compare_corpus(items)
    parallel = compare_corpus(items, workers=2)
    assert [(r.formula_id, r.verdicts) for r in serial.reports] == [
        (r.formula_id, r.verdicts) for r in parallel.reports
    ]


# ---------------------------------------------------------------- command line

def test_cli_decide_family_both(capsys):
    code = main(["decide", "--mode", "both", "--task", "validity", "--family", "chain", "--n", "3", "--k", "2"])
    out = capsys.readouterr().out
    assert code == 0 and "valid" in out and "classical" in out and "antichain" in out


def test_cli_decide_file_json(tmp_path, capsys):
    path = tmp_path / "f.ws1s"
    path.write_text("# one singleton exists\nex2 X: sing X\n")
    code = main(["decide", "--mode", "antichain", "--formula-file", str(path), "--json"])
    report = RunReport.from_json(capsys.readouterr().out)
    assert code == 0 and report.term_nodes > 0 and report.formula_id == "f"


def test_cli_invalid_exit_code(tmp_path):
    path = tmp_path / "g.ws1s"
    path.write_text("sing X")
    assert main(["decide", "--formula-file", str(path)]) == 1
    assert main(["decide", "--formula-file", str(path), "--task", "satisfiability"]) == 0
    path.write_text("all2 X: sing X")
    assert main(["decide", "--formula-file", str(path), "--task", "satisfiability"]) == 1


def test_cli_trace_prints_iterates(capsys):
    main(["decide", "--family", "chain", "--n", "2", "--k", "1", "--trace"])
    out = capsys.readouterr().out
    assert "F0#: {" in out and "N1#: ↑⊗{" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["decide", "--bogus"],
        ["decide", "--family", "chain", "--n", "2"],
        ["decide", "--family", "chain", "--n", "2", "--k", "2"],
        ["decide", "--formula-file", "/nonexistent/file.ws1s"],
        ["frobnicate"],
    ],
)
def test_cli_usage_errors(argv, capsys):
    assert main(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_cli_syntax_error_is_usage(tmp_path):
    path = tmp_path / "bad.ws1s"
    path.write_text("ex2 X sing X")
    assert main(["decide", "--formula-file", str(path)]) == 2


def test_cli_resource_exit(capsys):
    code = main(["decide", "--mode", "both", "--family", "chain", "--n", "4", "--k", "3", "--budget", "10"])
    assert code == 3


def test_cli_compare_writes_files(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["compare", "--corpus", "chain", "--max-n", "3", "--out", str(out), "--json"])
    summary = json.loads(capsys.readouterr().out)
    assert code == 0 and summary["agreement_rate"] == 1.0
    with open(out / "compare.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["formula_id"] for r in rows] == ["chain-n2-k1", "chain-n3-k1", "chain-n3-k2"]
    for name in ("compare_space.png", "compare_time.png"):
        assert (out / name).read_bytes()[:4] == b"\x89PNG"
    assert json.loads((out / "compare_summary.json").read_text())["instances"] == 3


def test_cli_compare_sampled_exhaustive(tmp_path, capsys):
    code = main(["compare", "--corpus", "exhaustive", "--sample", "60", "--seed", "4", "--out", str(tmp_path)])
    out = capsys.readouterr().out
    assert code == 0 and "instances 60" in out and "agreement 1.0000" in out
    assert (tmp_path / "compare_space.png").exists()


def test_cli_generate(capsys):
    assert main(["generate", "--n", "2", "--k", "1"]) == 0
    assert capsys.readouterr().out.strip() == generate_family("chain", 2, 1)
    assert main(["generate", "--n", "2", "--k", "5"]) == 2
