#!/usr/bin/env python3
"""Command-line surface: subcommands, output files and exit codes."""

import csv
import json
import os
import tempfile

from handlers.commands import RunConfig, run
from polar import EXIT_CAPACITY, EXIT_OK, EXIT_USAGE, main
from reports.writer import Table, render

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def run_cli(*argv):
    """Run polar.py with --out to a temporary file; return (exit code, text)."""
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "result.txt")
        code = main(list(argv) + ["--out", out])
        text = ""
        if os.path.exists(out):
            with open(out, encoding="utf-8") as handle:
                text = handle.read()
    return code, text


def csv_rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    return list(csv.reader(lines[1:]))


def test_layout_json_matches_golden_file():
    code, text = run_cli("layout", "--scheme", "mixed", "--n", "2")
    assert code == EXIT_OK
    data = json.loads(text)
    with open(os.path.join(FIXTURES, "layout_mixed_n2.json"), encoding="utf-8") as handle:
        golden = json.load(handle)
    for key, value in golden.items():
        assert data[key] == value
    assert data["gamma"] == data["gamma_formula"] == 6


def test_layout_csv():
    code, text = run_cli("layout", "--scheme", "arikan", "--n", "1", "--format", "csv")
    assert code == EXIT_OK
    rows = csv_rows(text)
    assert rows[0] == ["position", "indices", "width", "kernel_path"]
    assert len(rows) == 1 + 4


def test_kernels_table():
    code, text = run_cli("kernels")
    assert code == EXIT_OK
    rows = csv_rows(text)
    names = [r[0] for r in rows[1:]]
    assert names == ["g1", "g2", "uv2", "uv4", "mixed(g1,g2)"]
    g2 = rows[2]
    assert g2[4] == "1 2 3 4"
    assert rows[0][-2:] == ["E1_uniform", "E2_uniform"]
    g1 = rows[1]
    assert abs(float(g1[6]) - 0.5) < 1e-9
    assert abs(float(g1[8]) - 0.375) < 1e-9


def test_kernels_json():
    code, text = run_cli("kernels", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(text)
    assert data["kernels"][0]["kernel"]["matrix_rows"] == ["8", "5", "3", "f"]


def test_de_csv_has_one_row_per_channel():
    code, text = run_cli("de", "--scheme", "mixed", "--n", "2", "--epsilon", "0.5")
    assert code == EXIT_OK
    assert text.startswith("# de; scheme=mixed; n=2; N=16; epsilon=0.5")
    rows = csv_rows(text)
    assert len(rows) == 1 + 10
    total_i = sum(float(r[2]) for r in rows[1:])
    assert abs(total_i - 8.0) < 1e-9


def test_curve_all_schemes():
    code, text = run_cli("curve", "--scheme", "all", "--n", "3", "--rate", "0.25", "--rate", "0.5")
    assert code == EXIT_OK
    rows = csv_rows(text)
    assert rows[0][:5] == ["scheme", "N", "epsilon", "rate", "K"]
    assert [r[0] for r in rows[1:]] == ["mixed", "mixed", "arikan", "arikan", "rs4_top", "rs4_top"]
    assert all(float(r[5]) <= 1.0 for r in rows[1:])


def test_select_reports_unreachable_k():
    code, text = run_cli("select", "--scheme", "rs4_top", "--n", "2", "--K", "7")
    assert code == EXIT_OK
    assert "exact=false" in text.splitlines()[0]
    assert "K=6" in text.splitlines()[0]


def test_simulate_is_deterministic():
    args = ("simulate", "--scheme", "mixed", "--n", "2", "--rate", "0.25",
            "--trials", "400", "--seed", "5", "--epsilon", "0.4")
    code_a, text_a = run_cli(*args)
    code_b, text_b = run_cli(*args, "--threads", "2")
    assert code_a == code_b == EXIT_OK
    assert text_a == text_b
    rows = csv_rows(text_a)
    assert rows[1][-1] == ""


def test_simulate_with_timing():
    code, text = run_cli("simulate", "--n", "1", "--K", "2", "--trials", "50", "--timing")
    assert code == EXIT_OK
    assert float(csv_rows(text)[1][-1]) >= 0.0


def test_process_reports():
    code, text = run_cli("process", "--report", "slln", "--steps", "120", "--paths", "300")
    assert code == EXIT_OK
    blocks = text.strip().split("\n\n")
    assert len(blocks) == 2
    assert blocks[0].startswith("# slln")
    assert blocks[1].startswith("# slln_histogram")

    code, text = run_cli("process", "--report", "all", "--n", "3", "--steps", "120", "--paths", "200")
    assert code == EXIT_OK
    names = [block.splitlines()[0].split(";")[0] for block in text.strip().split("\n\n")]
    assert names == ["# martingale", "# polarization", "# rate", "# slln", "# slln_histogram", "# zbound"]


def test_complexity_all():
    code, text = run_cli("complexity", "--scheme", "all", "--n", "3")
    assert code == EXIT_OK
    totals = {r[0]: int(r[5]) for r in csv_rows(text)[1:]}
    assert totals["mixed"] < totals["rs4_top"]


def test_usage_errors_exit_2():
    assert run_cli("de", "--epsilon", "1.5")[0] == EXIT_USAGE
    assert run_cli("de", "--n", "0")[0] == EXIT_USAGE
    assert run_cli("de", "--scheme", "all")[0] == EXIT_USAGE
    assert run_cli("select", "--n", "1")[0] == EXIT_USAGE
    assert run_cli("select", "--n", "1", "--K", "9")[0] == EXIT_USAGE
    assert run_cli("simulate", "--trials", "0", "--K", "1")[0] == EXIT_USAGE


def test_scheme_all_accepted_only_where_documented():
    assert run_cli("kernels", "--scheme", "all")[0] == EXIT_OK
    try:
        run(RunConfig(command="select", scheme="all", K=2))
    except ValueError as e:
        assert "kernels, curve, complexity" in str(e)
    else:
        assert False, "select must reject --scheme all"


def test_argparse_errors_exit_2():
    try:
        main(["curve", "--format", "xml"])
    except SystemExit as e:
        assert e.code == EXIT_USAGE
    else:
        assert False, "argparse should reject an unknown format"


def test_capacity_error_exit_3():
    assert run_cli("layout", "--n", "9")[0] == EXIT_CAPACITY


def test_run_config_directly():
    text = run(RunConfig(command="de", scheme="arikan", n=1, epsilon=0.5, format="json"))
    data = json.loads(text)
    assert data["name"] == "de"
    assert len(data["rows"]) == 4


def test_writer_formats():
    table = Table("t", ["a", "b"], [[1, 0.1], [True, (1, 2)]], {"k": 2})
    assert render([table]) == "# t; k=2\na,b\n1,0.1\ntrue,1 2\n"
    data = json.loads(render([table, table], "json"))
    assert len(data) == 2
    assert data[0]["rows"][1] == [True, [1, 2]]


if __name__ == "__main__":
    tests = [(name, fn) for name, fn in list(globals().items()) if name.startswith("test_")]
    print("=" * 60)
    print(f"Running {len(tests)} command-line tests")
    print("=" * 60)
    for name, fn in tests:
        fn()
        print(f"  ok  {name}")
    print("All passed.")
