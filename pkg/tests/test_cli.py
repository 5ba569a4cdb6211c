import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from cli_cases import CASES
from tropica.cli import EXIT_ASSERT, EXIT_INPUT, EXIT_OK, main

HERE = Path(__file__).resolve().parent


@pytest.fixture(autouse=True)
def _in_tests_dir(monkeypatch):
    monkeypatch.chdir(HERE)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name,argv", CASES, ids=[c[0] for c in CASES])
def test_golden(name, argv, capsys):
    code, out, _ = run(argv, capsys)
    assert code == EXIT_OK
    assert out.encode() == (HERE / "golden" / name).read_bytes()


@pytest.mark.parametrize("name,argv", CASES, ids=[c[0] for c in CASES])
def test_out_files_byte_identical(name, argv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes() == (HERE / "golden" / name).read_bytes()


def load(name):
    text = (HERE / "golden" / name).read_text()
    return json.loads(text) if name.endswith(".json") else list(csv.DictReader(io.StringIO(text)))


# the goldens carry the module examples, not just whatever the code printed

def test_golden_nest_levels():
    doc = load("nest_A.json")
    assert doc["version"] == 1 and doc["subcommand"] == "nest"
    assert doc["result"]["nesting"]["levels"] == [{"indices": [1, 3], "mu": 3, "nu": 2},
                                                  {"indices": [2], "mu": 1, "nu": 1},
                                                  {"indices": [4], "mu": 0, "nu": 1}]


def test_golden_probe_first_order():
    rows = load("probe.csv")
    assert abs(float(rows[1]["estimate"]) + math.log(2)) <= 1e-6
    assert all(r["passed"] == "true" for r in rows)


def test_golden_ultra_and_thermo():
    assert load("ultra_bad.csv")[0]["valid"] == "false"
    assert load("ultra_ok.json")["outputs"]["verification"][0]["valid"] is True
    th = load("thermo.json")
    assert th["outputs"]["shifts"][0]["order_changed"] is True
    assert th["outputs"]["shifts"][0]["argmin_after"] == [2]


def test_golden_dequantify_and_amoeba():
    rows = load("dequantify.csv")
    assert [int(r["N"]) for r in rows] == [2 ** i for i in range(1, 13)]
    assert all(abs(float(r["w"]) - 1) <= 1 / int(r["N"]) + 1e-12 for r in rows)
    am = load("amoeba.csv")
    assert [r["flagged"] for r in am] == ["true", "false", "true"] and am[0]["alpha"] == "1"


def test_golden_selftest_all_pass():
    rows = load("selftest.csv")
    assert len(rows) >= 20 and all(r["passed"] == "true" for r in rows)


def test_exit_code_on_failed_assertion(capsys):
    code, _, err = run(["ultra", "--matrix", "data/ultra_ok.csv", "--expect", "invalid"], capsys)
    assert code == EXIT_ASSERT and "expected_invalid" in err


@pytest.mark.parametrize("argv", [
    ["nest", "--spectrum", '{"version": 1, "spectrum": [1], "extra": 3}'],
    ["nest", "--spectrum", '{"version": 2, "spectrum": [1]}'],
    ["nest", "--spectrum", "[]"],
    ["nest", "--spectrum", "[1, "],
    ["dequantify", "--spectrum", "[0,1]", "--alpha", "5"],
    ["thermo", "--model", '{"version": 1, "systems": [{"E": 1, "S": 0, "T": 0}]}'],
    ["filters", "--family", '{"version": 1, "ground": 2, "members": [[1]], "x": 1}'],
    ["probe", "--spectrum", "[0, 0.001]", "--mode", "float"],
    ["ultra", "--matrix", "data/missing.csv"],
])
def test_input_errors_exit_one(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == EXIT_INPUT and out == "" and "error" in err


def test_usage_error_prints_schema(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nest"])
    assert exc.value.code == EXIT_INPUT
    err = capsys.readouterr().err
    assert "input schema" in err and '"additionalProperties": false' in err


def test_float_mode_emits_17_digits(capsys):
    code, out, _ = run(["nest", "--spectrum", "[0.1, 0.2]", "--mode", "float", "--format", "csv"], capsys)
    assert code == EXIT_OK and "0.20000000000000001" in out


def test_enumerate_filters(capsys):
    code, out, _ = run(["filters", "--enumerate", "3", "--format", "csv"], capsys)
    assert code == EXIT_OK and out.startswith("zeta,proper,kind\n")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "tropica.cli", "selftest", "--format", "csv"],
                       capture_output=True, cwd=HERE)
    assert r.returncode == 0 and r.stdout == (HERE / "golden" / "selftest.csv").read_bytes()
