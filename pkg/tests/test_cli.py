from __future__ import annotations

import json
import os
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from concur.cli import main

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "src" / "concur" / "corpus"
SCHEMA = json.loads((ROOT / "docs" / "report.schema.json").read_text())
EXPECTED = json.loads((CORPUS / "expected.json").read_text())
EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, _ = run([*argv, "--json"], capsys)
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    return code, rep


def golden_cases():
    for fname, cmds in sorted(EXPECTED.items()):
        for cmd, verdict in sorted(cmds.items()):
            words = cmd.split()
            yield pytest.param(words[:2] + [str(CORPUS / fname)] + words[2:], verdict, id=f"{fname}:{cmd}")


@pytest.mark.parametrize("argv,verdict", list(golden_cases()))
def test_golden_corpus(argv, verdict, capsys):
    code, rep = run_json(argv, capsys)
    assert rep["verdict"] == verdict
    assert code == EXIT[verdict]


@pytest.mark.parametrize(
    "argv",
    [
        ["pi", "laws"],
        ["pi", "gates"],
        ["ra", "laws", "all"],
        ["ra", "compose", "frac", "3/4", "1/2"],
        ["ra", "demo"],
    ],
)
def test_builtin_commands_match_schema(argv, capsys):
    code, rep = run_json(argv, capsys)
    assert code == EXIT[rep["verdict"]]
    assert rep["tool"] == " ".join(argv[:2])


def test_transmit_trace(capsys):
    code, rep = run_json(["pi", "trace", CORPUS / "transmit.pi", "--all"], capsys)
    assert code == 0
    assert {tr[-1] for tr in rep["details"]["traces"]} == {"0 | m(x).0"}


def test_bisim_agents(capsys):
    code, rep = run_json(["pi", "bisim", CORPUS / "laws.pi", "P", "Q"], capsys)
    assert code == 0 and rep["verdict"] == "pass"
    code, rep = run_json(["pi", "bisim", CORPUS / "laws.pi", "P", "a<b>.0"], capsys)
    assert code == 1 and rep["counterexample"] is not None


def test_semaphore_report(capsys):
    code, rep = run_json(["logic", "check", CORPUS / "semaphore.outline"], capsys)
    d = rep["details"]
    assert code == 0
    assert d["race"] == "race-free" and d["classification"] == "daring"
    assert d["ownership"]["result"] == "pass"


def test_free2_race_witness(capsys):
    code, rep = run_json(["race", "check", CORPUS / "semaphore_free2.outline"], capsys)
    assert code == 1 and rep["counterexample"]


def test_compose_text_output(capsys):
    code, out, _ = run(["ra", "compose", "excl", "a", "a"], capsys)
    assert code == 0 and "invalid" in out
    code, out, _ = run(["ra", "compose", "nat", "2", "3"], capsys)
    assert "5" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["pi"],
        ["pi", "run"],
        ["pi", "run", "x.pi", "--bogus"],
        ["logic", "check", "/nonexistent.outline"],
        ["ra", "compose", "nat", "2", "banana"],
        ["ra", "compose", "nat", "2", "3", "--domain", "5"],
        ["ra", "laws", "nat", "--fuel", "0"],
    ],
)
def test_usage_errors_exit_3(argv, capsys):
    code, _out, err = run(argv, capsys)
    assert code == 3 and err


def test_parse_error_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.pi"
    bad.write_text("main a<b>.(\n")
    code, out, _err = run(["pi", "run", bad, "--json"], capsys)
    assert code == 3
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["verdict"] == "error"


def test_global_flags_either_side(capsys):
    f = CORPUS / "transmit.pi"
    _, before, _ = run(["--json", "--seed", "3", "pi", "run", f], capsys)
    _, after, _ = run(["pi", "run", f, "--seed", "3", "--json"], capsys)
    assert before == after


def test_timing_is_opt_in(capsys):
    _, rep = run_json(["ra", "laws", "nat"], capsys)
    assert "elapsed" not in rep["stats"]
    _, rep = run_json(["ra", "laws", "nat", "--timing"], capsys)
    assert rep["stats"]["elapsed"] >= 0


def test_color_env(tmp_path):
    env = {**os.environ, "CONCUR_COLOR": "0"}
    cmd = [sys.executable, "-m", "concur.cli", "ra", "laws", "nat"]
    res = subprocess.run(cmd, capture_output=True, text=True, env=env, check=False)
    assert res.returncode == 0 and "\033[" not in res.stdout
    assert res.stdout.startswith("ra laws: pass")


def test_console_script_declared():
    text = (ROOT / "pyproject.toml").read_text()
    assert 'concur = "concur.cli:main"' in text
