import json
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from nosig import io
from nosig.cli import run
from nosig.game import build_verifier, payoff

DATA = Path(__file__).parent / "data"


def _gen(tmp_path, kind, *extra):
    path = tmp_path / f"{kind}.json"
    assert run(["gen", kind, "--out", str(path), *extra]) == 0
    return path


def test_gen_random_is_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert run(["gen", "random", "--seed", "7", "--out", str(a)]) == 0
    assert run(["gen", "random", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_dims_option(tmp_path):
    path = _gen(tmp_path, "random", "--dims", "1 1 2 2 1 1 2 3")
    assert json.loads(path.read_text())["dims"] == [1, 1, 2, 2, 1, 1, 2, 3]


def test_gen_bad_dims_exits_2(tmp_path):
    assert run(["gen", "random", "--dims", "1 2 3"]) == 2
    assert run(["gen", "sudoku"]) == 2


@pytest.mark.parametrize("kind,value", [("chsh", "1/1"), ("always-reject", "1/1"), ("competing-chsh", "0/1")])
def test_exact(tmp_path, capsys, kind, value):
    path = _gen(tmp_path, kind)
    assert run(["exact", str(path), "--out", str(tmp_path / "opt")]) == 0
    assert capsys.readouterr().out.strip() == value
    assert run(["check", str(tmp_path / "opt" / "bob.json")]) == 0


def test_exact_zero_game(tmp_path, capsys):
    path = _gen(tmp_path, "random")
    doc = json.loads(path.read_text())
    doc["reject"] = []
    path.write_text(json.dumps(doc))
    assert run(["exact", str(path)]) == 0
    assert capsys.readouterr().out.strip() == "0/1"


def test_check_files(capsys):
    assert run(["check", str(DATA / "pr_box.json")]) == 0
    assert capsys.readouterr().out.strip() == "0/1"
    assert run(["check", str(DATA / "constant.json")]) == 0
    assert capsys.readouterr().out.strip() == "0/1"
    assert run(["check", str(DATA / "echo.json")]) == 1
    assert capsys.readouterr().out.strip() == "1/1"
    assert run(["check", str(DATA / "echo.json"), "--tol", "1"]) == 0


def test_pr_box_wins_chsh(tmp_path):
    spec = io.read_game(_gen(tmp_path, "chsh"))
    pr = io.read_strategy(DATA / "pr_box.json")
    V = build_verifier(spec)
    import numpy as np

    assert payoff(V, np.array([[Fraction(1)]], dtype=object), pr.matrix) == 1


def test_round(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["round", str(DATA / "echo.json"), "--out", str(out)]) == 0
    assert run(["check", str(out)]) == 0
    same = tmp_path / "same.json"
    assert run(["round", str(DATA / "pr_box.json"), "--out", str(same)]) == 0
    assert same.read_text() == (DATA / "pr_box.json").read_text()
    assert run(["round", str(DATA / "constant.json")]) == 2


def test_round_malformed_witnesses(tmp_path):
    doc = json.loads((DATA / "echo.json").read_text())
    doc["witnesses"][0] = [["1/1"]]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert run(["round", str(path)]) == 2


def test_solve_zero_and_all_reject(tmp_path, capsys):
    zero = _gen(tmp_path, "random")
    doc = json.loads(zero.read_text())
    doc["reject"] = []
    zero.write_text(json.dumps(doc))
    assert run(["solve", str(zero), "--delta", "0.1", "--out", str(tmp_path / "z")]) == 0
    result = json.loads((tmp_path / "z" / "result.json").read_text())
    assert float(result["value_estimate"]) <= 0.1
    ar = _gen(tmp_path, "always-reject")
    assert run(["solve", str(ar), "--delta", "0.5", "--out", str(tmp_path / "a")]) == 0
    result = json.loads((tmp_path / "a" / "result.json").read_text())
    assert float(result["value_estimate"]) >= 0.9


def test_solve_chsh_certified(tmp_path, capsys):
    game = _gen(tmp_path, "chsh")
    out = tmp_path / "s"
    assert run(["solve", str(game), "--delta", "0.1", "--oracle", "exact-lp", "--certify", "--trace",
                "--out", str(out)]) == 0
    result = json.loads((out / "result.json").read_text())
    assert abs(float(result["value_estimate"]) - 1) <= 0.1
    assert result["lambda"] == "1/1"
    assert float(result["certified_gap_alice"]) <= 0.1 and float(result["certified_gap_bob"]) <= 0.1
    assert (out / "trace.csv").read_text().startswith("iteration,objective\n")
    assert run(["check", str(out / "alice.json")]) == 0
    assert "lambda=1/1" in capsys.readouterr().out


def test_solve_random_outputs(tmp_path):
    game = _gen(tmp_path, "random", "--seed", "1")
    out = tmp_path / "s"
    assert run(["solve", str(game), "--delta", "0.5", "--certify", "--out", str(out)]) == 0
    assert run(["check", str(out / "alice.json")]) == 0
    assert run(["check", str(out / "bob.json")]) == 0
    assert run(["round", str(out / "alice_triple.json"), "--out", str(out / "r.json")]) == 0
    assert run(["check", str(out / "r.json")]) == 0
    result = json.loads((out / "result.json").read_text())
    assert Fraction(result["certified_gap_alice_exact"]) <= Fraction(1, 2)


def test_solve_is_reproducible(tmp_path):
    game = _gen(tmp_path, "random", "--seed", "2")
    for name in ("x", "y"):
        assert run(["solve", str(game), "--delta", "0.5", "--seed", "3", "--out", str(tmp_path / name)]) == 0
    for f in ("alice.json", "bob.json", "result.json"):
        assert (tmp_path / "x" / f).read_bytes() == (tmp_path / "y" / f).read_bytes()


def test_input_errors(tmp_path):
    assert run(["solve", str(tmp_path / "missing.json")]) == 2
    game = _gen(tmp_path, "chsh")
    assert run(["solve", str(game), "--delta", "-1"]) == 2
    assert run(["decide", str(game), "-c", "0.1", "-s", "0.9"]) == 2


def test_decide(tmp_path, capsys):
    assert run(["decide", str(_gen(tmp_path, "always-reject")), "-c", "0.9", "-s", "0.1"]) == 1
    assert capsys.readouterr().out.startswith("no-instance")
    assert run(["decide", str(_gen(tmp_path, "competing-chsh")), "-c", "0.9", "-s", "0.3"]) == 0
    assert capsys.readouterr().out.startswith("yes-instance")


def test_invariant_violation_exit_code(monkeypatch, tmp_path, capsys):
    from nosig import mwum
    from nosig.errors import InvariantViolation

    def broken(*args, **kwargs):
        raise InvariantViolation("T", "slack marginals have different totals")

    monkeypatch.setattr(mwum, "solve_equilibrium", broken)
    assert run(["solve", str(_gen(tmp_path, "chsh")), "--out", str(tmp_path / "o")]) == 3
    assert "[T]" in capsys.readouterr().err


def test_console_script(tmp_path):
    env = dict(os.environ, NOSIG_THREADS="1")
    out = subprocess.run(
        [sys.executable, "-m", "nosig", "gen", "chsh"], capture_output=True, text=True, env=env, check=True
    )
    assert json.loads(out.stdout)["dims"] == [1, 1, 2, 2, 1, 1, 2, 2]
    bad = subprocess.run([sys.executable, "-m", "nosig", "check", str(DATA / "echo.json")], capture_output=True)
    assert bad.returncode == 1
