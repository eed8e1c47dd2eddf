import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_stochastic
from nosig import io
from nosig.game import build_verifier
from nosig.generators import KINDS, chsh, competing_chsh, generate, random_game

F = Fraction


def test_rational_formatting():
    assert io.format_rational(F(3, 6)) == "1/2"
    assert io.format_rational(2) == "2/1"
    assert io.parse_rational("7/21") == F(1, 3)
    assert io.parse_rational("0.25") == F(1, 4)
    assert float(io.format_float(0.1)) == 0.1
    with pytest.raises(io.ParseError):
        io.parse_rational("one half")


@pytest.mark.parametrize("kind", KINDS)
def test_game_roundtrip(kind, tmp_path):
    spec = generate(kind, seed=3)
    path = tmp_path / "g.json"
    io.write_game(spec, path)
    again = io.read_game(path)
    assert io.game_to_dict(again) == io.game_to_dict(spec)
    io.write_game(again, tmp_path / "h.json")
    assert (tmp_path / "h.json").read_bytes() == path.read_bytes()
    assert (build_verifier(again).matrix == build_verifier(spec).matrix).all()


def test_weighted_reject_entries_roundtrip():
    spec = chsh()
    key = next(iter(spec.reject))
    spec.reject[key] = F(2, 7)
    doc = io.game_to_dict(spec)
    assert {"at": list(key), "w": "2/7"} in doc["reject"]
    assert io.game_from_dict(doc).reject[key] == F(2, 7)


def test_generators_are_deterministic():
    a = io.dumps(io.game_to_dict(random_game(7)))
    b = io.dumps(io.game_to_dict(random_game(7)))
    assert a == b
    assert a != io.dumps(io.game_to_dict(random_game(8)))


def test_competing_chsh_distribution():
    spec = competing_chsh()
    assert set(spec.question_dist.values()) == {F(1, 16)}
    for i0, i1, j0, j1, k0, k1, l0, l1 in spec.reject:
        assert (l0 ^ l1) == (j0 & j1) and (k0 ^ k1) != (i0 & i1)


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d.pop("dims"),
        lambda d: d.__setitem__("dims", [2, 2, 2]),
        lambda d: d["question_dist"][0].__setitem__("p", "5/1"),
        lambda d: d["question_dist"].append(dict(d["question_dist"][0])),
        lambda d: d["reject"].append([0, 0, 0]),
        lambda d: d["reject"].append([9, 0, 0, 0, 0, 0, 0, 0]),
        lambda d: d["reject"].append({"at": [0, 0, 0, 0, 0, 0, 0, 0], "w": "3/2"}),
    ],
)
def test_bad_game_documents(mutate):
    doc = io.game_to_dict(random_game(0))
    doc["reject"] = [r for r in doc["reject"] if r != [0] * 8]
    mutate(doc)
    with pytest.raises(io.ParseError):
        io.game_from_dict(doc)


def test_unreadable_game(tmp_path):
    with pytest.raises(io.ParseError):
        io.read_game(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(io.ParseError):
        io.read_game(tmp_path / "bad.json")


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_strategy_roundtrip(seed, exact):
    rng = np.random.default_rng(seed)
    M = random_stochastic(rng, 6, 4, exact=exact)
    W = (random_stochastic(rng, 3, 2, exact=exact), random_stochastic(rng, 2, 2, exact=exact))
    sf = io.StrategyFile("alice", (2, 2), (3, 2), M, W)
    text = io.dumps(io.strategy_to_dict(sf))
    again = io.strategy_from_dict(json.loads(text))
    assert again.exact == exact
    assert (again.matrix == M).all()
    assert all((x == y).all() for x, y in zip(again.witnesses, W))
    assert io.dumps(io.strategy_to_dict(again)) == text


@pytest.mark.parametrize(
    "doc",
    [
        {"side": "carol", "dims": [1, 1, 1, 1], "matrix": [["1"]]},
        {"side": "alice", "dims": [1, 1, 1], "matrix": [["1"]]},
        {"side": "alice", "dims": [1, 1, 1, 1], "mode": "fuzzy", "matrix": [["1"]]},
        {"side": "alice", "dims": [1, 1, 1, 1], "matrix": [["1/2"]]},
        {"side": "alice", "dims": [1, 2, 1, 1], "matrix": [["1"]]},
        {"side": "alice", "dims": [1, 1, 1, 1], "matrix": [["1"]], "witnesses": [[["1"]]]},
        {"side": "alice", "dims": [1, 1, 1, 1], "matrix": [["1"]], "witnesses": [[["1"]], [["1"], ["1"]]]},
    ],
)
def test_bad_strategy_documents(doc):
    with pytest.raises(io.ParseError):
        io.strategy_from_dict(doc)


def test_float_mode_tolerance():
    doc = {"side": "bob", "dims": [1, 1, 2, 1], "mode": "float", "matrix": [["0.3", "0.70000000001"]]}
    sf = io.strategy_from_dict(doc)
    assert sf.matrix.dtype == np.float64
    doc["mode"] = "exact"
    with pytest.raises(io.ParseError):
        io.strategy_from_dict(doc)
