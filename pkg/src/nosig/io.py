"""JSON game and strategy files.

Rationals are written as ``"num/den"`` strings and floats as 17-significant
digit strings, so files round-trip bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from nosig import tensor
from nosig.errors import DomainError, NosigError
from nosig.game import GameSpec, SpaceDims


class ParseError(NosigError, ValueError):
    pass


def format_rational(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def format_float(x) -> str:
    return "%.17g" % float(x)


def format_entry(x) -> str:
    return format_rational(x) if isinstance(x, (Fraction, int)) else format_float(x)


def parse_rational(value) -> Fraction:
    try:
        if isinstance(value, float):
            return Fraction(value)
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {value!r}") from exc


def _pair(value, what: str) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ParseError(f"{what} must be a pair of integers, got {value!r}")
    return int(value[0]), int(value[1])


def game_to_dict(spec: GameSpec) -> dict:
    dist = [
        {"i": list(i), "j": list(j), "p": format_rational(p)}
        for (i, j), p in sorted(spec.question_dist.items())
    ]
    reject = []
    for key, w in sorted(spec.reject.items()):
        w = Fraction(w)
        reject.append(list(key) if w == 1 else {"at": list(key), "w": format_rational(w)})
    doc = {"dims": spec.dims.as_list(), "question_dist": dist, "reject": reject}
    if spec.meta:
        doc["meta"] = dict(spec.meta)
    return doc


def game_from_dict(doc: dict) -> GameSpec:
    try:
        dims = SpaceDims.from_list(doc["dims"])
        dist = {}
        for entry in doc["question_dist"]:
            key = (_pair(entry["i"], "i"), _pair(entry["j"], "j"))
            if key in dist:
                raise ParseError(f"duplicate question pair {key}")
            dist[key] = parse_rational(entry["p"])
        reject = {}
        for entry in doc.get("reject", []):
            if isinstance(entry, dict):
                at, w = entry["at"], parse_rational(entry.get("w", "1/1"))
            else:
                at, w = entry, Fraction(1)
            if len(at) != 8:
                raise ParseError(f"reject entry {at!r} is not an 8-tuple")
            key = tuple(int(x) for x in at)
            if key in reject:
                raise ParseError(f"duplicate reject entry {key}")
            reject[key] = w
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed game document: {exc}") from exc
    except DomainError as exc:
        raise ParseError(str(exc)) from exc
    spec = GameSpec(dims, dist, reject, dict(doc.get("meta", {})))
    try:
        spec.validate()
    except DomainError as exc:
        raise ParseError(str(exc)) from exc
    return spec


def _compact(value) -> str:
    return json.dumps(value, separators=(", ", ": "))


def dumps(doc: dict) -> str:
    """One top-level key per line and one list item per line."""
    parts = []
    for key, value in doc.items():
        if isinstance(value, list) and value and isinstance(value[0], (list, dict)):
            items = ",\n".join("  " + _compact(v) for v in value)
            parts.append(f" {json.dumps(key)}: [\n{items}\n ]")
        else:
            parts.append(f" {json.dumps(key)}: {_compact(value)}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def read_game(path) -> GameSpec:
    return game_from_dict(_load_json(path))


def write_game(spec: GameSpec, path) -> None:
    Path(path).write_text(dumps(game_to_dict(spec)))


@dataclass
class StrategyFile:
    side: str
    qdims: tuple[int, int]
    adims: tuple[int, int]
    matrix: np.ndarray
    witnesses: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def exact(self) -> bool:
        return tensor.is_exact(self.matrix)


def _columns(M) -> list[list[str]]:
    return [[format_entry(x) for x in M[:, j]] for j in range(M.shape[1])]


def strategy_to_dict(sf: StrategyFile) -> dict:
    doc = {
        "side": sf.side,
        "dims": [*sf.qdims, *sf.adims],
        "mode": "exact" if sf.exact else "float",
        "matrix": _columns(sf.matrix),
    }
    if sf.witnesses is not None:
        doc["witnesses"] = [_columns(W) for W in sf.witnesses]
    return doc


def _matrix(columns, rows: int, cols: int, exact: bool, what: str) -> np.ndarray:
    if not isinstance(columns, list) or len(columns) != cols:
        raise ParseError(f"{what}: expected {cols} columns")
    M = np.empty((rows, cols), dtype=object if exact else np.float64)
    for j, col in enumerate(columns):
        if not isinstance(col, list) or len(col) != rows:
            raise ParseError(f"{what}: column {j} must have {rows} entries")
        for i, x in enumerate(col):
            q = parse_rational(x)
            M[i, j] = q if exact else float(q)
    if not tensor.is_stochastic(M):
        raise ParseError(f"{what}: columns must be probability vectors")
    return M


def strategy_from_dict(doc: dict) -> StrategyFile:
    try:
        side = doc["side"]
        if side not in ("alice", "bob"):
            raise ParseError(f"side must be 'alice' or 'bob', got {side!r}")
        dims = [int(x) for x in doc["dims"]]
        if len(dims) != 4 or min(dims) < 1:
            raise ParseError("dims must list four positive integers [q0, q1, r0, r1]")
        q, a = (dims[0], dims[1]), (dims[2], dims[3])
        mode = doc.get("mode", "exact")
        if mode not in ("exact", "float"):
            raise ParseError(f"mode must be 'exact' or 'float', got {mode!r}")
        exact = mode == "exact"
        M = _matrix(doc["matrix"], a[0] * a[1], q[0] * q[1], exact, "matrix")
        witnesses = None
        if "witnesses" in doc:
            w = doc["witnesses"]
            if not isinstance(w, list) or len(w) != 2:
                raise ParseError("witnesses must be a list of two matrices")
            witnesses = tuple(_matrix(w[c], a[c], q[c], exact, f"witness {c}") for c in (0, 1))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed strategy document: {exc}") from exc
    return StrategyFile(side, q, a, M, witnesses)


def read_strategy(path) -> StrategyFile:
    return strategy_from_dict(_load_json(path))


def write_strategy(sf: StrategyFile, path) -> None:
    Path(path).write_text(dumps(strategy_to_dict(sf)))
