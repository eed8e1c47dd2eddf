"""Deterministic game generators used by ``nosig gen`` and the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from nosig.errors import DomainError
from nosig.game import GameSpec, SpaceDims

KINDS = ("chsh", "random", "competing-chsh", "always-reject")


def _chsh_win(x0, x1, y0, y1) -> bool:
    return (y0 ^ y1) == (x0 & x1)


def _uniform_dist(d: SpaceDims) -> dict:
    p = Fraction(1, d.s01 * d.t01)
    return {
        ((i0, i1), (j0, j1)): p
        for i0, i1, j0, j1 in itertools.product(range(d.s0), range(d.s1), range(d.t0), range(d.t1))
    }


def _tuples(d: SpaceDims):
    return itertools.product(
        range(d.s0), range(d.s1), range(d.t0), range(d.t1),
        range(d.a0), range(d.a1), range(d.b0), range(d.b1),
    )


def chsh() -> GameSpec:
    """Bob's pair plays CHSH against a verifier; Alice has nothing to do."""
    d = SpaceDims(1, 1, 2, 2, 1, 1, 2, 2)
    reject = {t: Fraction(1) for t in _tuples(d) if _chsh_win(t[2], t[3], t[6], t[7])}
    return GameSpec(d, _uniform_dist(d), reject, {"name": "chsh", "description": "rejects when Bob's pair wins CHSH"})


def competing_chsh() -> GameSpec:
    d = SpaceDims.uniform(2)
    reject = {
        t: Fraction(1)
        for t in _tuples(d)
        if _chsh_win(t[2], t[3], t[6], t[7]) and not _chsh_win(t[0], t[1], t[4], t[5])
    }
    return GameSpec(
        d, _uniform_dist(d), reject,
        {"name": "competing-chsh", "description": "rejects when Bob's pair wins CHSH and Alice's pair loses"},
    )


def always_reject(dims: SpaceDims | None = None) -> GameSpec:
    d = dims or SpaceDims.uniform(2)
    reject = {t: Fraction(1) for t in _tuples(d)}
    return GameSpec(d, _uniform_dist(d), reject, {"name": "always-reject"})


def random_game(seed: int = 0, dims: SpaceDims | None = None, reject_prob: float = 0.5) -> GameSpec:
    """Random 0/1 rejection table on a random rational question distribution.

    Question weights are integers in 1..9, so the distribution has full
    support and small denominators.
    """
    d = dims or SpaceDims.uniform(2)
    rng = np.random.default_rng(seed)
    keys = list(itertools.product(range(d.s0), range(d.s1), range(d.t0), range(d.t1)))
    w = rng.integers(1, 10, size=len(keys))
    total = int(w.sum())
    dist = {((i0, i1), (j0, j1)): Fraction(int(x), total) for (i0, i1, j0, j1), x in zip(keys, w)}
    reject = {t: Fraction(1) for t in _tuples(d) if rng.random() < reject_prob}
    return GameSpec(d, dist, reject, {"name": f"random-{seed}"})


def generate(kind: str, seed: int = 0, dims: SpaceDims | None = None) -> GameSpec:
    if kind == "chsh":
        return chsh()
    if kind == "competing-chsh":
        return competing_chsh()
    if kind == "always-reject":
        return always_reject(dims)
    if kind == "random":
        return random_game(seed, dims)
    raise DomainError(f"unknown generator {kind!r}; choose from {KINDS}")
