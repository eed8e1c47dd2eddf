import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import settings
from scipy.optimize import linprog

from nosig.game import build_verifier
from nosig.generators import chsh, random_game

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_stochastic(rng, rows, cols, exact=False, zeros=0.0):
    if exact:
        W = rng.integers(0, 6, size=(rows, cols))
        W[rng.random((rows, cols)) < zeros] = 0
        W[0, W.sum(axis=0) == 0] = 1
        return np.array(
            [[Fraction(int(W[r, c]), int(W[:, c].sum())) for c in range(cols)] for r in range(rows)],
            dtype=object,
        )
    W = rng.random((rows, cols))
    W[rng.random((rows, cols)) < zeros] = 0.0
    W[0, W.sum(axis=0) == 0] = 1.0
    return W / W.sum(axis=0)


def pr_box(exact=True):
    """``k0 xor k1 = i0 and i1`` with uniform marginals."""
    one = Fraction(1, 2) if exact else 0.5
    B = np.zeros((4, 4), dtype=object if exact else float)
    if exact:
        B[:] = Fraction(0)
    for i0, i1, k0, k1 in itertools.product(range(2), repeat=4):
        if (k0 ^ k1) == (i0 & i1):
            B[2 * k0 + k1, 2 * i0 + i1] = one
    return B


def echo_strategy():
    """Prover 0 answers its teammate's question: a deterministic signaling strategy."""
    A = np.zeros((4, 4), dtype=object)
    A[:] = Fraction(0)
    for i0, i1 in itertools.product(range(2), repeat=2):
        A[2 * i1 + 0, 2 * i0 + i1] = Fraction(1)
    return A


def dims2_vertices():
    """All 24 vertices of the 2x2 -> 2x2 no-signaling polytope, listed by hand."""
    verts = []
    for f0 in itertools.product(range(2), repeat=2):
        for f1 in itertools.product(range(2), repeat=2):
            B = np.zeros((4, 4))
            for i0, i1 in itertools.product(range(2), repeat=2):
                B[2 * f0[i0] + f1[i1], 2 * i0 + i1] = 1.0
            verts.append(B)
    for a, b, g in itertools.product(range(2), repeat=3):
        B = np.zeros((4, 4))
        for i0, i1, k0, k1 in itertools.product(range(2), repeat=4):
            if (k0 ^ k1) == (((i0 ^ a) & (i1 ^ b)) ^ g):
                B[2 * k0 + k1, 2 * i0 + i1] = 0.5
        verts.append(B)
    return verts


def ns_constraints(q, r):
    """Equality constraints of the no-signaling polytope ``q -> r``, variable index (k, i) row major."""
    nq, na = q[0] * q[1], r[0] * r[1]
    rows = []
    for i in range(nq):
        row = np.zeros(na * nq)
        row[[k * nq + i for k in range(na)]] = 1
        rows.append((row, 1.0))
    for c in (0, 1):
        for kc in range(r[c]):
            for ic in range(q[c]):
                for other in range(1, q[1 - c]):
                    row = np.zeros(na * nq)
                    for kk in range(r[1 - c]):
                        k = kc * r[1] + kk if c == 0 else kk * r[1] + kc
                        i_a = ic * q[1] + other if c == 0 else other * q[1] + ic
                        i_b = ic * q[1] if c == 0 else ic
                        row[k * nq + i_a] += 1
                        row[k * nq + i_b] -= 1
                    rows.append((row, 0.0))
    return np.array([r_ for r_, _ in rows]), np.array([b for _, b in rows])


def lambda_float(V):
    """Independent float value for dims-2 games: min over Alice's polytope of max over Bob's vertices."""
    Vf = np.asarray(V.matrix, dtype=float)
    E, f = ns_constraints((2, 2), (2, 2))
    n = 16
    rows = []
    for B in dims2_vertices():
        # <V, A (x) B> as a linear function of vec(A) (row-major (k, i))
        coeff = np.zeros(n)
        for k, i in itertools.product(range(4), range(4)):
            coeff[k * 4 + i] = sum(Vf[k * 4 + l, i * 4 + j] * B[l, j] for l in range(4) for j in range(4))
        rows.append(np.append(coeff, -1.0))
    c = np.zeros(n + 1)
    c[-1] = 1
    res = linprog(
        c, A_ub=np.array(rows), b_ub=np.zeros(len(rows)),
        A_eq=np.hstack([E, np.zeros((len(E), 1))]), b_eq=f,
        bounds=[(0, None)] * n + [(None, None)], method="highs",
    )
    assert res.status == 0
    return res.fun


@pytest.fixture(scope="session")
def chsh_verifier():
    return build_verifier(chsh())


@pytest.fixture(scope="session")
def random_verifiers():
    return [build_verifier(random_game(seed)) for seed in range(5)]


ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
