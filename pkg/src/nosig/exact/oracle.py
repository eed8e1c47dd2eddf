"""Exact game values and best responses by rational linear programming.

``lambda_exact`` and ``mu_exact`` dualize the inner maximization over Team
Bob's polytope ``{y >= 0 : E y = f}``: for fixed Alice variables ``x`` the
inner value ``max_y (P x)·y`` equals ``min_z f·z`` subject to
``E^T z >= P x``, which turns the min-max into one LP.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from nosig import tensor
from nosig.errors import DomainError, InvariantViolation
from nosig.exact.lp import solve_lp
from nosig.exact.polytope import NoSignalingPolytope, _independent_rows
from nosig.game import Pair, VerifierMatrix, phi
from nosig.nosignaling import check_no_signaling


def _exact_verifier(V: VerifierMatrix) -> VerifierMatrix:
    if V.exact:
        return V
    return VerifierMatrix(V.dims, tensor.as_exact(V.matrix), tensor.as_exact(V.question_probs))


def _reduced(poly: NoSignalingPolytope):
    return _independent_rows(poly.rows, poly.rhs)


def best_response_exact(S, qdims: Pair, adims: Pair):
    """Maximize ``<S, B>`` over the no-signaling polytope ``qdims -> adims``.

    Returns ``(B, value)`` with exact rational entries.
    """
    S = tensor.as_exact(S)
    poly = NoSignalingPolytope(qdims, adims)
    if S.shape != (poly.na, poly.nq):
        raise DomainError(f"best_response_exact: S has shape {S.shape}, expected {(poly.na, poly.nq)}")
    rows, rhs = _reduced(poly)
    res = solve_lp(list(S.ravel()), A_eq=rows, b_eq=rhs, maximize=True)
    return poly.strategy(res.x), res.value


def _payoff_rows(V: VerifierMatrix):
    """Exact bilinear form ``P`` with ``<V, A ⊗ B> = vec(B) · P vec(A)``."""
    return [list(r) for r in V.phi_operator]


def _min_max(V: VerifierMatrix):
    d = V.dims
    alice = NoSignalingPolytope(d.alice_questions, d.alice_answers)
    bob = NoSignalingPolytope(d.bob_questions, d.bob_answers)
    EA, fA = _reduced(alice)
    EB, fB = _reduced(bob)
    P = _payoff_rows(V)
    nA, mB = alice.n_vars, len(EB)
    c = [0] * nA + list(fB)
    A_ub = [P[l] + [-EB[r][l] for r in range(mB)] for l in range(bob.n_vars)]
    A_eq = [row + [0] * mB for row in EA]
    res = solve_lp(c, A_eq=A_eq, b_eq=fA, A_ub=A_ub, b_ub=[0] * len(A_ub), free=range(nA, nA + mB))
    return res.value, alice.strategy(res.x)


def _max_min(V: VerifierMatrix):
    d = V.dims
    alice = NoSignalingPolytope(d.alice_questions, d.alice_answers)
    bob = NoSignalingPolytope(d.bob_questions, d.bob_answers)
    EA, fA = _reduced(alice)
    EB, fB = _reduced(bob)
    P = _payoff_rows(V)
    nB, mA = bob.n_vars, len(EA)
    c = [0] * nB + list(fA)
    A_ub = [[-P[l][a] for l in range(nB)] + [EA[r][a] for r in range(mA)] for a in range(alice.n_vars)]
    A_eq = [row + [0] * mA for row in EB]
    res = solve_lp(
        c, A_eq=A_eq, b_eq=fB, A_ub=A_ub, b_ub=[0] * len(A_ub), free=range(nB, nB + mA), maximize=True
    )
    return res.value, bob.strategy(res.x)


def lambda_exact(V: VerifierMatrix):
    """Equilibrium value ``λ(V)`` with optimal strategies, all exact.

    Solves the min-max and the max-min programs separately and insists that
    they agree.  Returns ``(value, A_star, B_star)``.
    """
    V = _exact_verifier(V)
    lo, A_star = _min_max(V)
    hi, B_star = _max_min(V)
    if lo != hi:
        raise InvariantViolation("lambda_exact", f"min-max {lo} differs from max-min {hi}")
    return lo, A_star, B_star


def max_min_value(V: VerifierMatrix) -> Fraction:
    return _max_min(_exact_verifier(V))[0]


def mu_exact(V: VerifierMatrix) -> Fraction:
    """Value of the penalized relaxation.

    Alice picks any stochastic triple ``(A, A0, A1)``; Bob picks a
    no-signaling ``B`` and penalties ``0 <= Π_c <= e p_alice*``.  The penalty
    maximization dualizes to ``min <U_c, R_c>`` with ``R_c >= Δ_c``,
    ``R_c >= 0``.
    """
    V = _exact_verifier(V)
    d = V.dims
    qd, ad = d.alice_questions, d.alice_answers
    witnessed = NoSignalingPolytope(qd, ad, witnesses=True)
    bob = NoSignalingPolytope(d.bob_questions, d.bob_answers)
    EB, fB = _reduced(bob)
    P = _payoff_rows(V)
    n_triple = witnessed.n_vars
    mB = len(EB)
    n_pen = (ad[0] + ad[1]) * d.s01
    z0 = n_triple
    r0 = z0 + mB
    n = r0 + n_pen

    p_alice = list(V.p_alice)
    c = [0] * n
    for r, b in enumerate(fB):
        c[z0 + r] = b
    for c_idx in (0, 1):
        offset = r0 + (0 if c_idx == 0 else ad[0] * d.s01)
        for k in range(ad[c_idx]):
            for i in range(d.s01):
                c[offset + k * d.s01 + i] = p_alice[i]

    A_eq, b_eq = [], []
    # columns of A sum to one
    A_eq.extend(row + [0] * (n - n_triple) for row in witnessed.rows[: witnessed.nq])
    b_eq.extend([1] * witnessed.nq)
    # columns of each witness sum to one
    for c_idx in (0, 1):
        start = witnessed.witness_offsets[c_idx]
        for i in range(qd[c_idx]):
            row = [0] * n
            for k in range(ad[c_idx]):
                row[start + k * qd[c_idx] + i] = 1
            A_eq.append(row)
            b_eq.append(1)

    A_ub = []
    for l in range(bob.n_vars):
        row = P[l] + [0] * (n_triple - len(P[l]))
        row += [-EB[r][l] for r in range(mB)] + [0] * n_pen
        A_ub.append(row)
    # defect rows come in the order (c, k_c, i), matching the penalty layout
    for idx, drow in enumerate(witnessed.rows[witnessed.nq :]):
        row = list(drow) + [0] * (n - n_triple)
        row[r0 + idx] = -1
        A_ub.append(row)
    res = solve_lp(c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=[0] * len(A_ub), free=range(z0, r0))
    return res.value


def alice_payoff_floor(V: VerifierMatrix, B) -> Fraction:
    """``min_A <V, A ⊗ B>`` over Alice's no-signaling polytope, for fixed ``B``."""
    V = _exact_verifier(V)
    d = V.dims
    B = tensor.as_exact(B)
    alice = NoSignalingPolytope(d.alice_questions, d.alice_answers)
    EA, fA = _reduced(alice)
    P = np.array(_payoff_rows(V), dtype=object)
    cost = list(B.reshape(-1) @ P)
    return solve_lp(cost, A_eq=EA, b_eq=fA).value


def optimality_gap(V: VerifierMatrix, side: str, strategy, lam=None, tol: float = tensor.FLOAT_TOL):
    """How far ``strategy`` is from guaranteeing the equilibrium value.

    For ``bob``: ``λ - min_A <V, A ⊗ B>``; for ``alice``:
    ``max_B <V, A ⊗ B> - λ``.  Float strategies are converted to rationals
    exactly, so the gap is certified for the strategy as given.
    """
    V = _exact_verifier(V)
    d = V.dims
    if side == "bob":
        qd, ad = d.bob_questions, d.bob_answers
    elif side == "alice":
        qd, ad = d.alice_questions, d.alice_answers
    else:
        raise DomainError(f"side must be 'alice' or 'bob', got {side!r}")
    strategy = np.asarray(strategy)
    violation, _ = check_no_signaling(strategy, qd, ad, tol=0 if tensor.is_exact(strategy) else tol)
    if violation > tol:
        raise DomainError(f"{side} strategy is signaling (violation {float(violation):.3e})")
    if lam is None:
        lam = lambda_exact(V)[0]
    X = tensor.as_exact(strategy)
    if side == "bob":
        return lam - alice_payoff_floor(V, X)
    _, best = best_response_exact(phi(V, X), d.bob_questions, d.bob_answers)
    return best - lam
