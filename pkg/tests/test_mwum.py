from fractions import Fraction

import numpy as np
import pytest

from nosig import tensor
from nosig.errors import DomainError, InvariantViolation
from nosig.game import build_verifier, phi
from nosig.generators import always_reject, random_game
from nosig.mwum import (
    SolverConfig, _complement_game, best_response_recursive, decide, iteration_count, mwum_update,
    rationalize_stochastic, solve_equilibrium,
)
from nosig.nosignaling import check_no_signaling

F = Fraction
Q = (2, 2)


def _zero_game():
    spec = random_game(0)
    spec.reject.clear()
    return build_verifier(spec)


def test_update_examples():
    W = np.random.default_rng(0).random((3, 2))
    assert (mwum_update(W, np.zeros_like(W), 0.1) == W).all()
    assert np.allclose(mwum_update(np.ones((2, 2)), np.ones((2, 2)), 0.01), 0.99)
    with pytest.raises(InvariantViolation):
        mwum_update(np.ones((1, 1)), np.array([[200.0]]), 0.01)


def test_iteration_counts():
    assert iteration_count(4, 0.01) == 13863
    assert SolverConfig(delta=0.1).iteration_count(4) == 13863
    assert SolverConfig(delta=0.25).iteration_count(4) == 2219
    assert SolverConfig(delta=0.125).iteration_count(4) == 8873
    assert iteration_count(1, 0.01) == 1
    assert SolverConfig(delta=0.1, iterations=7).iteration_count(4) == 7


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(delta=0)
    with pytest.raises(DomainError):
        SolverConfig(delta=0.1, oracle="magic")
    with pytest.raises(DomainError):
        SolverConfig(delta=6).learning_rate


def test_rationalize_stochastic():
    M = np.array([[1 / 3, 0.1], [2 / 3, 0.9]])
    Qm = rationalize_stochastic(M)
    assert tensor.is_stochastic(Qm)
    assert all(x.denominator <= 10**6 for x in Qm.ravel())
    assert np.abs(tensor.as_float(Qm) - M).max() <= 1e-6


def test_all_reject_value_is_one():
    V = build_verifier(always_reject())
    res = solve_equilibrium(V, SolverConfig(delta=0.5))
    assert res.value_estimate == pytest.approx(1.0, abs=1e-12)
    assert res.loss_bound_violations == 0


def test_zero_game_value_is_zero():
    res = solve_equilibrium(_zero_game(), SolverConfig(delta=0.5, certify=True))
    assert res.value_estimate <= 1e-12
    assert res.lambda_value == 0
    assert res.certified_gap_alice == 0 and res.certified_gap_bob <= 0


def test_chsh_one_team(chsh_verifier):
    res = solve_equilibrium(chsh_verifier, SolverConfig(delta=0.1, certify=True))
    assert 0.9 <= res.value_estimate <= 1.0
    assert res.lambda_value == 1
    assert res.iterations_planned == 1


def test_random_game_certified():
    V = build_verifier(random_game(2))
    res = solve_equilibrium(V, SolverConfig(delta=0.3, certify=True, record_trace=True))
    assert abs(res.value_estimate - float(res.lambda_value)) <= 0.3
    assert res.certified_gap_alice <= 0.3 and res.certified_gap_bob <= 0.3
    assert check_no_signaling(res.alice, Q, Q)[0] == 0
    assert check_no_signaling(res.bob, Q, Q)[0] <= 1e-9
    assert len(res.trace) == res.iterations_run == res.iterations_planned
    assert res.loss_bound_violations == 0
    for X in res.alice_triple:
        assert tensor.is_stochastic(X)


def test_early_exit_stops_with_certified_gaps():
    V = build_verifier(random_game(3))
    res = solve_equilibrium(V, SolverConfig(delta=0.2, early_exit=True))
    assert res.iterations_run <= res.iterations_planned
    from nosig.mwum import certify

    certify(V, res)
    assert res.certified_gap_alice <= 0.2 and res.certified_gap_bob <= 0.2


def test_float_rounding_path():
    V = build_verifier(random_game(4))
    res = solve_equilibrium(V, SolverConfig(delta=0.5, exact_rounding=False))
    assert res.alice.dtype == np.float64
    assert res.rounding_clamp <= 1e-12
    assert check_no_signaling(res.alice, Q, Q)[0] <= 1e-9


def test_compiled_loop_matches_generic_loop(chsh_verifier):
    S = tensor.as_float(phi(chsh_verifier, np.array([[F(1)]], dtype=object)))
    game = _complement_game(S, chsh_verifier.floating.p_bob, Q, Q)
    config = SolverConfig(delta=0.3, iterations=200, record_trace=True, exact_rounding=False)
    fast = solve_equilibrium(game, config)
    slow = solve_equilibrium(game, config, oracle=lambda S_, d: np.ones((1, 1)))
    assert np.allclose(fast.trace, slow.trace, rtol=0, atol=1e-12)
    for X, Y in zip(fast.alice_triple, slow.alice_triple):
        assert np.allclose(X, Y, rtol=0, atol=1e-12)
    assert fast.value_estimate == pytest.approx(slow.value_estimate, abs=1e-12)
    assert fast.loss_bound_violations == slow.loss_bound_violations == 0


def test_recursive_best_response_trivial_bob():
    B = best_response_recursive(np.array([[0.2, 0.3]]), 0.1, np.array([0.5, 0.5]), (2, 1), (1, 1))
    assert B.tolist() == [[1.0, 1.0]]


def test_recursive_best_response_all_reject():
    p = np.full(4, 0.25)
    S = np.broadcast_to(p, (4, 4)).copy()
    B = best_response_recursive(S, 0.2, p, Q, Q)
    assert float((S * B).sum()) == pytest.approx(1.0, abs=1e-12)


def test_recursive_best_response_chsh(chsh_verifier):
    S = tensor.as_float(phi(chsh_verifier, np.array([[F(1)]], dtype=object)))
    B = best_response_recursive(S, 0.1, chsh_verifier.floating.p_bob, Q, Q)
    assert float((S * B).sum()) >= 0.9
    assert check_no_signaling(B, Q, Q)[0] <= 1e-9


def test_recursive_best_response_rejects_bad_payoff():
    with pytest.raises(DomainError):
        best_response_recursive(np.full((4, 4), 2.0), 0.1, np.full(4, 0.25), Q, Q)


def test_recursive_oracle_end_to_end():
    V = build_verifier(random_game(0))
    res = solve_equilibrium(V, SolverConfig(delta=0.5, oracle="recursive", certify=True))
    assert abs(res.value_estimate - float(res.lambda_value)) <= 0.5


def test_decide_trivial_games():
    assert decide(build_verifier(always_reject()), 0.9, 0.1)[0] == "no-instance"
    assert decide(_zero_game(), 0.9, 0.1)[0] == "yes-instance"
    with pytest.raises(DomainError):
        decide(_zero_game(), 0.1, 0.9)


def test_decide_competing_chsh():
    from nosig.generators import competing_chsh

    # exact rejection value is 0, inside the yes region [0, 1 - c]
    verdict, res = decide(build_verifier(competing_chsh()), 0.9, 0.3)
    assert verdict == "yes-instance"


def test_decide_random_game_both_sides():
    V = build_verifier(random_game(0))  # exact value 0.4751...
    assert decide(V, 0.5, 0.05)[0] == "yes-instance"
    assert decide(V, 0.95, 0.6)[0] == "no-instance"
