"""Penalty-augmented multiplicative weights for no-signaling equilibria.

Team Alice runs multiplicative weights on every column of a stochastic
triple ``(A, A0, A1)``; Team Bob answers each round with a near-best
no-signaling reply plus optimal penalties on the triple's signaling
defects.  Averages of both sides are near-optimal for the penalized game,
and rounding the averaged triple yields a no-signaling strategy for Alice.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from nosig import tensor
from nosig.errors import DomainError, InvariantViolation
from nosig.game import SpaceDims, VerifierMatrix, f_adjoint, phi, signaling_defects
from nosig.nosignaling import optimal_penalties, round_to_no_signaling

log = logging.getLogger(__name__)

ORACLES = ("exact-lp", "recursive")
BOUND_TOL = 1e-12
RATIONAL_DENOMINATOR = 10**6


@dataclass
class SolverConfig:
    delta: float
    epsilon: float | None = None
    iterations: int | None = None
    oracle: str = "exact-lp"
    early_exit: bool = False
    seed: int = 0
    check_bounds: bool = True
    record_trace: bool = False
    certify: bool = False
    exact_rounding: bool = True

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be positive, got {self.delta}")
        if self.epsilon is not None and not 0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.iterations is not None and self.iterations < 1:
            raise DomainError("iterations must be at least 1")
        if self.oracle not in ORACLES:
            raise DomainError(f"unknown oracle {self.oracle!r}; choose from {ORACLES}")

    @property
    def learning_rate(self) -> float:
        eps = self.delta / 10 if self.epsilon is None else self.epsilon
        if not 0 < eps < 0.5:
            raise DomainError(f"learning rate {eps} outside (0, 1/2); delta must be below 5")
        return eps

    def iteration_count(self, answer_dim: int) -> int:
        if self.iterations is not None:
            return self.iterations
        return iteration_count(answer_dim, self.learning_rate)


def iteration_count(answer_dim: int, epsilon: float) -> int:
    """``ceil(ln(dim A01) / ε²)``, at least one."""
    return max(1, math.ceil(math.log(answer_dim) / epsilon**2))


@dataclass
class SolveResult:
    alice: np.ndarray
    bob: np.ndarray
    value_estimate: float
    iterations_run: int
    alice_triple: tuple[np.ndarray, np.ndarray, np.ndarray]
    certified_gap_alice: Fraction | None = None
    certified_gap_bob: Fraction | None = None
    lambda_value: Fraction | None = None
    loss_bound_violations: int = 0
    rounding_clamp: float = 0.0
    trace: list[float] | None = None
    iterations_planned: int = 0
    config: SolverConfig | None = field(default=None, repr=False)


def mwum_update(W, M, epsilon: float) -> np.ndarray:
    """``W ⊠ (1 - εM)``; refuses to produce a nonpositive weight."""
    W = np.asarray(W, dtype=np.float64)
    factor = 1.0 - epsilon * np.asarray(M, dtype=np.float64)
    if (factor <= 0).any():
        raise InvariantViolation("mwum_update", "loss too large for the learning rate; a weight would vanish")
    out = W * factor
    if (out <= 0).any():
        raise InvariantViolation("mwum_update", "weight underflow")
    return out


def rationalize_stochastic(M, max_denominator: int = RATIONAL_DENOMINATOR) -> np.ndarray:
    """Nearby exact stochastic matrix: bounded denominators, columns summing to 1."""
    Q = tensor.as_exact(np.clip(np.asarray(M, dtype=np.float64), 0.0, None), max_denominator)
    for j in range(Q.shape[1]):
        col = Q[:, j]
        k = max(range(len(col)), key=lambda r: col[r])
        Q[k, j] += 1 - sum(col, Fraction(0))
        if Q[k, j] < 0:
            raise InvariantViolation("rationalize", "column cannot be repaired")
    return Q


class _LossBounds:
    """Counts loss entries outside ``[0, 3π_i]`` and ``[-π_{i_c}, 0]``."""

    def __init__(self, p_alice, qdims, tol=BOUND_TOL):
        self.upper = 3.0 * p_alice
        blocks = p_alice.reshape(qdims)
        self.pi = (blocks.sum(axis=1), blocks.sum(axis=0))
        self.tol = tol
        self.violations = 0

    def __call__(self, M, M0, M1) -> None:
        self.violations += int(((M < -self.tol) | (M > self.upper + self.tol)).sum())
        for c, Mc in enumerate((M0, M1)):
            self.violations += int(((Mc > self.tol) | (Mc < -self.pi[c] - self.tol)).sum())


Oracle = Callable[[np.ndarray, float], np.ndarray]


def make_oracle(dims: SpaceDims, p_bob, kind: str) -> Oracle:
    """Best-response oracle for Team Bob against a hard-wired verifier ``S``."""
    qd, ad = dims.bob_questions, dims.bob_answers
    if dims.b01 == 1:
        ones = np.ones((1, dims.t01))
        return lambda S, delta: ones
    if kind == "exact-lp":
        from nosig.exact.fast import VertexOracle

        return VertexOracle(qd, ad)
    if kind == "recursive":
        return lambda S, delta: best_response_recursive(S, delta, p_bob, qd, ad)
    raise DomainError(f"unknown oracle {kind!r}")


def solve_equilibrium(V: VerifierMatrix, config: SolverConfig, oracle: Oracle | None = None) -> SolveResult:
    """Run the penalized multiplicative-weights scheme and round Alice's average.

    ``oracle`` overrides ``config.oracle``; it receives ``Φ_V(A^t)`` and the
    accuracy ``δ/2`` and must return a no-signaling reply for Team Bob.
    """
    Vf = V.floating
    d = V.dims
    eps = config.learning_rate
    T = config.iteration_count(d.a01)
    if d.bob_trivial and oracle is None and not config.early_exit:
        sums, trace, violations, T_run = _run_trivial(Vf, eps, T, config)
        B_avg = np.ones((1, 1))
    else:
        if oracle is None:
            oracle = make_oracle(d, Vf.p_bob, config.oracle)
        sums, B_avg, trace, violations, T_run = _run_general(V, Vf, eps, T, config, oracle)
    A_avg, A0_avg, A1_avg = (s / T_run for s in sums)
    value = float(np.sum(trace[:T_run])) / T_run

    result = _finish(V, (A_avg, A0_avg, A1_avg), B_avg, value, T_run, config)
    result.loss_bound_violations = violations
    result.iterations_planned = T
    if config.record_trace:
        result.trace = [float(x) for x in trace[:T_run]]
    if violations:
        log.warning("%d loss entries fell outside their proven bounds", violations)
    return result


def _finish(V, triple, B_avg, value, T_run, config, certify_lambda=None) -> SolveResult:
    d = V.dims
    qd, ad = d.alice_questions, d.alice_answers
    if config.exact_rounding:
        exact_triple = tuple(rationalize_stochastic(X) for X in triple)
        A_ns = round_to_no_signaling(*exact_triple, qd, ad)
        clamp = 0.0
    else:
        A_ns, clamp = round_to_no_signaling(*triple, qd, ad, return_clamp=True)
    result = SolveResult(
        alice=A_ns,
        bob=B_avg,
        value_estimate=value,
        iterations_run=T_run,
        alice_triple=triple,
        rounding_clamp=clamp,
        config=config,
    )
    if config.certify:
        certify(V, result, lam=certify_lambda)
    return result


def certify(V: VerifierMatrix, result: SolveResult, lam=None) -> SolveResult:
    """Fill in exact optimality gaps of both returned strategies."""
    from nosig.exact.oracle import lambda_exact, optimality_gap

    if lam is None:
        lam = lambda_exact(V)[0]
    result.lambda_value = lam
    result.certified_gap_alice = optimality_gap(V, "alice", result.alice, lam)
    result.certified_gap_bob = optimality_gap(V, "bob", result.bob, lam)
    return result


def _run_trivial(Vf: VerifierMatrix, eps, T, config):
    from nosig._kernels import WEIGHT_UNDERFLOW, trivial_opponent_mwum

    d = Vf.dims
    C = np.ascontiguousarray(Vf.matrix.reshape(d.a01, d.s01), dtype=np.float64)
    p = np.ascontiguousarray(Vf.p_alice, dtype=np.float64)
    A_sum, A0_sum, A1_sum, trace, violations, status = trivial_opponent_mwum(
        C, p, d.s0, d.s1, d.a0, d.a1, float(eps), int(T), BOUND_TOL
    )
    if status == WEIGHT_UNDERFLOW:
        raise InvariantViolation("mwum_update", "a weight would become nonpositive")
    if not config.check_bounds:
        violations = 0
    return (A_sum, A0_sum, A1_sum), trace, int(violations), T


def _run_general(V, Vf, eps, T, config, oracle):
    d = Vf.dims
    qd, ad = d.alice_questions, d.alice_answers
    p_alice = Vf.p_alice
    bounds = _LossBounds(p_alice, qd)
    A = np.full((d.a01, d.s01), 1.0 / d.a01)
    A0 = np.full((d.a0, d.s0), 1.0 / d.a0)
    A1 = np.full((d.a1, d.s1), 1.0 / d.a1)
    sums = [np.zeros_like(A), np.zeros_like(A0), np.zeros_like(A1)]
    B_sum = np.zeros((d.b01, d.t01))
    trace = np.zeros(T)
    check_every = max(1, math.ceil(T / 100))
    lam = None

    for t in range(T):
        P0, P1 = optimal_penalties(A, A0, A1, p_alice, qd, ad)
        S = phi(Vf, A)
        B = np.asarray(oracle(S, config.delta / 2), dtype=np.float64)
        D0, D1 = signaling_defects(A, A0, A1, qd, ad)
        trace[t] = float(np.dot(S.ravel(), B.ravel()) + np.dot(D0.ravel(), P0.ravel()) + np.dot(D1.ravel(), P1.ravel()))
        for acc, X in zip(sums, (A, A0, A1)):
            acc += X
        B_sum += B

        if config.early_exit and (t + 1) % check_every == 0 and t + 1 < T:
            if lam is None:
                from nosig.exact.oracle import lambda_exact

                lam = lambda_exact(V)[0]
            n = t + 1
            probe = _finish(
                V, tuple(s / n for s in sums), B_sum / n, 0.0, n,
                SolverConfig(delta=config.delta, certify=True), certify_lambda=lam,
            )
            if probe.certified_gap_alice <= config.delta and probe.certified_gap_bob <= config.delta:
                log.info("early exit after %d of %d iterations", n, T)
                return sums, B_sum / n, trace, bounds.violations, n
        if t == T - 1:
            break

        M, M0, M1 = f_adjoint(Vf, B, P0, P1)
        if config.check_bounds:
            bounds(M, M0, M1)
        A = tensor.normalize_columns(mwum_update(A, M, eps))
        A0 = tensor.normalize_columns(mwum_update(A0, M0, eps))
        A1 = tensor.normalize_columns(mwum_update(A1, M1, eps))
    return sums, B_sum / T, trace, bounds.violations, T


def _complement_game(S, p_bob, qdims, adims, tol=tensor.FLOAT_TOL) -> VerifierMatrix:
    """Verifier ``e p_bob* - S`` for a one-team game played by Bob's provers."""
    S = np.asarray(S, dtype=np.float64)
    p = np.asarray(p_bob, dtype=np.float64)
    upper = np.broadcast_to(p, S.shape)
    if (S < -tol).any() or (S > upper + tol).any():
        raise DomainError("best_response_recursive: need 0 <= S <= e p_bob*")
    Vc = np.clip(upper - S, 0.0, upper)
    dims = SpaceDims(qdims[0], qdims[1], 1, 1, adims[0], adims[1], 1, 1)
    return VerifierMatrix(dims, Vc, p.reshape(-1, 1))


def best_response_recursive(S, delta: float, p_bob, qdims, adims) -> np.ndarray:
    """Near-best no-signaling reply computed by the same algorithm one level down.

    Bob's provers become the minimizing team of a one-team game whose
    verifier is ``e p_bob* - S``; since every stochastic ``B`` has
    ``<e p_bob*, B> = 1``, a ``δ``-optimal minimizer there is a ``δ``-optimal
    maximizer of ``<S, B>``.
    """
    if adims[0] * adims[1] == 1:
        return np.ones((1, qdims[0] * qdims[1]))
    game = _complement_game(S, p_bob, qdims, adims)
    inner = solve_equilibrium(game, SolverConfig(delta=delta, exact_rounding=False, check_bounds=False))
    return inner.alice


def decide(V: VerifierMatrix, completeness: float, soundness: float, config: SolverConfig | None = None):
    """Separate ``λ <= 1 - c`` (yes) from ``λ >= 1 - s`` (no).

    ``V`` pays out on rejection, so completeness ``c`` caps the rejection
    value of yes-instances at ``1 - c`` and soundness ``s`` floors that of
    no-instances at ``1 - s``.  Solving to accuracy ``(c - s) / 3`` and
    comparing with the midpoint ``1 - (c + s) / 2`` separates the two.
    Returns ``(verdict, result)``.
    """
    if not completeness > soundness:
        raise DomainError(f"completeness {completeness} must exceed soundness {soundness}")
    delta = (completeness - soundness) / 3
    if config is None:
        config = SolverConfig(delta=delta)
    else:
        config = SolverConfig(**{**config.__dict__, "delta": delta})
    result = solve_equilibrium(V, config)
    threshold = 1 - (completeness + soundness) / 2
    verdict = "yes-instance" if result.value_estimate < threshold else "no-instance"
    return verdict, result
