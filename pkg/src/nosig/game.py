"""Games, verifier matrices and the verifier-side linear maps.

A verifier matrix ``V`` has rows indexed by answer pairs ``(k, l)`` in
``A01 ⊗ B01`` and columns by question pairs ``(i, j)`` in ``S01 ⊗ T01``.
Entry ``V[(k,l),(i,j)]`` is the probability of asking ``(i, j)`` times the
rejection payout for answers ``(k, l)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np

from nosig import tensor
from nosig.errors import DomainError, StructureError

Pair = tuple[int, int]
RejectKey = tuple[int, int, int, int, int, int, int, int]


@dataclass(frozen=True)
class SpaceDims:
    """Dimensions of the four question spaces and four answer spaces."""

    s0: int
    s1: int
    t0: int
    t1: int
    a0: int
    a1: int
    b0: int
    b1: int

    def __post_init__(self):
        for name, value in self.as_dict().items():
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise DomainError(f"dimension {name} must be a positive integer, got {value!r}")

    @classmethod
    def uniform(cls, d: int) -> "SpaceDims":
        return cls(d, d, d, d, d, d, d, d)

    @classmethod
    def from_list(cls, values) -> "SpaceDims":
        values = list(values)
        if len(values) != 8:
            raise DomainError(f"expected eight dimensions, got {len(values)}")
        return cls(*(int(v) for v in values))

    def as_dict(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in ("s0", "s1", "t0", "t1", "a0", "a1", "b0", "b1")}

    def as_list(self) -> list[int]:
        return list(self.as_dict().values())

    @property
    def alice_questions(self) -> Pair:
        return (self.s0, self.s1)

    @property
    def alice_answers(self) -> Pair:
        return (self.a0, self.a1)

    @property
    def bob_questions(self) -> Pair:
        return (self.t0, self.t1)

    @property
    def bob_answers(self) -> Pair:
        return (self.b0, self.b1)

    @property
    def s01(self) -> int:
        return self.s0 * self.s1

    @property
    def t01(self) -> int:
        return self.t0 * self.t1

    @property
    def a01(self) -> int:
        return self.a0 * self.a1

    @property
    def b01(self) -> int:
        return self.b0 * self.b1

    @property
    def bob_trivial(self) -> bool:
        return self.t01 == 1 and self.b01 == 1


@dataclass
class GameSpec:
    """Explicit description of a two-turn game.

    ``question_dist`` maps ``((i0, i1), (j0, j1))`` to a probability and
    ``reject`` maps ``(i0, i1, j0, j1, k0, k1, l0, l1)`` to a rejection
    payout in ``[0, 1]`` (1 for a plain reject).  Missing keys mean
    probability zero and acceptance respectively.
    """

    dims: SpaceDims
    question_dist: dict[tuple[Pair, Pair], Fraction]
    reject: dict[RejectKey, Fraction] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        d = self.dims
        total = Fraction(0)
        for (i, j), p in self.question_dist.items():
            _check_index("i", i, d.alice_questions)
            _check_index("j", j, d.bob_questions)
            p = Fraction(p)
            if p < 0:
                raise DomainError(f"negative probability {p} for questions {i},{j}")
            total += p
        if total != 1:
            raise DomainError(f"question distribution sums to {total}, not 1")
        for key, w in self.reject.items():
            if len(key) != 8:
                raise DomainError(f"reject entry {key} is not an 8-tuple")
            i0, i1, j0, j1, k0, k1, l0, l1 = key
            _check_index("i", (i0, i1), d.alice_questions)
            _check_index("j", (j0, j1), d.bob_questions)
            _check_index("k", (k0, k1), d.alice_answers)
            _check_index("l", (l0, l1), d.bob_answers)
            w = Fraction(w)
            if not 0 <= w <= 1:
                raise DomainError(f"payout weight {w} outside [0, 1] at {key}")


def _check_index(name: str, pair, bounds: Pair) -> None:
    if len(pair) != 2:
        raise DomainError(f"index {name}={pair!r} is not a pair")
    for x, n in zip(pair, bounds):
        if not 0 <= int(x) < n:
            raise DomainError(f"index {name}={tuple(pair)} out of range for dims {bounds}")


class VerifierMatrix:
    """The matrix ``V`` with the question distribution and its marginals.

    ``question_probs`` is the ``(dim S01, dim T01)`` matrix of ``π_{i,j}``.
    The stored arrays are exact when built from a :class:`GameSpec`; a float
    twin is available through :attr:`floating`.
    """

    def __init__(self, dims: SpaceDims, matrix, question_probs, tol: float = tensor.FLOAT_TOL):
        matrix = np.asarray(matrix)
        question_probs = np.asarray(question_probs)
        if matrix.shape != (dims.a01 * dims.b01, dims.s01 * dims.t01):
            raise StructureError(f"verifier matrix shape {matrix.shape} does not match {dims}")
        if question_probs.shape != (dims.s01, dims.t01):
            raise StructureError(f"question distribution shape {question_probs.shape} does not match {dims}")
        self.dims = dims
        self.matrix = matrix
        self.question_probs = question_probs
        self.exact = tensor.is_exact(matrix)
        self._validate(tol)

    def _validate(self, tol: float) -> None:
        slack = 0 if self.exact else tol
        if any(x < -slack for x in self.question_probs.ravel()):
            raise DomainError("negative question probability")
        total = self.question_probs.sum()
        if (total != 1) if self.exact else abs(total - 1.0) > tol:
            raise DomainError(f"question distribution sums to {total}, not 1")
        upper = np.broadcast_to(self.question_probs.reshape(1, -1), self.matrix.shape)
        if (self.matrix < -slack).any() or (self.matrix > upper + slack).any():
            raise DomainError("verifier matrix must satisfy 0 <= V <= e p*")

    @property
    def p(self) -> np.ndarray:
        """Question distribution as a vector over ``S01 ⊗ T01``."""
        return self.question_probs.reshape(-1)

    @cached_property
    def p_alice(self) -> np.ndarray:
        return self.question_probs.sum(axis=1)

    @cached_property
    def p_bob(self) -> np.ndarray:
        return self.question_probs.sum(axis=0)

    @cached_property
    def floating(self) -> "VerifierMatrix":
        if not self.exact:
            return self
        return VerifierMatrix(self.dims, tensor.as_float(self.matrix), tensor.as_float(self.question_probs))

    @cached_property
    def phi_operator(self) -> np.ndarray:
        """``vec(Φ_V(A)) = phi_operator @ vec(A)`` with row-major vec."""
        d = self.dims
        v4 = self.matrix.reshape(d.a01, d.b01, d.s01, d.t01)
        return np.ascontiguousarray(v4.transpose(1, 3, 0, 2).reshape(d.b01 * d.t01, d.a01 * d.s01))

    @cached_property
    def phi_adjoint_operator(self) -> np.ndarray:
        return np.ascontiguousarray(self.phi_operator.T)

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"VerifierMatrix({self.dims}, {mode})"


def build_verifier(spec: GameSpec) -> VerifierMatrix:
    """Materialize ``V`` so that column ``(i, j)`` is ``π_{i,j} v_{i,j}``."""
    spec.validate()
    d = spec.dims
    probs = tensor.zeros_like_mode((d.s01, d.t01), exact=True)
    for (i, j), p in spec.question_dist.items():
        probs[tensor.encode(*i, d.s1), tensor.encode(*j, d.t1)] += Fraction(p)
    V = tensor.zeros_like_mode((d.a01 * d.b01, d.s01 * d.t01), exact=True)
    for (i0, i1, j0, j1, k0, k1, l0, l1), w in spec.reject.items():
        i = tensor.encode(i0, i1, d.s1)
        j = tensor.encode(j0, j1, d.t1)
        k = tensor.encode(k0, k1, d.a1)
        l = tensor.encode(l0, l1, d.b1)
        V[k * d.b01 + l, i * d.t01 + j] = probs[i, j] * Fraction(w)
    return VerifierMatrix(d, V, probs)


def _operands(V: VerifierMatrix, X) -> tuple[VerifierMatrix, np.ndarray]:
    X = np.asarray(X)
    if V.exact and tensor.is_exact(X):
        return V, X
    return V.floating, tensor.as_float(X)


def phi(V: VerifierMatrix, A) -> np.ndarray:
    """``Φ_V(A)``: Team Alice's strategy hard-wired into the verifier."""
    d = V.dims
    Vx, A = _operands(V, A)
    if A.shape != (d.a01, d.s01):
        raise StructureError(f"phi: expected A of shape {(d.a01, d.s01)}, got {A.shape}")
    return (Vx.phi_operator @ A.reshape(-1)).reshape(d.b01, d.t01)


def phi_adjoint(V: VerifierMatrix, B) -> np.ndarray:
    """``Φ_V*(B)``, so that ``<A, Φ_V*(B)> = <V, A ⊗ B>``."""
    d = V.dims
    Vx, B = _operands(V, B)
    if B.shape != (d.b01, d.t01):
        raise StructureError(f"phi_adjoint: expected B of shape {(d.b01, d.t01)}, got {B.shape}")
    return (Vx.phi_adjoint_operator @ B.reshape(-1)).reshape(d.a01, d.s01)


def payoff(V: VerifierMatrix, A, B):
    """Rejection probability ``<V, A ⊗ B>`` for stochastic ``A`` and ``B``."""
    tensor.require_stochastic(A, "payoff(A)")
    tensor.require_stochastic(B, "payoff(B)")
    S = phi(V, A)
    return tensor.inner(S, B if tensor.is_exact(S) else tensor.as_float(B))


def signaling_defects(A, A0, A1, qdims: Pair, adims: Pair) -> tuple[np.ndarray, np.ndarray]:
    """``Δ_c = marginal(A_c̄, A) - A_c ⊗ e*`` for both provers of one team."""
    A = np.asarray(A)
    if A.shape != (adims[0] * adims[1], qdims[0] * qdims[1]):
        raise StructureError(f"strategy shape {A.shape} does not match {qdims}->{adims}")
    for c, Ac in enumerate((A0, A1)):
        if np.shape(Ac) != (adims[c], qdims[c]):
            raise StructureError(f"witness {c} shape {np.shape(Ac)} != {(adims[c], qdims[c])}")
    d0 = tensor.marginal(A, adims, over=1) - tensor.spread_columns(A0, qdims, keep=0)
    d1 = tensor.marginal(A, adims, over=0) - tensor.spread_columns(A1, qdims, keep=1)
    return d0, d1


def f(V: VerifierMatrix, A, A0, A1):
    """``f_V(A, A0, A1) = (Φ_V(A), Δ0, Δ1)``."""
    d = V.dims
    if not (tensor.is_exact(A) and V.exact):
        A, A0, A1 = (tensor.as_float(X) for X in (A, A0, A1))
    d0, d1 = signaling_defects(A, A0, A1, d.alice_questions, d.alice_answers)
    return phi(V, A), d0, d1


def f_adjoint(V: VerifierMatrix, B, P0, P1):
    """``f_V*(B, Π0, Π1)``; the three blocks are the MWUM loss matrices."""
    d = V.dims
    q, a = d.alice_questions, d.alice_answers
    for c, P in enumerate((P0, P1)):
        if np.shape(P) != (a[c], d.s01):
            raise StructureError(f"penalty {c} shape {np.shape(P)} != {(a[c], d.s01)}")
    if not (tensor.is_exact(B) and V.exact):
        B, P0, P1 = (tensor.as_float(X) for X in (B, P0, P1))
    M = (
        phi_adjoint(V, B)
        + tensor.marginal_adjoint(P0, a, over=1)
        + tensor.marginal_adjoint(P1, a, over=0)
    )
    M0 = -tensor.collapse_columns(P0, q, keep=0)
    M1 = -tensor.collapse_columns(P1, q, keep=1)
    return M, M0, M1


def triple_inner(x, y):
    """Inner product of two triples of matrices."""
    return sum((tensor.inner(u, v) for u, v in zip(x, y)), 0)


def question_pairs(dims: SpaceDims):
    """All ``((i0, i1), (j0, j1))`` in index order."""
    for i0, i1, j0, j1 in product(range(dims.s0), range(dims.s1), range(dims.t0), range(dims.t1)):
        yield (i0, i1), (j0, j1)
