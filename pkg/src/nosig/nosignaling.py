"""No-signaling checks, optimal penalties and the rounding construction.

All routines are written for one team at a time, described by its question
factors ``qdims = (q0, q1)`` and answer factors ``adims = (r0, r1)``; they
apply equally to Team Alice ``(S0, S1) -> (A0, A1)`` and Team Bob
``(T0, T1) -> (B0, B1)``.  Exact (Fraction) inputs give exact outputs.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from nosig import tensor
from nosig.errors import DomainError, InvariantViolation, StructureError
from nosig.game import Pair, signaling_defects

CLAMP_TOL = 1e-12


def _marginal_blocks(A, qdims: Pair, adims: Pair, c: int) -> np.ndarray:
    """Marginal of prover ``c``'s answers, as an array ``[k_c, i0, i1]``."""
    m = tensor.marginal(A, adims, over=1 - c)
    return m.reshape(adims[c], qdims[0], qdims[1])


def check_no_signaling(A, qdims: Pair, adims: Pair, tol=None):
    """Measure how far ``A`` is from satisfying the no-signaling equalities.

    Returns ``(violation, witnesses)``.  ``violation`` is the largest
    max-norm gap between two marginal columns of one prover that differ only
    in the teammate's question.  When it is within ``tol`` (0 for exact input,
    1e-9 otherwise) ``witnesses`` is the pair ``(A0, A1)`` obtained by
    averaging those marginal columns over the teammate's question; otherwise
    it is ``None``.
    """
    A = np.asarray(A)
    exact = tensor.is_exact(A)
    if tol is None:
        tol = 0 if exact else tensor.FLOAT_TOL
    if A.shape != (adims[0] * adims[1], qdims[0] * qdims[1]):
        raise StructureError(f"strategy shape {A.shape} does not match {qdims}->{adims}")
    tensor.require_stochastic(A, "check_no_signaling")

    violation = Fraction(0) if exact else 0.0
    witnesses = []
    for c in (0, 1):
        m = _marginal_blocks(A, qdims, adims, c)
        other = 2 - c  # axis of the teammate's question in m
        spread = m.max(axis=other) - m.min(axis=other)
        if spread.size:
            violation = max(violation, spread.max())
        avg = m.sum(axis=other)
        avg = avg / qdims[1 - c] if not exact else avg * Fraction(1, qdims[1 - c])
        witnesses.append(tensor.normalize_columns(avg))
    if violation <= tol:
        return violation, tuple(witnesses)
    return violation, None


def optimal_penalties(A, A0, A1, p_alice, qdims: Pair, adims: Pair):
    """Penalties charging ``π_i`` on every positive entry of each defect ``Δ_c``."""
    p = np.asarray(p_alice)
    exact = tensor.is_exact(A) and tensor.is_exact(p)
    if not exact:
        A, A0, A1, p = (tensor.as_float(X) for X in (A, A0, A1, p))
    if p.shape != (qdims[0] * qdims[1],):
        raise StructureError(f"p_alice shape {p.shape} does not match questions {qdims}")
    out = []
    for delta in signaling_defects(A, A0, A1, qdims, adims):
        row = np.broadcast_to(p, delta.shape)
        if exact:
            zero = tensor.zeros_like_mode(delta.shape, exact=True)
            out.append(np.where((delta > 0).astype(bool), row, zero))
        else:
            out.append(np.where(delta > 0, row, 0.0))
    return tuple(out)


def _ratio(num, den, exact: bool):
    """``num / den`` entrywise, 0 where ``den == 0``."""
    if exact:
        out = np.empty(num.shape, dtype=object)
        for idx, n in np.ndenumerate(num):
            d = den[idx]
            out[idx] = Fraction(n) / d if d != 0 else Fraction(0)
        return out
    return np.divide(num, den, out=np.zeros(num.shape), where=den != 0)


def _check_nonneg(x, who: str, exact: bool, tol: float = tensor.FLOAT_TOL) -> None:
    if exact:
        if any(v < 0 for v in np.ravel(x)):
            raise DomainError(f"{who}: negative entry")
    elif (np.asarray(x) < -tol).any():
        raise DomainError(f"{who}: negative entry")


def preimage_of_marginal(a, dvec, adims: Pair, over: int = 1, tol: float = tensor.FLOAT_TOL):
    """A vector ``0 <= d <= a`` whose marginal (summing factor ``over``) is ``dvec``.

    Each required mass ``dvec[k]`` is spread over the fibre above ``k`` in
    proportion to ``a``.  Works columnwise on matrices.
    """
    a = np.asarray(a)
    dvec = np.asarray(dvec)
    exact = tensor.is_exact(a) and tensor.is_exact(dvec)
    if not exact:
        a, dvec = tensor.as_float(a), tensor.as_float(dvec)
    vector = a.ndim == 1
    if vector:
        a, dvec = a[:, None], dvec[:, None]
    _check_nonneg(a, "preimage_of_marginal(a)", exact, tol)
    _check_nonneg(dvec, "preimage_of_marginal(dvec)", exact, tol)
    blocks = a.reshape(adims[0], adims[1], a.shape[1])
    s = blocks.sum(axis=over)
    if dvec.shape != s.shape:
        raise StructureError(f"preimage_of_marginal: dvec shape {dvec.shape} != {s.shape}")
    excess = dvec - s
    if (any(x > 0 for x in excess.ravel()) if exact else (excess > tol).any()):
        raise DomainError("preimage_of_marginal: dvec exceeds the marginal of a")
    ratio = np.expand_dims(_ratio(dvec, s, exact), axis=over)
    d = (blocks * ratio).reshape(a.shape)
    return d[:, 0] if vector else d


def consistent_join(t0, t1, tol: float = tensor.FLOAT_TOL):
    """A nonnegative ``t`` over ``A0 ⊗ A1`` with marginals ``t0`` and ``t1``.

    ``t[(k0,k1)] = t0[k0] t1[k1] / s`` where ``s`` is the common sum (zero
    when ``s == 0``).  Works columnwise on matrices.
    """
    t0 = np.asarray(t0)
    t1 = np.asarray(t1)
    exact = tensor.is_exact(t0) and tensor.is_exact(t1)
    if not exact:
        t0, t1 = tensor.as_float(t0), tensor.as_float(t1)
    vector = t0.ndim == 1
    if vector:
        t0, t1 = t0[:, None], t1[:, None]
    if t0.shape[1] != t1.shape[1]:
        raise StructureError("consistent_join: column counts differ")
    _check_nonneg(t0, "consistent_join(t0)", exact, tol)
    _check_nonneg(t1, "consistent_join(t1)", exact, tol)
    s0, s1 = t0.sum(axis=0), t1.sum(axis=0)
    mismatch = s0 - s1
    if (any(x != 0 for x in mismatch) if exact else (np.abs(mismatch) > tol).any()):
        raise DomainError("consistent_join: marginals have different totals")
    scale = _ratio(np.ones_like(s0) if not exact else np.full(s0.shape, Fraction(1), dtype=object), s0, exact)
    t = t0[:, None, :] * t1[None, :, :] * scale[None, None, :]
    t = t.reshape(t0.shape[0] * t1.shape[0], t0.shape[1])
    return t[:, 0] if vector else t


class _Clamp:
    """Tracks float clean-up of tiny negatives between rounding stages."""

    def __init__(self, exact: bool):
        self.exact = exact
        self.magnitude = 0.0

    def __call__(self, X, stage: str):
        if self.exact:
            if any(x < 0 for x in X.ravel()):
                raise InvariantViolation(stage, "negative entry in exact arithmetic")
            return X
        low = X.min(initial=0.0)
        if low < -CLAMP_TOL:
            raise InvariantViolation(stage, f"entry {low:.3e} below clamp tolerance")
        self.magnitude = max(self.magnitude, -low)
        return np.maximum(X, 0.0)


def _leq(X, Y, exact: bool) -> bool:
    diff = X - Y
    if exact:
        return all(x <= 0 for x in diff.ravel())
    return bool((diff <= CLAMP_TOL).all())


def round_to_no_signaling(A, A0, A1, qdims: Pair, adims: Pair, return_clamp: bool = False):
    """Turn a stochastic triple into a no-signaling matrix witnessed by ``A0, A1``.

    Removes the excess mass of prover 0's marginal (``D0``), then of prover
    1's (``C1``), and refills the deficits with a product-form ``T`` whose
    marginals are exactly the shortfalls.  The result never increases the
    penalized objective against any stochastic opponent.

    In float mode negatives down to -1e-12 are clamped and columns are
    renormalized at the end; with ``return_clamp`` the largest clamped
    magnitude is returned alongside the matrix.
    """
    A, A0, A1 = (np.asarray(X) for X in (A, A0, A1))
    exact = all(tensor.is_exact(X) for X in (A, A0, A1))
    if not exact:
        A, A0, A1 = (tensor.as_float(X) for X in (A, A0, A1))
    for name, X in (("A", A), ("A0", A0), ("A1", A1)):
        tensor.require_stochastic(X, f"round_to_no_signaling({name})")
    clamp = _Clamp(exact)

    S0 = tensor.spread_columns(A0, qdims, keep=0)
    S1 = tensor.spread_columns(A1, qdims, keep=1)
    m0 = tensor.marginal(A, adims, over=1)
    m1 = tensor.marginal(A, adims, over=0)
    delta0 = tensor.positive_part(m0 - S0)
    delta1 = tensor.positive_part(m1 - S1)
    if not _leq(delta0, m0, exact):
        raise InvariantViolation("delta0", "positive defect exceeds the marginal")

    D0 = preimage_of_marginal(A, delta0, adims, over=1, tol=CLAMP_TOL)
    R = clamp(A - D0, "A-D0")

    gamma1 = tensor.positive_part(tensor.marginal(R, adims, over=0) - S1)
    if not _leq(gamma1, delta1, exact):
        raise InvariantViolation("gamma1", "second defect exceeds the original defect")
    C1 = preimage_of_marginal(R, gamma1, adims, over=0, tol=CLAMP_TOL)
    R = clamp(R - C1, "A-D0-C1")

    T0 = clamp(S0 - tensor.marginal(R, adims, over=1), "T0")
    T1 = clamp(S1 - tensor.marginal(R, adims, over=0), "T1")
    gap = T0.sum(axis=0) - T1.sum(axis=0)
    if (any(x != 0 for x in gap) if exact else np.abs(gap).max(initial=0.0) > 1e-9):
        raise InvariantViolation("T", "slack marginals have different totals")
    if not exact:
        # equalize totals so the join sees consistent inputs
        T1 = T1 * np.divide(T0.sum(axis=0), T1.sum(axis=0), out=np.ones(T1.shape[1]), where=T1.sum(axis=0) > 0)
    T = consistent_join(T0, T1, tol=1e-9)

    A_ns = R + T
    if not exact:
        A_ns = tensor.normalize_columns(clamp(A_ns, "A_ns"))
    elif not tensor.is_stochastic(A_ns):
        raise InvariantViolation("A_ns", "result is not stochastic")
    if return_clamp:
        return A_ns, clamp.magnitude
    return A_ns
