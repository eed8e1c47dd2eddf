"""Constraint form and vertices of a team's no-signaling polytope."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from nosig.game import Pair

MAX_BASES = 250_000


class NoSignalingPolytope:
    """Stochastic matrices ``Q01 -> R01`` whose single-prover marginals do not
    depend on the teammate's question.

    The variable vector starts with the strategy matrix in row-major order
    (entry ``(k, i)`` at ``k * dim(Q01) + i``).  With ``witnesses=True`` the
    two witness matrices follow and the no-signaling rows read
    ``marginal(A) - A_c ⊗ e* = 0``; without them the rows equate marginal
    columns that differ only in the teammate's question.
    """

    def __init__(self, qdims: Pair, adims: Pair, witnesses: bool = False):
        self.qdims = tuple(qdims)
        self.adims = tuple(adims)
        self.witnesses = witnesses
        self.nq = qdims[0] * qdims[1]
        self.na = adims[0] * adims[1]
        self.n_strategy = self.na * self.nq
        self.witness_offsets = (
            self.n_strategy,
            self.n_strategy + adims[0] * qdims[0],
        )
        self.n_vars = self.n_strategy + (
            adims[0] * qdims[0] + adims[1] * qdims[1] if witnesses else 0
        )
        self.rows, self.rhs = self._build()

    def var(self, k: int, i: int) -> int:
        return k * self.nq + i

    def _marginal_row(self, c: int, kc: int, i: int) -> list[int]:
        row = [0] * self.n_vars
        r0, r1 = self.adims
        for k_other in range(self.adims[1 - c]):
            k = kc * r1 + k_other if c == 0 else k_other * r1 + kc
            row[self.var(k, i)] += 1
        return row

    def _build(self):
        rows, rhs = [], []
        for i in range(self.nq):
            row = [0] * self.n_vars
            for k in range(self.na):
                row[self.var(k, i)] = 1
            rows.append(row)
            rhs.append(1)
        q0, q1 = self.qdims
        for c in (0, 1):
            for kc in range(self.adims[c]):
                for i0 in range(q0):
                    for i1 in range(q1):
                        ic, iother = (i0, i1) if c == 0 else (i1, i0)
                        i = i0 * q1 + i1
                        row = self._marginal_row(c, kc, i)
                        if self.witnesses:
                            row[self.witness_offsets[c] + kc * self.qdims[c] + ic] -= 1
                        elif iother == 0:
                            continue
                        else:
                            base = (i0, 0) if c == 0 else (0, i1)
                            ref = self._marginal_row(c, kc, base[0] * q1 + base[1])
                            row = [a - b for a, b in zip(row, ref)]
                        rows.append(row)
                        rhs.append(0)
        return rows, rhs

    def strategy(self, x) -> np.ndarray:
        """Strategy matrix from a variable vector."""
        return np.array(list(x[: self.n_strategy]), dtype=object).reshape(self.na, self.nq)

    def witness_matrices(self, x):
        if not self.witnesses:
            raise ValueError("polytope was built without witness variables")
        out = []
        for c in (0, 1):
            start = self.witness_offsets[c]
            size = self.adims[c] * self.qdims[c]
            out.append(np.array(list(x[start : start + size]), dtype=object).reshape(self.adims[c], self.qdims[c]))
        return tuple(out)

    def contains(self, x) -> bool:
        if any(v < 0 for v in x):
            return False
        return all(
            sum((a * v for a, v in zip(row, x) if a), Fraction(0)) == b
            for row, b in zip(self.rows, self.rhs)
        )

    def vertices(self, max_bases: int = MAX_BASES) -> np.ndarray | None:
        """All vertices as an exact object array ``(count, n_strategy)``.

        Enumerates every basis of the equality system, so it is only feasible
        for tiny polytopes; returns ``None`` when more than ``max_bases``
        bases would be examined.
        """
        if self.witnesses:
            raise ValueError("vertex enumeration uses the witness-free form")
        return _vertices(self.qdims, self.adims, max_bases)


def _independent_rows(rows, rhs):
    """Exact row reduction keeping a maximal independent subset of rows."""
    kept, kept_rhs, echelon = [], [], []
    for row, b in zip(rows, rhs):
        vec = [Fraction(v) for v in row]
        for pivot, ref in echelon:
            if vec[pivot]:
                factor = vec[pivot] / ref[pivot]
                vec = [a - factor * r for a, r in zip(vec, ref)]
        pivot = next((j for j, v in enumerate(vec) if v), None)
        if pivot is not None:
            echelon.append((pivot, vec))
            kept.append(row)
            kept_rhs.append(b)
    return kept, kept_rhs


@lru_cache(maxsize=16)
def _vertices(qdims, adims, max_bases):
    poly = NoSignalingPolytope(qdims, adims, witnesses=False)
    rows, rhs = _independent_rows(poly.rows, poly.rhs)
    n, r = poly.n_vars, len(rows)
    if comb(n, r) > max_bases:
        return None
    E = np.array(rows, dtype=np.float64)
    f = np.array(rhs, dtype=np.float64)
    bases = np.array(list(combinations(range(n), r)), dtype=np.intp)
    sub = E[:, bases].transpose(1, 0, 2)  # (count, r, r)
    det = np.linalg.det(sub)
    ok = np.abs(det) > 1e-9
    bases, sub = bases[ok], sub[ok]
    xb = np.linalg.solve(sub, np.broadcast_to(f, (len(sub), r))[..., None])[..., 0]
    feasible = (xb > -1e-9).all(axis=1)
    found = {}
    for basis, vals in zip(bases[feasible], xb[feasible]):
        x = [Fraction(0)] * n
        for j, v in zip(basis, vals):
            x[j] = Fraction(float(v)).limit_denominator(1 << 20)
        if not poly.contains(x):
            x = _exact_basic_solution(rows, rhs, basis, n)
            if x is None or not poly.contains(x):
                continue
        found.setdefault(tuple(x), None)
    verts = np.empty((len(found), n), dtype=object)
    for idx, x in enumerate(sorted(found)):
        verts[idx] = x
    return verts


def _exact_basic_solution(rows, rhs, basis, n):
    r = len(rows)
    M = [[Fraction(rows[i][j]) for j in basis] + [Fraction(rhs[i])] for i in range(r)]
    for col in range(r):
        piv = next((i for i in range(col, r) if M[i][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for i in range(r):
            if i != col and M[i][col]:
                factor = M[i][col]
                M[i] = [a - factor * b for a, b in zip(M[i], M[col])]
    x = [Fraction(0)] * n
    for k, j in enumerate(basis):
        x[j] = M[k][r]
    return x


def vertex_strategies(qdims: Pair, adims: Pair) -> list[np.ndarray] | None:
    """Vertices reshaped into strategy matrices."""
    verts = _vertices(tuple(qdims), tuple(adims), MAX_BASES)
    if verts is None:
        return None
    na, nq = adims[0] * adims[1], qdims[0] * qdims[1]
    return [v.reshape(na, nq) for v in verts]

