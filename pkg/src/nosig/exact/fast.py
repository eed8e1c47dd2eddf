"""Best-response oracle used inside the iteration loop.

Solves the same linear program as :func:`nosig.exact.oracle.best_response_exact`
but in floating point and without rebuilding the problem every call: small
polytopes are scanned vertex by vertex (an LP optimum is attained at a
vertex), larger ones go to HiGHS.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from nosig.errors import InvariantViolation
from nosig.exact.polytope import NoSignalingPolytope, _independent_rows, vertex_strategies


class VertexOracle:
    def __init__(self, qdims, adims):
        self.qdims, self.adims = tuple(qdims), tuple(adims)
        self.shape = (adims[0] * adims[1], qdims[0] * qdims[1])
        verts = vertex_strategies(self.qdims, self.adims)
        if verts is not None:
            self.vertices = np.array([v.ravel() for v in verts], dtype=np.float64)
            self._lp = None
        else:
            poly = NoSignalingPolytope(self.qdims, self.adims)
            rows, rhs = _independent_rows(poly.rows, poly.rhs)
            self.vertices = None
            self._lp = (np.array(rows, dtype=np.float64), np.array(rhs, dtype=np.float64))

    def __call__(self, S, delta=0.0) -> np.ndarray:
        s = np.asarray(S, dtype=np.float64).ravel()
        if self.vertices is not None:
            return self.vertices[int(np.argmax(self.vertices @ s))].reshape(self.shape)
        E, f = self._lp
        res = linprog(-s, A_eq=E, b_eq=f, bounds=(0, None), method="highs")
        if res.status != 0:
            raise InvariantViolation("oracle", f"LP best response failed: {res.message}")
        B = np.clip(res.x, 0.0, None).reshape(self.shape)
        return B / B.sum(axis=0)
