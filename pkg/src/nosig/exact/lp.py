"""Dense two-phase simplex method in exact rational arithmetic.

Small problems only: the tableau is a list of Python lists of
``Fraction``.  Pivoting uses Dantzig's rule and falls back to Bland's rule
during runs of degenerate pivots, which rules out cycling.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from nosig.errors import InvariantViolation

DEGENERATE_RUN = 8


class LPError(Exception):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    value: Fraction
    x: list[Fraction]
    pivots: int


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int], ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols  # structural columns; rhs is the last entry of each row
        self.obj: list[Fraction] = []
        self.pivots = 0

    def set_objective(self, cost: Sequence[Fraction]) -> None:
        # reduced costs: c_j - sum_r c_{basis[r]} * rows[r][j]; last entry is -value
        obj = list(cost) + [Fraction(0)]
        for r, b in enumerate(self.basis):
            cb = obj[b]
            if cb:
                row = self.rows[r]
                for j, v in enumerate(row):
                    if v:
                        obj[j] -= cb * v
        self.obj = obj

    def pivot(self, r: int, c: int) -> None:
        prow = self.rows[r]
        pv = prow[c]
        if pv != 1:
            inv = 1 / pv
            prow = [v * inv if v else v for v in prow]
            self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for rr, row in enumerate(self.rows):
            if rr == r:
                continue
            factor = row[c]
            if factor:
                for j in nz:
                    row[j] -= factor * prow[j]
        factor = self.obj[c]
        if factor:
            obj = self.obj
            for j in nz:
                obj[j] -= factor * prow[j]
        self.basis[r] = c
        self.pivots += 1

    def run(self, allowed: Sequence[bool]) -> None:
        """Minimize the current objective over columns flagged in ``allowed``."""
        degenerate = 0
        while True:
            obj = self.obj
            bland = degenerate >= DEGENERATE_RUN
            enter = -1
            best = Fraction(0)
            for j in range(self.ncols):
                if allowed[j] and obj[j] < 0:
                    if bland:
                        enter = j
                        break
                    if obj[j] < best:
                        best, enter = obj[j], j
            if enter < 0:
                return
            leave = -1
            ratio = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    t = row[-1] / a
                    if (
                        ratio is None
                        or t < ratio
                        or (t == ratio and self.basis[r] < self.basis[leave])
                    ):
                        ratio, leave = t, r
            if leave < 0:
                raise Unbounded("objective is unbounded below")
            degenerate = degenerate + 1 if ratio == 0 else 0
            self.pivot(leave, enter)


def solve_lp(
    c: Sequence,
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    free: Sequence[int] = (),
    maximize: bool = False,
) -> LPResult:
    """Optimize ``c·x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub``.

    Variables are nonnegative except those listed in ``free``.  All data are
    converted to Fractions and the optimum is exact.
    """
    n = len(c)
    free_set = set(free)
    # column layout: original vars, negative parts of free vars, slacks
    neg_of = {v: n + k for k, v in enumerate(sorted(free_set))}
    n_struct = n + len(neg_of)
    n_slack = len(A_ub)
    n_cols = n_struct + n_slack

    rows: list[list[Fraction]] = []
    for row, b in zip(A_eq, b_eq):
        rows.append(_expand_row(row, b, n, neg_of, n_cols, None))
    for s_idx, (row, b) in enumerate(zip(A_ub, b_ub)):
        rows.append(_expand_row(row, b, n, neg_of, n_cols, n_struct + s_idx))
    m = len(rows)
    for r in range(m):
        if rows[r][-1] < 0:
            rows[r] = [-v for v in rows[r]]

    # phase 1: artificial basis
    total = n_cols + m
    tab_rows = []
    for r, row in enumerate(rows):
        art = [Fraction(0)] * m
        art[r] = Fraction(1)
        tab_rows.append(row[:-1] + art + [row[-1]])
    tab = _Tableau(tab_rows, list(range(n_cols, total)), total)
    tab.set_objective([Fraction(0)] * n_cols + [Fraction(1)] * m)
    tab.run([True] * total)
    if tab.obj[-1] != 0:
        raise Infeasible("constraints are infeasible")

    # drive artificials out of the basis; drop redundant rows
    r = 0
    while r < len(tab.rows):
        if tab.basis[r] >= n_cols:
            row = tab.rows[r]
            col = next((j for j in range(n_cols) if row[j] != 0), None)
            if col is None:
                del tab.rows[r]
                del tab.basis[r]
                continue
            tab.pivot(r, col)
        r += 1
    for row in tab.rows:
        del row[n_cols:total]
    tab.ncols = n_cols

    sign = -1 if maximize else 1
    cost = [sign * _q(v) for v in c] + [Fraction(0)] * (n_cols - n)
    for v, j in neg_of.items():
        cost[j] = -cost[v]
    tab.set_objective(cost)
    tab.run([True] * n_cols)

    values = [Fraction(0)] * n_cols
    for r, b in enumerate(tab.basis):
        values[b] = tab.rows[r][-1]
    x = values[:n]
    for v, j in neg_of.items():
        x[v] -= values[j]
    value = sum((_q(ci) * xi for ci, xi in zip(c, x)), Fraction(0))
    _verify(x, A_eq, b_eq, A_ub, b_ub, free_set)
    return LPResult(value=value, x=x, pivots=tab.pivots)


def _expand_row(coeffs, rhs, n, neg_of, n_cols, slack_col):
    if len(coeffs) != n:
        raise ValueError(f"constraint row has {len(coeffs)} entries, expected {n}")
    out = [Fraction(0)] * (n_cols + 1)
    for j, v in enumerate(coeffs):
        if v:
            q = _q(v)
            out[j] = q
            if j in neg_of:
                out[neg_of[j]] = -q
    if slack_col is not None:
        out[slack_col] = Fraction(1)
    out[-1] = _q(rhs)
    return out


def _verify(x, A_eq, b_eq, A_ub, b_ub, free_set) -> None:
    for j, v in enumerate(x):
        if v < 0 and j not in free_set:
            raise InvariantViolation("lp", f"variable {j} negative in solution")
    for row, b in zip(A_eq, b_eq):
        if sum((_q(a) * xi for a, xi in zip(row, x) if a), Fraction(0)) != _q(b):
            raise InvariantViolation("lp", "equality constraint violated")
    for row, b in zip(A_ub, b_ub):
        if sum((_q(a) * xi for a, xi in zip(row, x) if a), Fraction(0)) > _q(b):
            raise InvariantViolation("lp", "inequality constraint violated")
