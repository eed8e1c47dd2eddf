"""Compiled inner loop for games whose opposing team has a single strategy.

When the opponent's question and answer spaces are trivial its only
strategy is ``[[1]]``, so the loss ``Φ_V*(B)`` is the constant matrix
``C`` and every iteration reduces to penalties, losses and the update.
This is the same iteration as the generic loop in :mod:`nosig.mwum`;
tests compare the two step by step.
"""

import numba
import numpy as np

OK = 0
WEIGHT_UNDERFLOW = 1


@numba.njit(cache=True)
def trivial_opponent_mwum(C, p, s0, s1, a0, a1, eps, T, bound_tol):
    a01 = a0 * a1
    s01 = s0 * s1
    A = np.full((a01, s01), 1.0 / a01)
    A0 = np.full((a0, s0), 1.0 / a0)
    A1 = np.full((a1, s1), 1.0 / a1)
    A_sum = np.zeros((a01, s01))
    A0_sum = np.zeros((a0, s0))
    A1_sum = np.zeros((a1, s1))
    P0 = np.zeros((a0, s01))
    P1 = np.zeros((a1, s01))
    M = np.zeros((a01, s01))
    M0 = np.zeros((a0, s0))
    M1 = np.zeros((a1, s1))
    trace = np.zeros(T)
    pi0 = np.zeros(s0)
    pi1 = np.zeros(s1)
    for i0 in range(s0):
        for i1 in range(s1):
            pi0[i0] += p[i0 * s1 + i1]
            pi1[i1] += p[i0 * s1 + i1]
    violations = 0

    for t in range(T):
        obj = 0.0
        for k in range(a01):
            for i in range(s01):
                obj += C[k, i] * A[k, i]
        for i0 in range(s0):
            for i1 in range(s1):
                i = i0 * s1 + i1
                for k0 in range(a0):
                    m = 0.0
                    for k1 in range(a1):
                        m += A[k0 * a1 + k1, i]
                    d = m - A0[k0, i0]
                    if d > 0.0:
                        P0[k0, i] = p[i]
                        obj += d * p[i]
                    else:
                        P0[k0, i] = 0.0
                for k1 in range(a1):
                    m = 0.0
                    for k0 in range(a0):
                        m += A[k0 * a1 + k1, i]
                    d = m - A1[k1, i1]
                    if d > 0.0:
                        P1[k1, i] = p[i]
                        obj += d * p[i]
                    else:
                        P1[k1, i] = 0.0
        trace[t] = obj
        A_sum += A
        A0_sum += A0
        A1_sum += A1
        if t == T - 1:
            break

        M0[:, :] = 0.0
        M1[:, :] = 0.0
        for i0 in range(s0):
            for i1 in range(s1):
                i = i0 * s1 + i1
                for k0 in range(a0):
                    for k1 in range(a1):
                        M[k0 * a1 + k1, i] = C[k0 * a1 + k1, i] + P0[k0, i] + P1[k1, i]
                    M0[k0, i0] -= P0[k0, i]
                for k1 in range(a1):
                    M1[k1, i1] -= P1[k1, i]
        for i in range(s01):
            for k in range(a01):
                if M[k, i] < -bound_tol or M[k, i] > 3.0 * p[i] + bound_tol:
                    violations += 1
        for i0 in range(s0):
            for k0 in range(a0):
                if M0[k0, i0] > bound_tol or M0[k0, i0] < -pi0[i0] - bound_tol:
                    violations += 1
        for i1 in range(s1):
            for k1 in range(a1):
                if M1[k1, i1] > bound_tol or M1[k1, i1] < -pi1[i1] - bound_tol:
                    violations += 1

        for i in range(s01):
            total = 0.0
            for k in range(a01):
                w = A[k, i] * (1.0 - eps * M[k, i])
                if w <= 0.0:
                    return A_sum, A0_sum, A1_sum, trace, violations, WEIGHT_UNDERFLOW
                A[k, i] = w
                total += w
            for k in range(a01):
                A[k, i] /= total
        for i0 in range(s0):
            total = 0.0
            for k0 in range(a0):
                w = A0[k0, i0] * (1.0 - eps * M0[k0, i0])
                if w <= 0.0:
                    return A_sum, A0_sum, A1_sum, trace, violations, WEIGHT_UNDERFLOW
                A0[k0, i0] = w
                total += w
            for k0 in range(a0):
                A0[k0, i0] /= total
        for i1 in range(s1):
            total = 0.0
            for k1 in range(a1):
                w = A1[k1, i1] * (1.0 - eps * M1[k1, i1])
                if w <= 0.0:
                    return A_sum, A0_sum, A1_sum, trace, violations, WEIGHT_UNDERFLOW
                A1[k1, i1] = w
                total += w
            for k1 in range(a1):
                A1[k1, i1] /= total
    return A_sum, A0_sum, A1_sum, trace, violations, OK
