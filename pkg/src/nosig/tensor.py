"""Dense linear algebra over two-factor composite spaces.

Matrices are plain 2-D numpy arrays.  Two numeric backends share every
routine: ``float64`` arrays, and ``object`` arrays holding
:class:`fractions.Fraction` entries for exact work.

Composite indices are zero-based and left-factor major: the pair
``(x0, x1)`` of a space ``X0 ⊗ X1`` lives at ``x0 * dim(X1) + x1``.  This
matches :func:`numpy.kron` and C-order reshapes, so a column over
``X0 ⊗ X1`` reshapes to a ``(dim X0, dim X1)`` block.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from nosig.errors import DomainError, StructureError

FLOAT_TOL = 1e-9


def encode(x0: int, x1: int, d1: int) -> int:
    return x0 * d1 + x1


def decode(index: int, d1: int) -> tuple[int, int]:
    return divmod(index, d1)


def is_exact(M) -> bool:
    return np.asarray(M).dtype == object


def as_exact(M, max_denominator: int | None = None) -> np.ndarray:
    """Return an object array of Fractions.

    Floats convert exactly (binary expansion) unless ``max_denominator`` is
    given, in which case the closest fraction with bounded denominator is used.
    """
    arr = np.asarray(M)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        q = x if isinstance(x, Fraction) else Fraction(x)
        if max_denominator is not None:
            q = q.limit_denominator(max_denominator)
        out[idx] = q
    return out


def as_float(M) -> np.ndarray:
    return np.asarray(M).astype(np.float64)


def zeros_like_mode(shape, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def kron(M, N) -> np.ndarray:
    """Kronecker product, ``(M ⊗ N)[(r,r'),(c,c')] = M[r,c] N[r',c']``."""
    return np.kron(np.asarray(M), np.asarray(N))


def _split_rows(M, factors, who: str) -> tuple[np.ndarray, bool]:
    M = np.asarray(M)
    vector = M.ndim == 1
    if vector:
        M = M[:, None]
    d0, d1 = factors
    if M.shape[0] != d0 * d1:
        raise StructureError(
            f"{who}: row dimension {M.shape[0]} does not factor as {d0}x{d1}"
        )
    return M.reshape(d0, d1, M.shape[1]), vector


def _check_over(over) -> None:
    if over not in (0, 1):
        raise StructureError(f"unknown factor {over!r}; expected 0 or 1")


def marginal(M, factors: tuple[int, int], over: int) -> np.ndarray:
    """Sum out one factor of the row space, column by column.

    ``over=1`` maps ``X0 ⊗ X1 -> X0`` (entry ``k`` is ``sum_y M[(k, y)]``);
    ``over=0`` maps ``X0 ⊗ X1 -> X1``.  Vectors are accepted and returned as
    vectors.
    """
    _check_over(over)
    blocks, vector = _split_rows(M, factors, "marginal")
    out = blocks.sum(axis=over)
    return out[:, 0] if vector else out


def marginal_adjoint(P, factors: tuple[int, int], over: int) -> np.ndarray:
    """Adjoint of :func:`marginal`: replicate each row across the summed factor."""
    _check_over(over)
    P = np.asarray(P)
    vector = P.ndim == 1
    if vector:
        P = P[:, None]
    keep = factors[1 - over]
    if P.shape[0] != keep:
        raise StructureError(
            f"marginal_adjoint: row dimension {P.shape[0]} != kept factor {keep}"
        )
    expanded = np.expand_dims(P, axis=over)
    out = np.broadcast_to(expanded, (factors[0], factors[1], P.shape[1]))
    out = out.reshape(factors[0] * factors[1], P.shape[1]).copy()
    return out[:, 0] if vector else out


def spread_columns(M, qfactors: tuple[int, int], keep: int) -> np.ndarray:
    """Column ``(i0, i1)`` of the result is column ``i_keep`` of ``M``.

    This is ``M ⊗ e*`` with the all-ones row placed on the question factor
    that is *not* kept, whichever side of the product it sits on.
    """
    _check_over(keep)
    M = np.asarray(M)
    if M.shape[1] != qfactors[keep]:
        raise StructureError(
            f"spread_columns: {M.shape[1]} columns != question factor {qfactors[keep]}"
        )
    expanded = np.expand_dims(M, axis=2 - keep)
    out = np.broadcast_to(expanded, (M.shape[0], qfactors[0], qfactors[1]))
    return out.reshape(M.shape[0], qfactors[0] * qfactors[1]).copy()


def collapse_columns(P, qfactors: tuple[int, int], keep: int) -> np.ndarray:
    """Adjoint of :func:`spread_columns`: sum columns over the other question index."""
    _check_over(keep)
    P = np.asarray(P)
    if P.shape[1] != qfactors[0] * qfactors[1]:
        raise StructureError(
            f"collapse_columns: {P.shape[1]} columns do not factor as "
            f"{qfactors[0]}x{qfactors[1]}"
        )
    blocks = P.reshape(P.shape[0], qfactors[0], qfactors[1])
    return blocks.sum(axis=2 - keep)


def positive_part(M) -> np.ndarray:
    M = np.asarray(M)
    if is_exact(M):
        out = np.empty(M.shape, dtype=object)
        for idx, x in np.ndenumerate(M):
            out[idx] = x if x > 0 else Fraction(0)
        return out
    return np.maximum(M, 0.0)


def inner(A, B):
    """Matrix inner product ``tr(A* B)``, summed in a fixed row-major order."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise StructureError(f"inner: shape mismatch {A.shape} vs {B.shape}")
    if is_exact(A) or is_exact(B):
        return sum((a * b for a, b in zip(A.ravel(), B.ravel())), Fraction(0))
    return float(np.dot(A.ravel(), B.ravel()))


def column_sums(M) -> np.ndarray:
    return np.asarray(M).sum(axis=0)


def is_stochastic(M, tol: float = FLOAT_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2:
        return False
    if is_exact(M):
        return all(x >= 0 for x in M.ravel()) and all(s == 1 for s in column_sums(M))
    return bool((M >= -tol).all() and np.abs(column_sums(M) - 1.0).max(initial=0.0) <= tol)


def require_stochastic(M, who: str, tol: float = FLOAT_TOL) -> None:
    if not is_stochastic(M, tol):
        raise DomainError(f"{who}: matrix is not column-stochastic")


def normalize_columns(W) -> np.ndarray:
    """Scale each column of a nonnegative matrix to sum to one.

    An all-zero column becomes the uniform column.
    """
    W = np.asarray(W)
    if is_exact(W):
        if any(x < 0 for x in W.ravel()):
            raise DomainError("normalize_columns: negative entry")
        out = np.empty(W.shape, dtype=object)
        n = W.shape[0]
        for j in range(W.shape[1]):
            s = sum(W[:, j], Fraction(0))
            for i in range(n):
                out[i, j] = Fraction(W[i, j]) / s if s != 0 else Fraction(1, n)
        return out
    if (W < 0).any():
        raise DomainError("normalize_columns: negative entry")
    sums = W.sum(axis=0)
    out = np.empty_like(W, dtype=np.float64)
    nz = sums > 0
    out[:, nz] = W[:, nz] / sums[nz]
    out[:, ~nz] = 1.0 / W.shape[0]
    return out
