"""Arithmetic and exact linear algebra over the prime field GF(2^31 - 1).

Matrices are plain ``int64`` numpy arrays with entries reduced into ``[0, P)``.
Every product of two reduced entries is below 2^62, so one multiply followed
by ``% P`` never overflows; accumulation is reduced after each term.
"""

from __future__ import annotations

import numpy as np

P = 2**31 - 1


class DivisionByZero(ZeroDivisionError):
    pass


class RankDeficient(ValueError):
    pass


def add(a: int, b: int) -> int:
    return (a + b) % P


def sub(a: int, b: int) -> int:
    return (a - b) % P


def mul(a: int, b: int) -> int:
    return (a * b) % P


def inv(a: int) -> int:
    a %= P
    if a == 0:
        raise DivisionByZero("0 has no inverse in GF(p)")
    return pow(a, P - 2, P)


def asfield(a) -> np.ndarray:
    """Copy ``a`` into a reduced int64 array (negative integers wrap mod P)."""
    return np.mod(np.asarray(a, dtype=np.int64), P)


def random_matrix(rng: np.random.Generator, shape, nonzero: bool = False) -> np.ndarray:
    low = 1 if nonzero else 0
    return rng.integers(low, P, size=shape, dtype=np.int64)


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for t in range(A.shape[1]):
        out = (out + np.outer(A[:, t], B[t, :]) % P) % P
    return out


def _eliminate(M: np.ndarray, ncols: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form on the first ``ncols`` columns, in place."""
    rows = M.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            M[[r, p]] = M[[p, r]]
        M[r] = M[r] * inv(int(M[r, c])) % P
        f = M[:, c].copy()
        f[r] = 0
        hit = np.flatnonzero(f)
        if hit.size:
            M[hit] = (M[hit] - np.outer(f[hit], M[r]) % P) % P
        pivots.append(c)
        r += 1
    return M, pivots


def rank(A: np.ndarray) -> int:
    A = asfield(A)
    if A.size == 0:
        return 0
    _, pivots = _eliminate(A.copy() if A.ndim == 2 else A.reshape(1, -1), A.shape[-1])
    return len(pivots)


def solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve ``A @ X = B`` for ``X``; ``A`` may have more rows than unknowns.

    Raises RankDeficient unless ``A`` has full column rank, and ValueError if
    an overdetermined system is inconsistent.
    """
    A = asfield(A)
    B = asfield(B)
    vector = B.ndim == 1
    if vector:
        B = B.reshape(-1, 1)
    m, n = A.shape
    if B.shape[0] != m:
        raise ValueError(f"row mismatch: A has {m} rows, B has {B.shape[0]}")
    if m < n:
        raise RankDeficient(f"{m} equations for {n} unknowns")
    M, pivots = _eliminate(np.hstack([A, B]), n)
    if len(pivots) < n:
        raise RankDeficient(f"rank {len(pivots)} < {n} unknowns")
    if np.any(M[n:, n:]):
        raise ValueError("inconsistent overdetermined system")
    X = M[:n, n:]
    return X.ravel() if vector else X
