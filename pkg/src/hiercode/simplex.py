"""Exact tableau simplex over ``fractions.Fraction`` with Bland's rule.

``solve_standard`` is a general two-phase solver for ``min c @ x`` subject to
``A @ x == b, x >= 0``; ``solve_covering`` handles the covering programs of the
allocation step through their packing dual. Bland's rule (lowest
eligible index enters, lowest basic index breaks ratio ties) rules out cycling
and makes the returned vertex a deterministic function of the input.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class LPError(RuntimeError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


def _pivot(T: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    pr = T[row]
    piv = pr[col]
    if piv != 1:
        T[row] = pr = [v / piv for v in pr]
    for r, other in enumerate(T):
        if r != row and other[col] != 0:
            f = other[col]
            T[r] = [a - f * b for a, b in zip(other, pr)]
    basis[row] = col


def _run(T: list[list[Fraction]], basis: list[int], allowed: int) -> None:
    """Iterate on tableau ``T`` whose last row is the reduced-cost row.

    Only columns ``< allowed`` may enter. The right-hand side is the last column.
    """
    m = len(T) - 1
    cost = T[m]
    while True:
        col = next((j for j in range(allowed) if cost[j] < 0), None)
        if col is None:
            return
        best = None
        for r in range(m):
            a = T[r][col]
            if a > 0:
                key = (T[r][-1] / a, basis[r])
                if best is None or key < best[0]:
                    best = (key, r)
        if best is None:
            raise Unbounded(f"column {col} is unbounded")
        _pivot(T, basis, best[1], col)
        cost = T[m]


def solve_standard(c: Sequence, A: Sequence[Sequence], b: Sequence) -> tuple[list[Fraction], Fraction]:
    """Return ``(x, objective)`` for ``min c@x, A@x == b, x >= 0``."""
    m, n = len(A), len(c)
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    c = [Fraction(v) for v in c]
    for r in range(m):
        if b[r] < 0:
            A[r] = [-v for v in A[r]]
            b[r] = -b[r]

    # phase 1: one artificial per row, columns n..n+m-1
    T = [A[r] + [Fraction(int(r == q)) for q in range(m)] + [b[r]] for r in range(m)]
    phase1 = [-sum((A[r][j] for r in range(m)), Fraction(0)) for j in range(n)]
    T.append(phase1 + [Fraction(0)] * m + [-sum(b, Fraction(0))])
    basis = list(range(n, n + m))
    _run(T, basis, n + m)
    if T[m][-1] != 0:
        raise Infeasible("phase 1 optimum is positive")

    # drive degenerate artificials out of the basis, drop redundant rows
    r = 0
    while r < len(basis):
        if basis[r] >= n:
            col = next((j for j in range(n) if T[r][j] != 0), None)
            if col is None:
                del T[r], basis[r]
                continue
            _pivot(T, basis, r, col)
        r += 1

    rows = len(basis)
    T = [row[:n] + [row[-1]] for row in T[:rows]]
    cost = c + [Fraction(0)]
    for r in range(rows):
        f = cost[basis[r]]
        if f != 0:
            cost = [a - f * v for a, v in zip(cost, T[r])]
    T.append(cost)
    _run(T, basis, n)

    x = [Fraction(0)] * n
    for r, j in enumerate(basis):
        x[j] = T[r][-1]
    obj = sum((ci * xi for ci, xi in zip(c, x)), Fraction(0))
    return x, obj


def solve_covering(costs: Sequence, rows: Sequence[Sequence[int]]) -> tuple[list[Fraction], Fraction]:
    """``min costs@x`` s.t. each row's listed variables sum to >= 1, ``x >= 0``.

    Costs must be non-negative. The packing dual ``max sum(y)`` s.t.
    ``sum(y over rows containing j) <= costs[j]`` starts feasible at the
    origin, so no phase 1 is needed; ``x`` is read off the reduced costs of
    the dual slacks. Every vertex of the covering polyhedron has ``x <= 1``
    (a positive coordinate sits in some tight row summing to 1), so the
    returned solution also satisfies unit upper bounds.
    """
    n, m = len(costs), len(rows)
    costs = [Fraction(c) for c in costs]
    if any(c < 0 for c in costs):
        raise ValueError("covering costs must be non-negative")
    # dual tableau: one row per primal variable; columns y_0..y_{m-1}, slacks
    T = []
    for j in range(n):
        row = [Fraction(int(j in members)) for members in rows]
        row += [Fraction(int(q == j)) for q in range(n)]
        T.append(row + [costs[j]])
    T.append([Fraction(-1)] * m + [Fraction(0)] * n + [Fraction(0)])
    basis = list(range(m, m + n))
    _run(T, basis, m + n)
    x = T[n][m:m + n]
    if any(T[n][q] < 0 for q in range(m + n)):
        raise LPError("dual did not reach optimality")
    obj = sum((c * v for c, v in zip(costs, x)), Fraction(0))
    if obj != T[n][-1]:
        raise LPError(f"duality gap: primal {obj} != dual {T[n][-1]}")
    return list(x), obj
