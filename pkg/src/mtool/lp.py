"""Dense exact-rational simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

The origin is feasible, so a single phase suffices. Pivoting follows
Bland's rule (smallest eligible index on entry and on ties when leaving),
which cannot cycle.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class Unbounded(Exception):
    pass


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence) -> tuple[Fraction, list[Fraction]]:
    m, n = len(A), len(c)
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("right-hand side must be nonnegative")
    # rows: [A | I | b]; basis starts at the slacks
    rows = [[Fraction(v) for v in A[i]] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(b[i])]
            for i in range(m)]
    cost = [Fraction(v) for v in c] + [Fraction(0)] * m
    basis = list(range(n, n + m))
    while True:
        # reduced cost of column j: c_j - c_B . column_j
        entering = None
        for j in range(n + m):
            if j in basis:
                continue
            reduced = cost[j] - sum(cost[basis[i]] * rows[i][j] for i in range(m))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            break
        leave, best = None, None
        for i in range(m):
            a = rows[i][entering]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise Unbounded("objective is unbounded")
        pivot = rows[leave][entering]
        rows[leave] = [v / pivot for v in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][entering]:
                f = rows[i][entering]
                rows[i] = [u - f * v for u, v in zip(rows[i], rows[leave])]
        basis[leave] = entering
    x = [Fraction(0)] * (n + m)
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    value = sum((cost[j] * x[j] for j in range(n)), Fraction(0))
    return value, x[:n]
