"""Exact rational linear programming: two-phase simplex with Bland's rule.

Solves ``min c.x  s.t.  A x = b, x >= 0`` over Fractions and returns a dual
vector ``y`` with ``A^T y <= c`` and ``b.y = c.x`` at optimality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rational import dot, solve

ZERO = Fraction(0)


@dataclass(frozen=True)
class LPResult:
    status: str  # optimal | infeasible | unbounded
    x: tuple[Fraction, ...] = ()
    y: tuple[Fraction, ...] = ()
    value: Fraction | None = None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        p = row[c]
        if p != 1:
            self.rows[r] = row = [v / p for v in row]
            self.rhs[r] /= p
        for i, other in enumerate(self.rows):
            if i != r and other[c] != 0:
                f = other[c]
                self.rows[i] = [a - f * b for a, b in zip(other, row)]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def reduced_costs(self, cost: Sequence[Fraction]) -> list[Fraction]:
        red = list(cost)
        for r, bvar in enumerate(self.basis):
            cb = cost[bvar]
            if cb != 0:
                red = [d - cb * a for d, a in zip(red, self.rows[r])]
        return red

    def run(self, cost: Sequence[Fraction], allowed: int) -> str:
        """Minimize over columns < ``allowed``; Bland's rule avoids cycling."""
        while True:
            red = self.reduced_costs(cost)
            enter = next((j for j in range(allowed) if red[j] < 0), None)
            if enter is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)


def solve_lp(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Sequence[Fraction]) -> LPResult:
    m, n = len(A), len(c)
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    c = [Fraction(v) for v in c]
    if m == 0:
        if any(v < 0 for v in c):
            return LPResult("unbounded")
        return LPResult("optimal", tuple([ZERO] * n), (), ZERO)
    rows, rhs = [], []
    for row, bi in zip(A, b):
        sign = -1 if bi < 0 else 1
        rows.append([sign * v for v in row] + [Fraction(0)] * m)
        rhs.append(sign * bi)
    for i in range(m):
        rows[i][n + i] = Fraction(1)
    t = _Tableau(rows, rhs, [n + i for i in range(m)])
    phase1 = [ZERO] * n + [Fraction(1)] * m
    t.run(phase1, n + m)
    if sum((t.rhs[r] for r, v in enumerate(t.basis) if v >= n), ZERO) != 0:
        return LPResult("infeasible")
    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if t.basis[r] >= n:
            col = next((j for j in range(n) if t.rows[r][j] != 0), None)
            if col is None:
                continue
            t.pivot(r, col)
        keep.append(r)
    t.rows = [t.rows[r][:n] for r in keep]
    t.rhs = [t.rhs[r] for r in keep]
    t.basis = [t.basis[r] for r in keep]
    status = t.run(c, n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [ZERO] * n
    for r, v in enumerate(t.basis):
        x[v] = t.rhs[r]
    y = _duals(A, c, t.basis)
    return LPResult("optimal", tuple(x), tuple(y), dot(c, x))


def _duals(A: list[list[Fraction]], c: list[Fraction], basis: list[int]) -> list[Fraction]:
    """Solve y^T A_B = c_B on an independent row subset; other rows get 0."""
    m = len(A)
    cols = [[A[i][j] for i in range(m)] for j in basis]  # |B| x m
    sol = solve(cols, [c[j] for j in basis], m)
    if sol is None:  # pragma: no cover - basis columns are independent by construction
        raise ArithmeticError("singular basis")
    return sol
