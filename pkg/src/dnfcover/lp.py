"""Exact rational linear algebra: Gaussian elimination and a two-phase simplex.

Everything here runs on :class:`fractions.Fraction`.  The simplex uses Bland's
rule, so it terminates on degenerate problems, and it keeps artificial columns
in the tableau so that dual values can be read off at the end of either phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class SingularMatrix(ArithmeticError):
    pass


def solve_exact(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve the square system ``a x = b`` exactly."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix(f"no pivot in column {col}")
        m[col], m[pivot] = m[pivot], m[col]
        inv = ONE / m[col][col]
        prow = [v * inv for v in m[col]]
        m[col] = prow
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                row = m[r]
                m[r] = [x - f * y for x, y in zip(row, prow)]
    return [m[r][n] for r in range(n)]


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction]
    value: Fraction
    duals: list[Fraction]  # y with reduced costs c - y^T A >= 0 at the optimum
    basis: list[int]


class _Tableau:
    def __init__(self, a, b):
        self.m = len(b)
        self.n = len(a[0]) if self.m else 0
        self.rows = []
        for i in range(self.m):
            row = [Fraction(v) for v in a[i]]
            rhs = Fraction(b[i])
            sign = -1 if rhs < 0 else 1
            art = [ZERO] * self.m
            art[i] = ONE
            self.rows.append([sign * v for v in row] + art + [sign * rhs])
        self.flip = [(-1 if Fraction(b[i]) < 0 else 1) for i in range(self.m)]
        self.basis = [self.n + i for i in range(self.m)]
        self.width = self.n + self.m

    def pivot(self, r, col):
        prow = self.rows[r]
        inv = ONE / prow[col]
        prow = [v * inv for v in prow]
        self.rows[r] = prow
        for i, row in enumerate(self.rows):
            if i != r and row[col] != 0:
                f = row[col]
                self.rows[i] = [x - f * y for x, y in zip(row, prow)]
        self.basis[r] = col

    def reduced_costs(self, cost):
        red = list(cost)
        for i, bcol in enumerate(self.basis):
            cb = cost[bcol]
            if cb != 0:
                row = self.rows[i]
                for j in range(self.width):
                    if row[j] != 0:
                        red[j] -= cb * row[j]
        return red

    def run(self, cost, allowed):
        while True:
            red = self.reduced_costs(cost)
            col = next((j for j in range(self.width) if allowed(j) and red[j] < 0), None)
            if col is None:
                return "optimal", red
            best = None
            for i, row in enumerate(self.rows):
                if row[col] > 0:
                    ratio = row[-1] / row[col]
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded", red
            self.pivot(best[1], col)

    def solution(self):
        x = [ZERO] * self.width
        for i, bcol in enumerate(self.basis):
            x[bcol] = self.rows[i][-1]
        return x


def simplex(a: Sequence[Sequence], b: Sequence, c: Sequence | None = None) -> LPResult:
    """Minimize ``c x`` subject to ``a x = b``, ``x >= 0`` (two-phase).

    With ``c`` omitted only phase one runs: the result is "optimal" with a
    feasible ``x`` or "infeasible" with phase-one duals ``y`` satisfying
    ``y a <= 0`` columnwise and ``y b > 0`` (a Farkas certificate).
    """
    tab = _Tableau(a, b)
    n, m = tab.n, tab.m
    phase1 = [ZERO] * n + [ONE] * m
    _, red = tab.run(phase1, lambda j: j < n)
    x = tab.solution()
    infeas = sum(x[n:], ZERO)
    # phase-one duals: reduced cost of artificial i is 1 - y_i (rows were sign-flipped)
    y1 = [(ONE - red[n + i]) * tab.flip[i] for i in range(m)]
    if infeas > 0:
        return LPResult("infeasible", x[:n], infeas, y1, list(tab.basis))
    # drive zero-level artificials out of the basis where possible
    for i, bcol in enumerate(tab.basis):
        if bcol >= n:
            col = next((j for j in range(n) if tab.rows[i][j] != 0), None)
            if col is not None:
                tab.pivot(i, col)
    if c is None:
        return LPResult("optimal", tab.solution()[:n], ZERO, y1, list(tab.basis))
    cost = [Fraction(v) for v in c] + [ZERO] * m
    status, red = tab.run(cost, lambda j: j < n)
    x = tab.solution()
    value = sum((cost[j] * x[j] for j in range(n)), ZERO)
    duals = [(-red[n + i]) * tab.flip[i] for i in range(m)]
    return LPResult(status, x[:n], value, duals, list(tab.basis))
