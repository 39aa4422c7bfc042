"""Exact rational linear programming.

A two-phase dense-tableau simplex over :class:`fractions.Fraction` with
Bland's anti-cycling rule.  Problems are posed as::

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                x >= 0

Infeasible problems come back with a Farkas vector ``y = (y_eq, y_ub)``
satisfying ``y_ub >= 0``, ``y @ A >= 0`` componentwise and ``y @ b < 0``,
which anyone can re-check with one matrix-vector product
(:func:`verify_farkas`).  Optimal solutions carry the dual vector so that
optimal values can be certified the same way.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "LpProblem",
    "LpSolution",
    "Feasibility",
    "as_fraction",
    "solve_lp",
    "solve_lp_feasibility",
    "verify_farkas",
    "format_fraction",
    "parse_fraction",
]


def as_fraction(value) -> Fraction:
    """Convert ``value`` to a Fraction without any rounding.

    Strings and Decimals are read digit by digit ("0.1" -> 1/10); floats
    are expanded to their exact binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, (str, Decimal)):
        return Fraction(value)
    f = float(value)
    if f != f or f in (float("inf"), float("-inf")):
        raise ValueError(f"non-finite coefficient {value!r}")
    return Fraction(f)


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _matrix(rows, n: int) -> tuple[tuple[Fraction, ...], ...]:
    out = []
    for row in rows:
        row = tuple(as_fraction(v) for v in row)
        if len(row) != n:
            raise ValueError(f"row has {len(row)} coefficients, expected {n}")
        out.append(row)
    return tuple(out)


@dataclass(frozen=True)
class LpProblem:
    """Linear constraints over ``n`` nonnegative rational unknowns."""

    n: int
    a_eq: tuple[tuple[Fraction, ...], ...] = ()
    b_eq: tuple[Fraction, ...] = ()
    a_ub: tuple[tuple[Fraction, ...], ...] = ()
    b_ub: tuple[Fraction, ...] = ()

    @classmethod
    def build(cls, n: int, a_eq=(), b_eq=(), a_ub=(), b_ub=()) -> "LpProblem":
        a_eq = _matrix(a_eq, n)
        a_ub = _matrix(a_ub, n)
        b_eq = tuple(as_fraction(v) for v in b_eq)
        b_ub = tuple(as_fraction(v) for v in b_ub)
        if len(a_eq) != len(b_eq) or len(a_ub) != len(b_ub):
            raise ValueError("constraint matrix and right-hand side lengths differ")
        return cls(n, a_eq, b_eq, a_ub, b_ub)

    @property
    def m_eq(self) -> int:
        return len(self.a_eq)

    @property
    def m_ub(self) -> int:
        return len(self.a_ub)

    def residual_ok(self, x: Sequence[Fraction]) -> bool:
        """Exact membership test for a candidate point."""
        if len(x) != self.n or any(v < 0 for v in x):
            return False
        for row, rhs in zip(self.a_eq, self.b_eq):
            if sum(a * v for a, v in zip(row, x)) != rhs:
                return False
        for row, rhs in zip(self.a_ub, self.b_ub):
            if sum(a * v for a, v in zip(row, x)) > rhs:
                return False
        return True


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None
    dual: tuple[Fraction, ...] | None = None
    farkas: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    point: tuple[Fraction, ...] | None = None
    certificate: tuple[Fraction, ...] | None = None


class _Tableau:
    """Dense simplex tableau ``T x = rhs`` with an explicit basis."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction], basis: list[int]):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = len(rows[0]) if rows else 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            row = [v * inv if v else v for v in row]
            self.rows[r] = row
            self.rhs[r] *= inv
        nz = [j for j, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[c]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
                self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def minimize(self, cost: list[Fraction], allowed: list[bool]) -> tuple[str, list[Fraction]]:
        """Run Bland's-rule simplex from the current basis.

        Returns the status and the final reduced-cost row.
        """
        rc = list(cost)
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                for j, v in enumerate(self.rows[i]):
                    if v:
                        rc[j] -= cb * v
        while True:
            enter = next((j for j in range(self.ncols) if allowed[j] and rc[j] < 0), None)
            if enter is None:
                return "optimal", rc
            best = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    key = (self.rhs[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded", rc
            r = best[1]
            f = rc[enter]
            self.pivot(r, enter)
            for j, v in enumerate(self.rows[r]):
                if v:
                    rc[j] -= f * v


def _standard_form(p: LpProblem):
    """Rows ``[A_eq 0; A_ub I] [x; s] = b`` with nonnegative right-hand sides."""
    n, m_eq, m_ub = p.n, p.m_eq, p.m_ub
    ncols = n + m_ub
    rows, rhs, signs = [], [], []
    zero = Fraction(0)
    for i in range(m_eq):
        rows.append(list(p.a_eq[i]) + [zero] * m_ub)
        rhs.append(p.b_eq[i])
    for i in range(m_ub):
        row = list(p.a_ub[i]) + [zero] * m_ub
        row[n + i] = Fraction(1)
        rows.append(row)
        rhs.append(p.b_ub[i])
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
            signs.append(-1)
        else:
            signs.append(1)
    return rows, rhs, signs, ncols


def _unit_column(rows: list[list[Fraction]], i: int, used: set[int]) -> int | None:
    for j in range(len(rows[i])):
        if j in used or rows[i][j] != 1:
            continue
        if all(rows[k][j] == 0 for k in range(len(rows)) if k != i):
            return j
    return None


def _solve(p: LpProblem, cost: Sequence[Fraction] | None):
    rows, rhs, signs, ncols = _standard_form(p)
    m = len(rows)
    if m == 0:
        x = tuple(Fraction(0) for _ in range(p.n))
        if cost is not None and any(c < 0 for c in cost):
            return LpSolution("unbounded")
        return LpSolution("optimal", x, Fraction(0), ())

    # initial basis: reuse unit columns, otherwise append an artificial
    init, used, n_art = [], set(), 0
    for i in range(m):
        j = _unit_column(rows, i, used)
        if j is None:
            init.append(None)
            n_art += 1
        else:
            used.add(j)
            init.append(j)
    total = ncols + n_art
    art_of_row = {}
    k = ncols
    for i in range(m):
        rows[i] = rows[i] + [Fraction(0)] * n_art
        if init[i] is None:
            rows[i][k] = Fraction(1)
            init[i] = k
            art_of_row[i] = k
            k += 1
    tab = _Tableau(rows, list(rhs), list(init))
    is_art = [j >= ncols for j in range(total)]

    def duals(cost_full, rc):
        # y_i = c(init_i) - rc(init_i); column init_i of the tableau is B^-1 e_i
        return [cost_full[init[i]] - rc[init[i]] for i in range(m)]

    phase1_cost = [Fraction(1) if is_art[j] else Fraction(0) for j in range(total)]
    if n_art:
        _, rc1 = tab.minimize(phase1_cost, [True] * total)
        infeas = sum((tab.rhs[i] for i in range(m) if is_art[tab.basis[i]]), Fraction(0))
        if infeas > 0:
            y = duals(phase1_cost, rc1)
            farkas = tuple(-signs[i] * y[i] for i in range(m))
            return LpSolution("infeasible", farkas=farkas)
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if is_art[tab.basis[i]]:
                c = next((j for j in range(ncols) if tab.rows[i][j] != 0), None)
                if c is not None:
                    tab.pivot(i, c)

    x_full = [Fraction(0)] * total
    if cost is None:
        for i, b in enumerate(tab.basis):
            x_full[b] = tab.rhs[i]
        return LpSolution("optimal", tuple(x_full[: p.n]), Fraction(0))

    cost_full = [as_fraction(c) for c in cost] + [Fraction(0)] * (total - p.n)
    allowed = [not is_art[j] for j in range(total)]
    status, rc2 = tab.minimize(cost_full, allowed)
    if status == "unbounded":
        return LpSolution("unbounded")
    for i, b in enumerate(tab.basis):
        x_full[b] = tab.rhs[i]
    x = tuple(x_full[: p.n])
    y = duals(cost_full, rc2)
    dual = tuple(signs[i] * y[i] for i in range(m))
    obj = sum((c * v for c, v in zip(cost_full, x_full)), Fraction(0))
    return LpSolution("optimal", x, obj, dual)


def solve_lp(p: LpProblem, c: Iterable, maximize: bool = False) -> LpSolution:
    """Optimise ``c @ x`` over the problem's feasible set, exactly.

    The returned ``dual`` has one entry per equality row followed by one
    per inequality row, in the orientation of the original problem
    (minimisation convention: ``y_ub <= 0``).
    """
    c = [as_fraction(v) for v in c]
    if len(c) != p.n:
        raise ValueError("objective length does not match the number of variables")
    sol = _solve(p, [-v for v in c] if maximize else c)
    if maximize and sol.status == "optimal":
        return LpSolution(sol.status, sol.x, -sol.objective,
                          tuple(-v for v in sol.dual), None)
    return sol


def solve_lp_feasibility(p: LpProblem) -> Feasibility:
    """Decide ``{A_eq x = b_eq, A_ub x <= b_ub, x >= 0}`` exactly."""
    sol = _solve(p, None)
    if sol.status == "infeasible":
        return Feasibility(False, certificate=sol.farkas)
    return Feasibility(True, point=sol.x)


def verify_farkas(p: LpProblem, y: Sequence) -> bool:
    """Check that ``y`` proves infeasibility of ``p`` in exact arithmetic."""
    y = [as_fraction(v) for v in y]
    if len(y) != p.m_eq + p.m_ub:
        return False
    y_eq, y_ub = y[: p.m_eq], y[p.m_eq:]
    if any(v < 0 for v in y_ub):
        return False
    for j in range(p.n):
        col = sum((y_eq[i] * p.a_eq[i][j] for i in range(p.m_eq)), Fraction(0))
        col += sum((y_ub[i] * p.a_ub[i][j] for i in range(p.m_ub)), Fraction(0))
        if col < 0:
            return False
    rhs = sum((a * b for a, b in zip(y_eq, p.b_eq)), Fraction(0))
    rhs += sum((a * b for a, b in zip(y_ub, p.b_ub)), Fraction(0))
    return rhs < 0
