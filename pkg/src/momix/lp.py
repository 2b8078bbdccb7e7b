"""A small exact linear-programming layer over Fractions.

Two-phase primal simplex with Bland's rule: every pivot is exact, entering
and leaving choices are index-minimal, so solves terminate and are fully
deterministic.  Intended for the tiny, possibly degenerate programs of the
geometry module (dimensions <= ~6, tens of variables), not for scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    objective: Optional[Fraction]
    values: Dict[str, Fraction]

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    def __getitem__(self, name):
        return self.values[name]


class LinearProgram:
    """Incremental model: named variables with bounds, linear constraints."""

    def __init__(self):
        self._vars: List[Tuple[str, Optional[Fraction], Optional[Fraction]]] = []
        self._index: Dict[str, int] = {}
        self._constraints: List[Tuple[Dict[str, Fraction], str, Fraction]] = []

    def var(self, name: str, lo=Fraction(0), hi=None) -> str:
        """Declare a variable with bounds (lo=None makes it free)."""
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        self._index[name] = len(self._vars)
        lo = None if lo is None else Fraction(lo)
        hi = None if hi is None else Fraction(hi)
        self._vars.append((name, lo, hi))
        return name

    def constrain(self, coeffs: Mapping[str, Fraction], sense: str, rhs) -> None:
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"bad sense {sense!r}")
        for name in coeffs:
            if name not in self._index:
                raise ValueError(f"unknown variable {name!r}")
        self._constraints.append(({k: Fraction(v) for k, v in coeffs.items()},
                                  sense, Fraction(rhs)))

    def solve(self, objective: Mapping[str, Fraction], maximize: bool = False) -> LpResult:
        """Optimize; returns OPTIMAL with a basic solution, INFEASIBLE, or
        UNBOUNDED."""
        # Map each model variable to non-negative standard-form columns.
        columns: List[Tuple[str, Fraction, int]] = []  # (var, sign multiplier, shift marker)
        offsets: Dict[str, Fraction] = {}
        plus_col: Dict[str, int] = {}
        minus_col: Dict[str, int] = {}
        extra_rows: List[Tuple[Dict[str, Fraction], str, Fraction]] = []
        for name, lo, hi in self._vars:
            if lo is None:
                plus_col[name] = len(columns)
                columns.append((name, Fraction(1), 0))
                minus_col[name] = len(columns)
                columns.append((name, Fraction(-1), 0))
                offsets[name] = Fraction(0)
            else:
                plus_col[name] = len(columns)
                columns.append((name, Fraction(1), 0))
                offsets[name] = lo
            if hi is not None:
                extra_rows.append(({name: Fraction(1)}, "<=", hi))

        n_struct = len(columns)
        rows: List[List[Fraction]] = []
        rhs: List[Fraction] = []
        senses: List[str] = []
        for coeffs, sense, b in self._constraints + extra_rows:
            row = [Fraction(0)] * n_struct
            shift = Fraction(0)
            for name, coef in coeffs.items():
                coef = Fraction(coef)
                row[plus_col[name]] += coef
                if name in minus_col:
                    row[minus_col[name]] -= coef
                shift += coef * offsets[name]
            rows.append(row)
            rhs.append(Fraction(b) - shift)
            senses.append(sense)

        # slacks
        n_slack = sum(1 for s in senses if s != "==")
        slack_at = {}
        k = 0
        for i, s in enumerate(senses):
            if s != "==":
                slack_at[i] = n_struct + k
                k += 1
        total = n_struct + n_slack
        tableau_rows: List[List[Fraction]] = []
        for i, row in enumerate(rows):
            full = row + [Fraction(0)] * n_slack
            if i in slack_at:
                full[slack_at[i]] = Fraction(1) if senses[i] == "<=" else Fraction(-1)
            tableau_rows.append(full)

        cost = [Fraction(0)] * total
        for name, coef in objective.items():
            coef = Fraction(coef)
            if maximize:
                coef = -coef
            cost[plus_col[name]] += coef
            if name in minus_col:
                cost[minus_col[name]] -= coef

        status, solution, value = _simplex(tableau_rows, rhs, cost)
        if status != OPTIMAL:
            return LpResult(status, None, {})

        values: Dict[str, Fraction] = {}
        for name, _lo, _hi in self._vars:
            v = solution[plus_col[name]]
            if name in minus_col:
                v -= solution[minus_col[name]]
            values[name] = v + offsets[name]
        obj = sum((Fraction(c) * values[name] for name, c in objective.items()), Fraction(0))
        return LpResult(OPTIMAL, obj, values)


def _simplex(rows: List[List[Fraction]], rhs: List[Fraction], cost: List[Fraction]):
    """min cost . x  s.t. rows . x = rhs, x >= 0; exact, Bland's rule."""
    m = len(rows)
    n = len(cost)
    # Normalize rhs >= 0.
    a = []
    b = []
    for row, bi in zip(rows, rhs):
        if bi < 0:
            a.append([-v for v in row])
            b.append(-bi)
        else:
            a.append(list(row))
            b.append(bi)

    # Phase 1: artificial basis.
    width = n + m
    tab = [a[i] + [Fraction(1) if j == i else Fraction(0) for j in range(m)] + [b[i]]
           for i in range(m)]
    basis = [n + i for i in range(m)]
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m

    def run(c_vec, allowed):
        # objective row in reduced form
        z = [Fraction(0)] * (width + 1)
        for j in range(width):
            z[j] = c_vec[j]
        z[width] = Fraction(0)
        for i, bv in enumerate(basis):
            coef = z[bv]
            if coef != 0:
                for j in range(width + 1):
                    z[j] -= coef * tab[i][j]
        while True:
            enter = None
            for j in range(width):
                if j in allowed and z[j] < 0:
                    enter = j
                    break
            if enter is None:
                return OPTIMAL, -z[width]
            leave = None
            best = None
            for i in range(m):
                coeff = tab[i][enter]
                if coeff > 0:
                    ratio = tab[i][width] / coeff
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best = ratio
                        leave = i
            if leave is None:
                return UNBOUNDED, None
            _pivot(tab, z, basis, leave, enter, width)

    struct_cols = set(range(n))
    all_cols = set(range(width))
    status, value = run(phase1, all_cols)
    if status != OPTIMAL:  # phase 1 is bounded below by 0, cannot be unbounded
        return status, None, None
    if value != 0:
        return INFEASIBLE, None, None

    # Drive artificial variables out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            enter = next((j for j in range(n) if tab[i][j] != 0), None)
            if enter is not None:
                _pivot(tab, None, basis, i, enter, width)
            # else: redundant row, artificial stays basic at value 0

    status, value = run([c for c in cost] + [Fraction(0)] * m, struct_cols)
    if status != OPTIMAL:
        return status, None, None
    solution = [Fraction(0)] * n
    for i, bv in enumerate(basis):
        if bv < n:
            solution[bv] = tab[i][width]
    return OPTIMAL, solution, value


def _pivot(tab, z, basis, row, col, width):
    piv = tab[row][col]
    inv = Fraction(1) / piv
    tab[row] = [v * inv for v in tab[row]]
    for i in range(len(tab)):
        if i != row and tab[i][col] != 0:
            factor = tab[i][col]
            tab[i] = [v - factor * p for v, p in zip(tab[i], tab[row])]
    if z is not None and z[col] != 0:
        factor = z[col]
        for j in range(width + 1):
            z[j] -= factor * tab[row][j]
    basis[row] = col
