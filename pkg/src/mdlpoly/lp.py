"""Exact revised simplex with optional column generation.

Constraint coefficients must be rational; right-hand sides and costs may
be any exact ordered scalar that supports + - * / and comparison with 0:
``Fraction``, ``FieldScalar`` for Q(b), ``QuadraticSurd`` for a single
square root.  Rational values are kept as ``Fraction`` because it is several
times faster than the quartic field.

Problems are in the standard form   min c.x   s.t.  A x = b,  x >= 0.
Phase I uses one artificial per row.  When phase I ends with a positive
objective its duals y satisfy y.b > 0 and y.A_j <= 0 for every column,
which is the Farkas certificate of infeasibility.

Pricing is Dantzig's rule; after a run of degenerate pivots the solver
switches to Bland's smallest-index rule and keeps it until the objective
strictly improves, which rules out cycling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable

import numpy as np

from .numerics import to_exact

__all__ = ["ColumnSimplex", "LpOutcome", "FarkasCertificate", "lp_solve", "OPTIMAL", "INFEASIBLE", "UNBOUNDED"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

DEGENERATE_SWITCH = 25


def _sgn(v) -> int:
    if v == 0:
        return 0
    return 1 if v > 0 else -1


@dataclass
class FarkasCertificate:
    """Multipliers y with y.b > 0 and y.A_j <= 0 for every admissible column.

    In higher layers ``coefficients`` maps coordinates to the coefficients of
    a separating inequality  f(P) <= bound  that the target violates.
    """

    coefficients: dict
    bound: object = 0
    target_value: object = None


@dataclass
class LpOutcome:
    status: str
    value: object = None
    weights: dict = field(default_factory=dict)
    farkas: FarkasCertificate | None = None
    duals: list | None = None
    vertices: dict = field(default_factory=dict)
    iterations: int = 0

    @property
    def member(self) -> bool:
        return self.status == OPTIMAL


class ColumnSimplex:
    """Revised simplex on an integer-preserving basis inverse, columns added on demand.

    Columns are scaled to integers when added, and the basis inverse is kept
    as ``M / D`` with an integer matrix ``M`` and ``D`` the determinant of
    the (scaled) basis.  Pivots use the fraction-free update
    ``M_i <- (p M_i - d_i M_r) / D`` whose division is exact, which avoids
    the gcd work of ``Fraction`` entries.  Right-hand sides and costs may be
    any exact scalars.
    """

    def __init__(self, b):
        b = [to_exact(v) for v in b]
        self.m = len(b)
        self.flip = [1 if _sgn(v) >= 0 else -1 for v in b]
        self.b = [v * s for v, s in zip(b, self.flip)]
        m = self.m
        self.M = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
        self.D = 1
        self.basis = [-1 - i for i in range(m)]    # negative: artificial row i
        self.xB = list(self.b)
        self.cols: list[dict] = []                 # integer entries, flipped rows
        self.scale: list[int] = []                 # original x_j = scale_j * (scaled x_j)
        self.cost: list = []                       # scaled costs
        self.keys: dict[Hashable, int] = {}
        self.key_of: list = []
        self.iterations = 0
        self._fA = np.zeros((self.m, 64))     # float mirror of the pool
        self._fc = np.zeros(64)

    # -- columns ---------------------------------------------------------
    def add_column(self, key, col: dict, cost=0) -> int:
        """Add column (row -> value, in original row signs); returns its index."""
        if key in self.keys:
            return self.keys[key]
        raw = {}
        for r, v in col.items():
            v = to_exact(v)
            if v == 0:
                continue
            if not isinstance(v, (int, Fraction)):
                raise TypeError(f"column {key!r}: constraint coefficients must be rational, got {v!r}")
            raw[r] = Fraction(v) * self.flip[r]
        s = 1
        for v in raw.values():
            s = s * v.denominator // math.gcd(s, v.denominator)
        c = {r: int(v * s) for r, v in raw.items()}
        j = len(self.cols)
        self.cols.append(c)
        self.scale.append(s)
        self.cost.append(to_exact(cost) * s)
        self.keys[key] = j
        self.key_of.append(key)
        if j >= self._fA.shape[1]:
            self._fA = np.concatenate([self._fA, np.zeros_like(self._fA)], axis=1)
            self._fc = np.concatenate([self._fc, np.zeros_like(self._fc)])
        for r, v in c.items():
            self._fA[r, j] = float(v)
        self._fc[j] = float(self.cost[j])
        return j

    # -- linear algebra --------------------------------------------------
    def _basic_cost(self, phase: int):
        out = []
        for v in self.basis:
            if v < 0:
                out.append(1 if phase == 1 else 0)
            else:
                out.append(0 if phase == 1 else self.cost[v])
        return out

    def duals(self, phase: int) -> list:
        """y = c_B B^-1 in (flipped) row order, as exact scalars."""
        cB = self._basic_cost(phase)
        m = self.m
        nz = [(i, c) for i, c in enumerate(cB) if c != 0]
        if all(isinstance(c, (int, Fraction)) for _, c in nz):
            L = 1
            for _, c in nz:
                d = Fraction(c).denominator
                L = L * d // math.gcd(L, d)
            acc = [0] * m
            for i, c in nz:
                ci = int(Fraction(c) * L)
                row = self.M[i]
                acc = [a + ci * v if v else a for a, v in zip(acc, row)]
            den = self.D * L
            return [Fraction(a, den) for a in acc]
        out = []
        for r in range(m):
            acc = Fraction(0)
            for i, c in nz:
                v = self.M[i][r]
                if v:
                    acc = acc + c * v
            out.append(acc / self.D)
        return out

    def original_duals(self, y) -> list:
        return [v * s for v, s in zip(y, self.flip)]

    def reduced_cost(self, j: int, y, phase: int):
        c = self.cost[j] if phase == 2 else Fraction(0)
        for r, v in self.cols[j].items():
            if y[r] != 0:
                c = c - y[r] * v
        return c

    def objective(self, phase: int):
        cB = self._basic_cost(phase)
        acc = Fraction(0)
        for c, x in zip(cB, self.xB):
            if c != 0 and x != 0:
                acc = acc + c * x
        return acc

    def _ftran(self, col: dict) -> list[int]:
        """D * B^-1 a (integers)."""
        items = list(col.items())
        out = []
        for row in self.M:
            acc = 0
            for r, v in items:
                br = row[r]
                if br:
                    acc += br * v
            out.append(acc)
        return out

    def _var_index(self, v: int) -> int:
        return -1 - v if v < 0 else self.m + v

    def _pivot(self, j: int, phase: int):
        """Bring column j into the basis. Returns 'unbounded' or the step length."""
        d = self._ftran(self.cols[j])
        D = self.D
        sD = 1 if D > 0 else -1
        best = None
        for i in range(self.m):
            di = d[i]
            if di == 0:
                continue
            v = self.basis[i]
            if phase == 2 and v < 0:
                # artificial stuck at zero: it may not move in either direction
                ratio = Fraction(0)
            elif di * sD > 0:
                ratio = self.xB[i] * Fraction(D, di)
            else:
                continue
            key = (ratio, self._var_index(v))
            if best is None or key < best[0]:
                best = (key, i)
        if best is None:
            return UNBOUNDED
        theta = best[0][0]
        r = best[1]
        p = d[r]
        Mr = self.M[r]
        xr = self.xB[r]
        for i in range(self.m):
            if i == r:
                continue
            di = d[i]
            row = self.M[i]
            if di == 0:
                self.M[i] = [p * a // D if a else 0 for a in row]
            else:
                self.M[i] = [(p * a - di * b) // D for a, b in zip(row, Mr)]
                self.xB[i] = self.xB[i] - xr * Fraction(di, p)
        self.xB[r] = xr * Fraction(D, p)
        self.D = p
        self.basis[r] = j
        self.iterations += 1
        return theta

    # -- driver ----------------------------------------------------------
    def run(self, phase: int, oracle: Callable | None = None, max_iter: int = 10 ** 7) -> str:
        """Optimise the phase objective; ``oracle(y, phase)`` proposes new columns.

        The oracle receives duals in original row signs and must return an
        iterable of (key, column, cost) whose reduced cost is negative, or
        nothing when no such column exists anywhere.
        """
        degenerate = 0
        bland = False
        while self.iterations < max_iter:
            y = self.duals(phase)
            basic = set(v for v in self.basis if v >= 0)
            enter = self._price_pool(y, phase, basic, bland)
            if enter is None and oracle is not None:
                new = list(oracle(self.original_duals(y), phase) or ())
                added = [self.add_column(k, c, cost) for k, c, cost in new]
                cands = [j for j in added if j not in basic and self.reduced_cost(j, y, phase) < 0]
                if cands:
                    enter = min(cands) if bland else min(cands, key=lambda j: (self.reduced_cost(j, y, phase), j))
            if enter is None:
                return OPTIMAL
            theta = self._pivot(enter, phase)
            if theta is UNBOUNDED:
                return UNBOUNDED
            if theta == 0:
                degenerate += 1
                if degenerate >= DEGENERATE_SWITCH:
                    bland = True
            else:
                degenerate = 0
                bland = False
        raise RuntimeError("simplex iteration limit reached")

    def _price_pool(self, y, phase: int, basic: set, bland: bool):
        """Entering pool column: float screen, exact confirmation."""
        n = len(self.cols)
        if n == 0:
            return None
        yf = np.array([float(v) for v in y])
        rcf = -(yf @ self._fA[:, :n])
        if phase == 2:
            rcf = rcf + self._fc[:n]
        scale = 1.0 + float(np.abs(yf).max(initial=0.0)) * float(np.abs(self._fA[:, :n]).max(initial=0.0))
        if phase == 2:
            scale += float(np.abs(self._fc[:n]).max(initial=0.0))
        delta = 1e-9 * scale
        cand = np.flatnonzero(rcf < delta)
        if cand.size == 0:
            return None
        order = cand if bland else cand[np.argsort(rcf[cand], kind="stable")]
        for j in order:
            j = int(j)
            if j in basic:
                continue
            if self.reduced_cost(j, y, phase) < 0:
                return j
        return None

    def primal(self) -> dict:
        """Nonzero basic values of real columns, keyed by column key."""
        out = {}
        for i, v in enumerate(self.basis):
            if v >= 0 and self.xB[i] != 0:
                out[self.key_of[v]] = self.xB[i] * self.scale[v]
        return out

    def solve(self, oracle=None, objective: bool = True) -> tuple[str, object]:
        """Phase I then (optionally) phase II. Returns (status, phase value)."""
        self.run(1, oracle)
        infeas = self.objective(1)
        if infeas > 0:
            return INFEASIBLE, infeas
        if not objective:
            return OPTIMAL, Fraction(0)
        st = self.run(2, oracle)
        if st == UNBOUNDED:
            return UNBOUNDED, None
        return OPTIMAL, self.objective(2)


def lp_solve(objective: dict, constraints, sense: str = "max") -> LpOutcome:
    """Solve an LP over named nonnegative variables.

    ``constraints`` is a sequence of (coefficients dict, relation, rhs) with
    relation one of "<=", "=", ">=".  Returns exact optimum, or a Farkas
    certificate whose ``coefficients`` are per-constraint multipliers y with
    y.rhs > 0 and y.A <= 0 on every column (slacks included).
    """
    names = []
    seen = set()
    for coeffs, _, _ in constraints:
        for n in coeffs:
            if n not in seen:
                seen.add(n)
                names.append(n)
    for n in objective:
        if n not in seen:
            seen.add(n)
            names.append(n)
    sgn = -1 if sense == "max" else 1
    lp = ColumnSimplex([rhs for _, _, rhs in constraints])
    for n in names:
        col = {i: v for i, (coeffs, _, _) in enumerate(constraints) if (v := coeffs.get(n, 0)) != 0}
        lp.add_column(("var", n), col, sgn * to_exact(objective.get(n, 0)))
    for i, (_, rel, _) in enumerate(constraints):
        if rel == "<=":
            lp.add_column(("slack", i), {i: 1}, 0)
        elif rel == ">=":
            lp.add_column(("slack", i), {i: -1}, 0)
        elif rel not in ("=", "=="):
            raise ValueError(f"bad relation {rel!r}")
    status, val = lp.solve(objective=True)
    if status == INFEASIBLE:
        y = lp.original_duals(lp.duals(1))
        return LpOutcome(INFEASIBLE, farkas=FarkasCertificate({i: v for i, v in enumerate(y)}, 0,
                                                              sum((v * to_exact(c[2]) for v, c in zip(y, constraints)), Fraction(0))),
                         iterations=lp.iterations)
    if status == UNBOUNDED:
        return LpOutcome(UNBOUNDED, iterations=lp.iterations)
    prim = lp.primal()
    weights = {k[1]: v for k, v in prim.items() if k[0] == "var"}
    return LpOutcome(OPTIMAL, value=sgn * val, weights=weights,
                     duals=lp.original_duals(lp.duals(2)), iterations=lp.iterations)
