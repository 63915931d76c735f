"""Putz-value curves B_N(h), their crossings with quantum values, and kinks.

All curve points use rational h, so B_N(h) is computed exactly.  Kinks are
located at h = 1/sqrt(n) (outside Q(b)) by reading off the polynomial piece
that is optimal on each side and differentiating it in Q(sqrt n).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import Scenario
from .numerics import FieldScalar, QuadraticSurd, field_decimal
from .optimize import LinearFunctional, MaxResult, maximize_functional, maximize_functional_uniform
from .polytope import MdlBounds
from .reference import chsh_functional, putz_functional
from .strategies import StrategyTable, normalise_class

CSV_HEADER = ["h", "h_squared", "mdl_value", "quantum_value", "crossed"]

PUTZ_QUANTUM = Fraction(1, 12)                       # P(00|00) of the reference quantum point
HARDY_QUANTUM = (5 * FieldScalar.sqrt5() - 11) / 2   # maximal Hardy value


@dataclass
class CurvePoint:
    h: Fraction
    H: Fraction
    mdl_value: Fraction
    pxy00: Fraction
    quantum_value: object
    hardy_value: object
    crossed: bool
    result: MaxResult | None = None


def default_grid(points: int = 50, lo=Fraction(1, 4), hi=Fraction(1, 3)) -> list[Fraction]:
    """``points`` rational values evenly spaced in [lo, hi)."""
    step = (hi - lo) / points
    return [lo + i * step for i in range(points)]


def curve_point(h, cls: str = "dependent", N: int = 2, uniform: bool = False,
                table: StrategyTable | None = None) -> CurvePoint:
    h = Fraction(h)
    H = h ** N
    scen = Scenario(N=N)
    f = putz_functional(1 - 3 * h, h)
    bounds = MdlBounds(0, H)
    res = None
    if uniform:
        out = maximize_functional_uniform(f, bounds, cls, scen)
        val = out.value
        pxy = Fraction(1, 4)
    else:
        res = maximize_functional(f, bounds, cls, scen, secondary="pxy00", table=table)
        val = res.value
        pxy = res.secondary
    q = (1 - 3 * h) * PUTZ_QUANTUM * pxy
    hq = HARDY_QUANTUM * ((1 - 3 * h) * pxy)
    return CurvePoint(h, H, val, pxy, q, hq, val >= q, res)


def putz_curve(grid: Sequence, cls: str = "dependent", N: int = 2, uniform: bool = False) -> list[CurvePoint]:
    table = None if uniform else StrategyTable(Scenario(N=N), normalise_class(cls))
    return [curve_point(h, cls, N, uniform, table) for h in grid]


def find_crossing(cls: str = "dependent", N: int = 2, uniform: bool = False, grid=None,
                  tol=Fraction(1, 10 ** 6)) -> tuple[Fraction, Fraction]:
    """Bracket the least h at which the MDL value reaches the quantum value."""
    grid = grid or default_grid()
    table = None if uniform else StrategyTable(Scenario(N=N), normalise_class(cls))

    def crossed(h):
        return curve_point(h, cls, N, uniform, table).crossed

    prev = None
    for h in grid:
        if crossed(h):
            break
        prev = h
    else:
        raise ValueError("no crossing on the grid")
    if prev is None:
        return grid[0], grid[0]
    lo, hi = prev, h
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if crossed(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def write_curve_csv(points: Sequence[CurvePoint], digits: int = 8, hardy: bool = False) -> str:
    """Decimal columns first (fixed header), then exact columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = list(CSV_HEADER)
    if hardy:
        head.append("quantum_value_hardy")
    head += ["h_exact", "mdl_value_exact", "quantum_value_exact"]
    w.writerow(head)
    for p in points:
        row = [field_decimal(p.h, digits), field_decimal(p.H, digits), field_decimal(p.mdl_value, digits),
               field_decimal(p.quantum_value, digits), int(p.crossed)]
        if hardy:
            row.append(field_decimal(p.hardy_value, digits))
        row += [str(p.h), str(p.mdl_value), str(p.quantum_value)]
        w.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# gradient discontinuities


def _rat_sqrt_inv(n: int, below: bool, scale: int = 10 ** 7) -> Fraction:
    """A rational within 1/scale of 1/sqrt(n), strictly below or above it."""
    import math
    q = Fraction(math.isqrt(scale * scale // n), scale)
    while q * q * n >= 1:
        q -= Fraction(1, scale)
    while (q + Fraction(1, scale)) ** 2 * n < 1:
        q += Fraction(1, scale)
    return q if below else q + Fraction(1, scale)


@dataclass(frozen=True)
class Piece:
    """V(h) = sum_i c_i h^i: the value of one strategy with fixed greedy order."""

    coeffs: tuple[Fraction, Fraction, Fraction, Fraction]
    strategy_id: int

    def at(self, h):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * h + c
        return acc

    def derivative_at(self, h):
        c = self.coeffs
        return c[1] + 2 * c[2] * h + 3 * c[3] * h * h


def _piece(res: MaxResult, N: int) -> Piece:
    scen = res.strategy.scenario
    base = putz_functional(1, 0).on(scen).dense()       # coefficient at h = 0
    slope = putz_functional(-3, 1).on(scen).dense()     # d/dh of the coefficients
    table = StrategyTable(scen, res.strategy.cls, ids=[res.strategy.id])
    full = table.full_coords()[0]
    alpha = [base[c] for c in full]
    beta = [slope[c] for c in full]
    g = res.greedy
    top = g.top
    m = len(top)
    # H = h^N multiplies the top sum, the remainder carries 1 - m h^N
    c = [Fraction(0)] * (N + 2)
    for k in top:
        c[N] += alpha[k]
        c[N + 1] += beta[k]
    if g.remainder is not None:
        r = g.remainder
        c[0] += alpha[r]
        c[1] += beta[r]
        c[N] -= m * alpha[r]
        c[N + 1] -= m * beta[r]
    return Piece(tuple(c), res.strategy.id)


@dataclass
class Kink:
    n: int
    left: Piece
    right: Piece
    left_slope: QuadraticSurd
    right_slope: QuadraticSurd
    continuous: bool

    @property
    def is_kink(self) -> bool:
        return self.left_slope != self.right_slope

    @property
    def jump(self) -> QuadraticSurd:
        return self.right_slope - self.left_slope


def _max_at(h: Fraction, cls: str, table) -> MaxResult:
    f = putz_functional(1 - 3 * h, h)
    return maximize_functional(f, MdlBounds(0, h * h), cls, table.scenario, secondary="pxy00", table=table)


def curve_kinks(cls: str = "dependent", ns: Sequence[int] = (15, 14, 13, 12, 11, 10)) -> list[Kink]:
    """One-sided slopes of B_2 at h = 1/sqrt(n), exactly."""
    cls = normalise_class(cls)
    table = StrategyTable(Scenario(N=2), cls)
    out = []
    for n in ns:
        hc = QuadraticSurd.sqrt(Fraction(1, n))
        left = _piece(_max_at(_rat_sqrt_inv(n, True), cls, table), 2)
        right = _piece(_max_at(_rat_sqrt_inv(n, False), cls, table), 2)
        out.append(Kink(n, left, right, left.derivative_at(hc), right.derivative_at(hc),
                        left.at(hc) == right.at(hc)))
    return out


def smooth_between(cls: str = "dependent", n_hi: int = 16, n_lo: int = 9, samples: int = 5) -> dict[int, bool]:
    """For each open interval 1/(n+1) < h^2 < 1/n, whether one polynomial piece
    is optimal at every sampled h (a rough check that no further kink hides there)."""
    cls = normalise_class(cls)
    table = StrategyTable(Scenario(N=2), cls)
    out = {}
    for n in range(n_lo + 1, n_hi + 1):
        a = _rat_sqrt_inv(n, False)
        b = _rat_sqrt_inv(n - 1, True)
        hs = [a + (b - a) * Fraction(i, samples - 1) for i in range(samples)]
        pieces = {_piece(_max_at(h, cls, table), 2).coeffs for h in hs}
        out[n] = len(pieces) == 1
    return out


# ---------------------------------------------------------------------------
# CHSH on the uniform slice


def chsh_uniform_value(h, cls: str = "independent", N: int = 2):
    h = Fraction(h)
    scen = Scenario(N=N)
    return maximize_functional_uniform(chsh_functional(), MdlBounds(0, h ** N), cls, scen).value


def at_least_tsirelson(v) -> bool:
    """v >= 2 sqrt 2 for rational v, exactly."""
    v = Fraction(v)
    return v >= 0 and v * v >= 8


def chsh_crossing(cls: str = "independent", N: int = 2, lo=Fraction(1, 4), hi=Fraction(1, 3),
                  tol=Fraction(1, 10 ** 4)) -> tuple[Fraction, Fraction] | None:
    """Bracket the least h where the uniform-slice CHSH bound reaches 2 sqrt 2."""
    lo, hi = Fraction(lo), Fraction(hi)
    if at_least_tsirelson(chsh_uniform_value(lo, cls, N)):
        return lo, lo
    if not at_least_tsirelson(chsh_uniform_value(hi, cls, N)):
        return None
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if at_least_tsirelson(chsh_uniform_value(mid, cls, N)):
            hi = mid
        else:
            lo = mid
    return lo, hi


def piece_switches(cls: str = "dependent", grid=None, tol=Fraction(1, 10 ** 7)) -> list[tuple[Fraction, Fraction, bool]]:
    """Where the optimal polynomial piece changes along ``grid``.

    Returns (lo, hi, kink) brackets of width <= tol; ``kink`` tells whether
    the two pieces have different slopes at the bracket (a rational check on
    the bracket midpoint, adequate away from tangencies).
    """
    cls = normalise_class(cls)
    table = StrategyTable(Scenario(N=2), cls)
    grid = grid or default_grid(200)

    def piece(h):
        return _piece(_max_at(h, cls, table), 2)

    out = []
    prev_h, prev_p = grid[0], piece(grid[0])
    for h in grid[1:]:
        p = piece(h)
        if p.coeffs != prev_p.coeffs:
            lo, hi, plo, phi = prev_h, h, prev_p, p
            while hi - lo > tol:
                mid = (lo + hi) / 2
                pm = piece(mid)
                if pm.coeffs == plo.coeffs:
                    lo = mid
                else:
                    hi, phi = mid, pm
            mid = (lo + hi) / 2
            out.append((lo, hi, plo.derivative_at(mid) != phi.derivative_at(mid)))
        prev_h, prev_p = h, p
    return out
