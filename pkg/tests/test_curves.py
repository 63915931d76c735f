from fractions import Fraction

from mdlpoly.curves import (
    CSV_HEADER,
    _max_at,
    _piece,
    _rat_sqrt_inv,
    at_least_tsirelson,
    curve_point,
    default_grid,
    write_curve_csv,
)
from mdlpoly.model import Scenario
from mdlpoly.optimize import maximize_functional
from mdlpoly.polytope import MdlBounds
from mdlpoly.reference import putz_functional
from mdlpoly.strategies import StrategyTable


def test_grid():
    g = default_grid(50)
    assert len(g) == 50 and g[0] == Fraction(1, 4) and g[-1] < Fraction(1, 3)


def test_rational_sqrt_brackets():
    for n in (10, 12, 15):
        lo, hi = _rat_sqrt_inv(n, True), _rat_sqrt_inv(n, False)
        assert lo * lo * n < 1 < hi * hi * n and hi - lo == Fraction(1, 10 ** 7)


def test_tsirelson_comparison():
    assert not at_least_tsirelson(Fraction(2828427, 10 ** 6))
    assert at_least_tsirelson(Fraction(2828428, 10 ** 6))


def test_piece_reproduces_maximum():
    table = StrategyTable(Scenario(N=2), "independent")
    for h in (Fraction(26, 100), Fraction(7, 25), Fraction(3, 10), Fraction(32, 100)):
        res = _max_at(h, "independent", table)
        assert _piece(res, 2).at(h) == res.value


def test_relaxation_monotone_for_fixed_functional():
    # the curve itself is not monotone (l = 1 - 3h shrinks), but for a fixed
    # functional a larger bound H can only raise the maximum
    h = Fraction(27, 100)
    f = putz_functional(1 - 3 * h, h)
    table = StrategyTable(Scenario(N=2), "independent")
    grid = sorted([Fraction(1, 16), Fraction(1, 14), Fraction(1, 12), h * h, Fraction(1, 10), Fraction(1, 8)])
    vals = [maximize_functional(f, MdlBounds(0, H), "independent", Scenario(N=2), table=table).value for H in grid]
    assert vals == sorted(vals)


def test_curve_csv():
    pts = [curve_point(h, "independent") for h in default_grid(6)]
    text = write_curve_csv(pts, hardy=True)
    head = text.splitlines()[0].split(",")
    assert head[:5] == CSV_HEADER and "quantum_value_hardy" in head
    assert Fraction(text.splitlines()[1].split(",")[-3]) == Fraction(1, 4)
