"""Exact arithmetic in the quartic field Q(b), b**4 = b**2 + 1.

``b`` is the positive real root (b ~ 1.2720196).  The field contains
sqrt(5) = 2*b**2 - 1, the golden ratio phi = b**2 and the Hardy amplitude
alpha = b**2 - 1 = 1/phi, so every probability of the Hardy construction is
an exact element.  Rationals embed with c1 = c2 = c3 = 0.

Elements are stored as four integer numerators over one positive common
denominator, normalised so that the five integers are coprime.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Union

__all__ = [
    "FieldScalar",
    "SignWitness",
    "QuadraticSurd",
    "field_arith",
    "field_sign",
    "field_decimal",
    "parse_scalar",
    "to_field",
    "to_exact",
    "BETA_FLOAT",
]

BETA_FLOAT = math.sqrt((1.0 + math.sqrt(5.0)) / 2.0)

Number = Union[int, Fraction, "FieldScalar"]


def _qphi_sign(u: Fraction, v: Fraction) -> int:
    """Sign of u + v*phi with phi = (1 + sqrt5)/2."""
    # u + v/2 + (v/2) sqrt5
    p = u + v / 2
    q = v / 2
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sq == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    d = p * p - 5 * q * q
    sd = (d > 0) - (d < 0)
    return sp * sd


class FieldScalar:
    """Immutable element ``(c0 + c1 b + c2 b^2 + c3 b^3) / den``."""

    __slots__ = ("_c", "_d", "_sign")

    def __init__(self, coeffs: Iterable[Number] | Number = (0, 0, 0, 0)):
        if isinstance(coeffs, (int, Fraction, str)):
            coeffs = (coeffs,)
        fr = [Fraction(c) for c in coeffs]
        if len(fr) > 4:
            raise ValueError("at most four coefficients")
        fr += [Fraction(0)] * (4 - len(fr))
        den = 1
        for f in fr:
            den = den * f.denominator // math.gcd(den, f.denominator)
        nums = tuple(int(f * den) for f in fr)
        self._set(nums, den)

    @classmethod
    def _raw(cls, nums, den) -> "FieldScalar":
        obj = cls.__new__(cls)
        obj._set(nums, den)
        return obj

    def _set(self, nums, den):
        if den < 0:
            nums = tuple(-n for n in nums)
            den = -den
        g = den
        for n in nums:
            g = math.gcd(g, n)
            if g == 1:
                break
        if g > 1:
            nums = tuple(n // g for n in nums)
            den //= g
        if not any(nums):
            den = 1
        self._c = nums
        self._d = den
        self._sign = None

    # construction helpers -------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "FieldScalar":
        if isinstance(x, FieldScalar):
            return x
        if isinstance(x, (int, Fraction)):
            f = Fraction(x)
            return cls._raw((f.numerator, 0, 0, 0), f.denominator)
        if isinstance(x, str):
            return parse_scalar(x)
        if isinstance(x, Rational):
            return cls.coerce(Fraction(x.numerator, x.denominator))
        raise TypeError(f"cannot coerce {type(x).__name__} to FieldScalar")

    @classmethod
    def beta(cls) -> "FieldScalar":
        return cls._raw((0, 1, 0, 0), 1)

    @classmethod
    def phi(cls) -> "FieldScalar":
        return cls._raw((0, 0, 1, 0), 1)

    @classmethod
    def sqrt5(cls) -> "FieldScalar":
        return cls._raw((-1, 0, 2, 0), 1)

    @classmethod
    def hardy_alpha(cls) -> "FieldScalar":
        """sqrt((3 - sqrt5)/2) written as b^2 - 1."""
        return cls._raw((-1, 0, 1, 0), 1)

    # accessors ------------------------------------------------------------
    @property
    def coefficients(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return tuple(Fraction(n, self._d) for n in self._c)

    def is_rational(self) -> bool:
        return not (self._c[1] or self._c[2] or self._c[3])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return Fraction(self._c[0], self._d)

    def is_zero(self) -> bool:
        return not any(self._c)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        d1, d2 = self._d, o._d
        if d1 == d2:
            return FieldScalar._raw(tuple(a + b for a, b in zip(self._c, o._c)), d1)
        return FieldScalar._raw(
            tuple(a * d2 + b * d1 for a, b in zip(self._c, o._c)), d1 * d2
        )

    __radd__ = __add__

    def __neg__(self):
        return FieldScalar._raw(tuple(-a for a in self._c), self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self._c, o._c
        if not (b[1] or b[2] or b[3]):
            k = b[0]
            return FieldScalar._raw(tuple(x * k for x in a), self._d * o._d)
        if not (a[1] or a[2] or a[3]):
            k = a[0]
            return FieldScalar._raw(tuple(x * k for x in b), self._d * o._d)
        r = [0] * 7
        for i in range(4):
            if a[i]:
                for j in range(4):
                    r[i + j] += a[i] * b[j]
        # b^4 = b^2 + 1, b^5 = b^3 + b, b^6 = 2 b^2 + 1
        c0 = r[0] + r[4] + r[6]
        c1 = r[1] + r[5]
        c2 = r[2] + r[4] + 2 * r[6]
        c3 = r[3] + r[5]
        return FieldScalar._raw((c0, c1, c2, c3), self._d * o._d)

    __rmul__ = __mul__

    def inverse(self) -> "FieldScalar":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in Q(b)")
        c0, c1, c2, c3 = self.coefficients
        if self.is_rational():
            return FieldScalar.coerce(1 / c0)
        # x = A + b B with A, B in Q(phi): A = c0 + c2 phi, B = c1 + c3 phi
        # 1/x = (A - b B) / (A^2 - phi B^2)
        A = (c0, c2)
        B = (c1, c3)
        A2 = _qphi_mul(A, A)
        B2 = _qphi_mul(B, B)
        phiB2 = _qphi_mul((Fraction(0), Fraction(1)), B2)
        D = (A2[0] - phiB2[0], A2[1] - phiB2[1])
        Dinv = _qphi_inv(D)
        num_a = _qphi_mul(A, Dinv)
        num_b = _qphi_mul(B, Dinv)
        return FieldScalar((num_a[0], -num_b[0], num_a[1], -num_b[1]))

    def __truediv__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = FieldScalar._raw((1, 0, 0, 0), 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # ordering -------------------------------------------------------------
    def sign(self) -> int:
        """Exact sign of the real embedding."""
        s = self._sign
        if s is None:
            c0, c1, c2, c3 = self._c
            if not (c1 or c2 or c3):
                s = (c0 > 0) - (c0 < 0)
            else:
                s = _exact_sign(self._c)
            self._sign = s
        return s

    def _cmp(self, other) -> int:
        return (self - FieldScalar.coerce(other)).sign()

    def __eq__(self, other):
        try:
            o = FieldScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self._d == o._d and self._c == o._c

    def __hash__(self):
        if self.is_rational():
            return hash(Fraction(self._c[0], self._d))
        return hash((self._c, self._d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return not self.is_zero()

    def __float__(self):
        c0, c1, c2, c3 = self._c
        b = BETA_FLOAT
        try:
            return (c0 + b * (c1 + b * (c2 + b * c3))) / self._d
        except OverflowError:
            return float(Fraction(c0, self._d)) + sum(
                float(Fraction(c, self._d)) * b ** k for k, c in enumerate((c1, c2, c3), 1)
            )

    # text -----------------------------------------------------------------
    def __str__(self):
        if self.is_rational():
            return _frac_str(Fraction(self._c[0], self._d))
        c = self.coefficients
        return f"{_frac_str(c[0])} + {_frac_str(c[1])}*b + {_frac_str(c[2])}*b^2 + {_frac_str(c[3])}*b^3"

    def canonical(self) -> str:
        """Full four-coefficient text form."""
        c = self.coefficients
        return f"{_frac_str(c[0])} + {_frac_str(c[1])}*b + {_frac_str(c[2])}*b^2 + {_frac_str(c[3])}*b^3"

    def __repr__(self):
        return f"FieldScalar({str(self)!r})"


def _qphi_mul(x, y):
    # (u + v phi)(s + t phi) with phi^2 = phi + 1
    u, v = x
    s, t = y
    return (u * s + v * t, u * t + v * s + v * t)


def _qphi_inv(x):
    u, v = x
    # conjugate of u + v phi is (u + v) - v phi, norm u^2 + u v - v^2
    norm = u * u + u * v - v * v
    return ((u + v) / norm, -v / norm)


def _exact_sign(c) -> int:
    # c0 + c1 b + c2 b^2 + c3 b^3 = A + b B with A = c0 + c2 phi, B = c1 + c3 phi
    A = (Fraction(c[0]), Fraction(c[2]))
    B = (Fraction(c[1]), Fraction(c[3]))
    sa = _qphi_sign(*A)
    sb = _qphi_sign(*B)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    A2 = _qphi_mul(A, A)
    phiB2 = _qphi_mul((Fraction(0), Fraction(1)), _qphi_mul(B, B))
    d = _qphi_sign(A2[0] - phiB2[0], A2[1] - phiB2[1])
    return sa * d


def _frac_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# sign certification by interval refinement


@dataclass(frozen=True)
class SignWitness:
    sign: int
    interval: tuple[Fraction, Fraction]


_BETA_LO = Fraction(1272019, 1000000)
_BETA_HI = Fraction(1272020, 1000000)


def _quartic(x: Fraction) -> Fraction:
    x2 = x * x
    return x2 * x2 - x2 - 1


@lru_cache(maxsize=None)
def _beta_enclosure(level: int) -> tuple[Fraction, Fraction]:
    """Rational bracket of b after ``level`` bisections of the initial one."""
    if level == 0:
        lo, hi = _BETA_LO, _BETA_HI
        assert _quartic(lo) < 0 < _quartic(hi)
        return lo, hi
    lo, hi = _beta_enclosure(level - 1)
    mid = (lo + hi) / 2
    q = _quartic(mid)
    if q == 0:  # pragma: no cover - b is irrational
        return mid, mid
    return (mid, hi) if q < 0 else (lo, mid)


def _interval_eval(c, den, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    vlo = Fraction(c[0])
    vhi = Fraction(c[0])
    plo, phi_ = Fraction(1), Fraction(1)
    for k in range(1, 4):
        plo *= lo
        phi_ *= hi
        if c[k] > 0:
            vlo += c[k] * plo
            vhi += c[k] * phi_
        elif c[k] < 0:
            vlo += c[k] * phi_
            vhi += c[k] * plo
    return vlo / den, vhi / den


def field_sign(a: FieldScalar) -> SignWitness:
    """Sign of ``a`` certified by a rational enclosure excluding zero."""
    a = FieldScalar.coerce(a)
    if a.is_zero():
        return SignWitness(0, (Fraction(0), Fraction(0)))
    level = 0
    while True:
        lo, hi = _beta_enclosure(level)
        vlo, vhi = _interval_eval(a._c, a._d, lo, hi)
        if vlo > 0:
            return SignWitness(1, (vlo, vhi))
        if vhi < 0:
            return SignWitness(-1, (vlo, vhi))
        level += 4


def field_arith(a, b, op: str) -> FieldScalar:
    a = FieldScalar.coerce(a)
    b = FieldScalar.coerce(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


def _floor(a: FieldScalar) -> int:
    guess = math.floor(float(a))
    while a < guess:
        guess -= 1
    while a >= guess + 1:
        guess += 1
    return guess


def field_decimal(a, digits: int) -> str:
    """Decimal expansion rounded half-up to ``digits`` fractional digits."""
    if digits < 1:
        raise ValueError("digits must be >= 1")
    a = FieldScalar.coerce(a)
    neg = a.sign() < 0
    mag = -a if neg else a
    scaled = _floor(mag * 10 ** digits + Fraction(1, 2))
    s = str(scaled).rjust(digits + 1, "0")
    out = f"{s[:-digits]}.{s[-digits:]}"
    if neg and scaled != 0:
        out = "-" + out
    return out


_TERM = re.compile(r"([+-]?)(\d+(?:/\d+|\.\d*)?)?(\*?b(?:\^(\d+))?)?")


def parse_scalar(text: str) -> FieldScalar:
    """Parse ``"c0 + c1*b + c2*b^2 + c3*b^3"``, a plain rational, or a decimal."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar text")
    s = s.replace("+-", "-").replace("-+", "-")
    pos = 0
    total = FieldScalar(0)
    b = FieldScalar.beta()
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse scalar {text!r}")
        sgn, num, bpart, power = m.groups()
        if num is None and bpart is None:
            raise ValueError(f"cannot parse scalar {text!r}")
        try:
            coef = Fraction(num) if num is not None else Fraction(1)
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {text!r}") from None
        if sgn == "-":
            coef = -coef
        term = FieldScalar(coef)
        if bpart is not None:
            term = term * b ** (int(power) if power else 1)
        total = total + term
        pos = m.end()
    return total


def to_field(x) -> FieldScalar:
    return FieldScalar.coerce(x)


def to_exact(x):
    """Demote rational field elements to ``Fraction`` (faster inner loops)."""
    if isinstance(x, FieldScalar):
        return x.as_fraction() if x.is_rational() else x
    if isinstance(x, int):
        return Fraction(x)
    return x


# ---------------------------------------------------------------------------


class QuadraticSurd:
    """``a + b*sqrt(d)`` with rational a, b and a fixed squarefree-ish d > 0.

    Only used where a threshold such as h = 1/sqrt(12) falls outside Q(b).
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=2):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = Fraction(d)

    @classmethod
    def sqrt(cls, q) -> "QuadraticSurd":
        """sqrt(q) for rational q > 0, as (1/den) * sqrt(num*den)."""
        q = Fraction(q)
        r = q.numerator * q.denominator
        root = math.isqrt(r)
        if root * root == r:
            return cls(Fraction(root, q.denominator), 0, 1)
        return cls(0, Fraction(1, q.denominator), r)

    def _lift(self, o):
        if isinstance(o, QuadraticSurd):
            if o.b and self.b and o.d != self.d:
                raise ValueError("mixed radicands")
            return o
        if isinstance(o, FieldScalar):
            o = o.as_fraction()
        return QuadraticSurd(o, 0, self.d)

    def _d_of(self, o):
        return self.d if self.b else o.d

    def __add__(self, o):
        o = self._lift(o)
        return QuadraticSurd(self.a + o.a, self.b + o.b, self._d_of(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticSurd(-self.a, -self.b, self.d)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) + (-self)

    def __mul__(self, o):
        o = self._lift(o)
        d = self._d_of(o)
        return QuadraticSurd(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        d = self._d_of(o)
        norm = o.a * o.a - o.b * o.b * d
        conj = QuadraticSurd(o.a / norm, -o.b / norm, d)
        return self * conj

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        diff = self.a * self.a - self.b * self.b * self.d
        return sa * ((diff > 0) - (diff < 0))

    def __eq__(self, o):
        try:
            return (self - o).sign() == 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b if self.b else 0))

    def __lt__(self, o):
        return (self - o).sign() < 0

    def __le__(self, o):
        return (self - o).sign() <= 0

    def __gt__(self, o):
        return (self - o).sign() > 0

    def __ge__(self, o):
        return (self - o).sign() >= 0

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(float(self.d))

    def __repr__(self):
        return f"QuadraticSurd({self.a} + {self.b}*sqrt({self.d}))"
