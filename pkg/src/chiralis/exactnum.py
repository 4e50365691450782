"""Exact scalar and univariate rational-function arithmetic.

Everything downstream runs on two nested number systems:

* ``GaussRational`` -- numbers a + b*i with a, b arbitrary-precision
  rationals.  This is the base scalar field.
* ``RatFunc`` -- reduced rational functions in one variable whose
  coefficients live in any field obeying the informal scalar protocol
  (arithmetic among themselves and with ints, truthiness as a zero test,
  ``conjugate``, ``sort_key``).  Since ``RatFunc`` itself obeys that
  protocol, rational functions over GaussRational can serve as the scalar
  field of a second ``RatFunc`` layer; that is how generic-point ("w")
  computations stay exact.

Canonical forms everywhere: fractions in lowest terms, polynomial
fractions gcd-reduced with monic denominator, so equality is plain
representation equality.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

try:  # exact big-rational backend; stdlib fallback keeps behaviour identical
    from gmpy2 import mpq as RATIONAL
except ImportError:  # pragma: no cover
    RATIONAL = Fraction

__all__ = [
    "ExactnumError",
    "PoleError",
    "UnsupportedDenominatorError",
    "GaussRational",
    "QI_ZERO",
    "QI_ONE",
    "QI_I",
    "qi",
    "Point",
    "INFINITY",
    "Poly",
    "RatFunc",
    "LaurentTail",
    "PartialFractions",
    "partial_fractions",
    "partial_fractions_known",
    "pole_order",
    "pole_part_coeffs",
    "residue_at",
    "evaluate",
    "laurent_expand",
    "sqrt_gauss_rational",
]


class ExactnumError(ArithmeticError):
    """Base class for exact-arithmetic failures."""


class PoleError(ExactnumError):
    """Evaluation was attempted at a pole; carries the offending point."""

    def __init__(self, point):
        self.point = point
        super().__init__(f"evaluation at a pole: {point}")


class UnsupportedDenominatorError(ExactnumError):
    """A denominator did not split into linear factors over Q(i)."""


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


def _fraction_str(x: Fraction) -> str:
    return str(x)


class GaussRational:
    """a + b*i with exact rational a, b; immutable and hashable."""

    __slots__ = ("re", "im", "_hash")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", RATIONAL(re))
        object.__setattr__(self, "im", RATIONAL(im))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover - safety net
        raise AttributeError("GaussRational is immutable")

    # -- coercion helpers ---------------------------------------------------

    @staticmethod
    def coerce(value) -> "GaussRational":
        if isinstance(value, GaussRational):
            return value
        if isinstance(value, (int, Fraction)) or type(value) is type(RATIONAL(0)):
            return GaussRational(value)
        raise TypeError(f"cannot coerce {value!r} to GaussRational")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussRational")
        return GaussRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (GaussRational(1) / self) ** (-n)
        out = GaussRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def inverse(self) -> "GaussRational":
        return GaussRational(1) / self

    def norm(self):
        """|z|^2 as an exact rational."""
        return self.re * self.re + self.im * self.im

    # -- structure ----------------------------------------------------------

    def __bool__(self):
        return bool(self.re or self.im)

    def __eq__(self, other):
        other = _as_gauss(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        # consistent with hash(int)/hash(Fraction) when the value is real,
        # so mixed-coefficient polynomials hash compatibly with equality
        h = self._hash
        if h is None:
            h = hash(self.re) if self.im == 0 else hash((self.re, self.im))
            object.__setattr__(self, "_hash", h)
        return h

    def sort_key(self):
        return ("q", self.re, self.im)

    def is_rational(self) -> bool:
        return self.im == 0

    # -- text format --------------------------------------------------------

    def __str__(self):
        if self.im == 0:
            return _fraction_str(self.re)
        sign = "+" if self.im > 0 else "-"
        return f"{_fraction_str(self.re)}{sign}{_fraction_str(abs(self.im))}*i"

    def __repr__(self):
        return f"GaussRational('{self}')"

    @staticmethod
    def parse(text: str) -> "GaussRational":
        """Parse the "a/b" / "a/b+c/d*i" text format."""
        s = text.strip().replace(" ", "")
        if not s:
            raise ValueError("empty scalar string")
        if not s.endswith("*i") and not s.endswith("i"):
            return GaussRational(_parse_rat(s))
        if s.endswith("*i"):
            body = s[:-2]
        else:
            body = s[:-1]
            if body in ("", "+", "-"):
                return GaussRational(0, _parse_rat(body + "1"))
        # split real and imaginary on the last +/- that is not part of a
        # fraction's own sign (scan from the right, skipping position 0)
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "+-/*":
                re_part, im_part = body[:k], body[k:]
                im = _parse_rat(im_part) if im_part not in ("+", "-") else _parse_rat(im_part + "1")
                return GaussRational(_parse_rat(re_part), im)
        return GaussRational(0, _parse_rat(body))


def _parse_rat(text: str):
    return RATIONAL(Fraction(text))


def _as_gauss(value):
    if isinstance(value, GaussRational):
        return value
    if isinstance(value, (int, Fraction)) or type(value) is type(RATIONAL(0)):
        return GaussRational(value)
    return NotImplemented


QI_ZERO = GaussRational(0)
QI_ONE = GaussRational(1)
QI_I = GaussRational(0, 1)


def qi(re=0, im=0) -> GaussRational:
    """Shorthand constructor."""
    return GaussRational(re, im)


def sqrt_gauss_rational(s: GaussRational):
    """Exact square root in Q(i), or None when no such root exists."""
    s = GaussRational.coerce(s)
    if not s:
        return QI_ZERO
    n = s.norm()
    r = _fraction_sqrt(n)
    if r is None:
        return None
    half = RATIONAL(1, 2)
    a2 = (s.re + r) * half
    if a2 >= 0:
        a = _fraction_sqrt(a2)
        if a is not None and a != 0:
            b = s.im / (2 * a)
            cand = GaussRational(a, b)
            if cand * cand == s:
                return cand
    if s.im == 0 and s.re < 0:
        b = _fraction_sqrt(-s.re)
        if b is not None:
            return GaussRational(0, b)
    return None


def _fraction_sqrt(x):
    if x < 0:
        return None
    pn = math.isqrt(x.numerator)
    pd = math.isqrt(x.denominator)
    if pn * pn == x.numerator and pd * pd == x.denominator:
        return RATIONAL(pn, pd)
    return None


# ---------------------------------------------------------------------------
# Points on the projective line
# ---------------------------------------------------------------------------


class Point:
    """A point of the line: a finite coordinate value or the point at infinity."""

    __slots__ = ("value",)

    def __init__(self, value=None):
        if value is not None and not isinstance(value, GaussRational):
            value = GaussRational.coerce(value)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("Point is immutable")

    @property
    def is_infinity(self) -> bool:
        return self.value is None

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(("point", self.value))

    def __str__(self):
        return "inf" if self.is_infinity else str(self.value)

    def __repr__(self):
        return f"Point({self})"


INFINITY = Point()


def as_point(z) -> Point:
    if isinstance(z, Point):
        return z
    return Point(GaussRational.coerce(z))


# ---------------------------------------------------------------------------
# Polynomials over a scalar field
# ---------------------------------------------------------------------------


def _trim(coeffs: list) -> tuple:
    n = len(coeffs)
    while n and not coeffs[n - 1]:
        n -= 1
    coeffs = coeffs[:n]
    # promote plain int/Fraction entries to the coefficient field so that
    # equal polynomials always hash equal and division stays exact
    one = None
    for c in coeffs:
        if hasattr(c, "sort_key"):
            one = c * 0 + 1
            break
    if one is not None:
        coeffs = [c if hasattr(c, "sort_key") else one * c for c in coeffs]
    else:
        coeffs = [RATIONAL(c) if isinstance(c, int) else c for c in coeffs]
    return tuple(coeffs)


class Poly:
    """Dense univariate polynomial, coefficients low-to-high degree."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable = ()):
        object.__setattr__(self, "coeffs", _trim(list(coeffs)))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("Poly is immutable")

    # degree of the zero polynomial is -1 by convention
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def leading(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.coeffs)
            object.__setattr__(self, "_hash", h)
        return h

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] = out[k] + c
        return Poly(out)

    def __sub__(self, other):
        out = list(self.coeffs)
        for k, c in enumerate(other.coeffs):
            if k < len(out):
                out[k] = out[k] - c
            else:
                out.append(-c)
        return Poly(out)

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if not ca:
                continue
            for j, cb in enumerate(b):
                out[i + j] = out[i + j] + ca * cb
        return Poly(out)

    def scale(self, s):
        if not s:
            return Poly()
        return Poly([c * s for c in self.coeffs])

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Poly([_one_like(self)])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def divmod(self, other: "Poly"):
        """Exact field division with remainder."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), self
        quot = [0] * (dq + 1)
        lead = other.coeffs[-1]
        for k in range(dq, -1, -1):
            top = rem[k + len(other.coeffs) - 1]
            if not top:
                continue
            q = top / lead
            quot[k] = q
            for j, c in enumerate(other.coeffs):
                rem[k + j] = rem[k + j] - q * c
        return Poly(quot), Poly(rem)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        lead = self.leading()
        return Poly([c / lead for c in self.coeffs])

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            r = a % b
            if not r.is_zero():
                r = r.monic()  # keeps coefficient growth in check
            a, b = b, r
        if a.is_zero():
            return a
        return a.monic()

    def derivative(self) -> "Poly":
        return Poly([c * k for k, c in enumerate(self.coeffs)][1:])

    def evaluate(self, x):
        out = None
        for c in reversed(self.coeffs):
            out = c if out is None else out * x + c
        if out is None:
            return x * 0  # zero of the right field
        return out

    def shift(self, c) -> "Poly":
        """Compose with u -> u + c (Taylor shift)."""
        out = Poly([0])
        for coeff in reversed(self.coeffs):
            out = out * Poly([c, 1]) + Poly([coeff])
        return out

    def reversed_padded(self, degree: int) -> "Poly":
        """Coefficient-reverse as a degree-``degree`` polynomial (u -> 1/u)."""
        if self.degree > degree:
            raise ValueError("padding degree too small")
        out = [0] * (degree + 1)
        for k, c in enumerate(self.coeffs):
            out[degree - k] = c
        return Poly(out)

    def sort_key(self):
        return ("poly", len(self.coeffs), tuple(_key_of(c) for c in self.coeffs))

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"


def _key_of(scalar):
    sk = getattr(scalar, "sort_key", None)
    if sk is not None:
        return sk()
    return ("int", scalar)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RatFunc:
    """Reduced rational function num/den; den monic, gcd(num, den) = 1."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Poly, den: Poly | None = None, *, _reduced=False):
        if den is None:
            den = Poly([_one_like(num)]) if num.coeffs else Poly([1])
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not _reduced:
            if num.is_zero():
                den = Poly([_one_like(den)])
            else:
                g = num.gcd(den)
                if g.degree > 0:
                    num = num // g
                    den = den // g
                lead = den.leading()
                den = den.monic()
                num = Poly([c / lead for c in num.coeffs])
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("RatFunc is immutable")

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def const(c) -> "RatFunc":
        return RatFunc(Poly([c]))

    @staticmethod
    def variable(one=1) -> "RatFunc":
        """The coordinate function u (coefficients 0, 1 scaled by ``one``)."""
        return RatFunc(Poly([0 * one, one]))

    @staticmethod
    def from_roots(roots, one=1) -> "RatFunc":
        p = Poly([one])
        for r in roots:
            p = p * Poly([-r, one])
        return RatFunc(p)

    # -- field protocol --------------------------------------------------------

    def __bool__(self):
        return not self.num.is_zero()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def constant_value(self):
        if not self.is_constant():
            raise ValueError("not a constant rational function")
        if self.num.is_zero():
            return _one_like(self.den) * 0
        return self.num.coeffs[0] / self.den.coeffs[0]

    def __eq__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return a.num == b.num and a.den == b.den

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.num, self.den))
            object.__setattr__(self, "_hash", h)
        return h

    def _level(self) -> int:
        """Nesting depth: 0 over Q(i), 1 over Q(i)(w), and so on."""
        c = self.den.coeffs[0]
        lvl = 0
        while isinstance(c, RatFunc):
            lvl += 1
            c = c.den.coeffs[0]
        return lvl

    def _align(self, other):
        """Bring self and other to a common nesting level, or NotImplemented.

        A shallower rational function acts as a scalar constant of the
        deeper field.
        """
        if isinstance(other, RatFunc):
            sl, ol = self._level(), other._level()
            a, b = self, other
            while ol < sl:
                b = RatFunc(Poly([b]))
                ol += 1
            while sl < ol:
                a = RatFunc(Poly([a]))
                sl += 1
            return a, b
        if isinstance(other, (int, Fraction, GaussRational)) or type(other) is type(RATIONAL(0)):
            base = _one_like(self.den)
            return self, RatFunc(Poly([base * other]))
        return self, NotImplemented

    def __add__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return RatFunc(a.num * b.den + b.num * a.den, a.den * b.den)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return RatFunc(a.num * b.den - b.num * a.den, a.den * b.den)

    def __rsub__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return b - a

    def __mul__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return RatFunc(a.num * b.num, a.den * b.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        if b.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(a.num * b.den, a.den * b.num)

    def __rtruediv__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return b / a

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (1 / self) ** (-n)
        out = RatFunc.const(_one_like(self.den))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self) -> "RatFunc":
        return RatFunc(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def conjugate(self) -> "RatFunc":
        return RatFunc(
            Poly([_conj(c) for c in self.num.coeffs]),
            Poly([_conj(c) for c in self.den.coeffs]),
        )

    def compose_mobius(self, a, b, c, d) -> "RatFunc":
        """Substitute u -> (a*u + b)/(c*u + d)."""
        if not (a * d - b * c):
            raise ExactnumError("singular Mobius substitution")
        top = Poly([b, a])
        bot = Poly([d, c])
        deg = max(self.num.degree, self.den.degree, 0)

        def clear(p: Poly) -> Poly:
            out = Poly()
            for k, coeff in enumerate(p.coeffs):
                out = out + (top ** k * bot ** (deg - k)).scale(coeff)
            return out

        return RatFunc(clear(self.num), clear(self.den))

    def sort_key(self):
        return ("rf", self.num.sort_key(), self.den.sort_key())

    def __str__(self):
        def poly_str(p: Poly) -> str:
            if p.is_zero():
                return "0"
            parts = []
            for k, c in enumerate(p.coeffs):
                if not c:
                    continue
                if k == 0:
                    parts.append(f"{c}")
                elif k == 1:
                    parts.append(f"({c})*u")
                else:
                    parts.append(f"({c})*u^{k}")
            return " + ".join(parts)

        if self.den.degree == 0 and self.den.coeffs and self.den.coeffs[0] == 1:
            return poly_str(self.num)
        return f"({poly_str(self.num)})/({poly_str(self.den)})"

    def __repr__(self):
        return f"RatFunc({self})"


def _one_like(p: Poly):
    for c in p.coeffs:
        return c * 0 + 1
    return 1


def _conj(c):
    conj = getattr(c, "conjugate", None)
    if conj is not None:
        return conj()
    return c


# ---------------------------------------------------------------------------
# Local expansion machinery (works over any scalar field)
# ---------------------------------------------------------------------------


def pole_order(f: RatFunc, c) -> int:
    """Multiplicity of u = c as a root of the denominator."""
    order = 0
    den = f.den
    lin = Poly([-c, c * 0 + 1])
    while True:
        q, r = den.divmod(lin)
        if not r.is_zero():
            return order
        order += 1
        den = q


def _series_inverse_mul(num: list, den: list, terms: int) -> list:
    """Coefficients of (num/den) as a power series; den[0] must be a unit."""
    lead = den[0]
    out = []
    for k in range(terms):
        acc = num[k] if k < len(num) else lead * 0
        for j in range(1, min(k, len(den) - 1) + 1):
            acc = acc - den[j] * out[k - j]
        out.append(acc / lead)
    return out


def local_expansion(f: RatFunc, c, order: int):
    """Laurent coefficients of f at u = c, from the pole order up to ``order``.

    Returns (pole_order m, coeffs) with coeffs[j] the coefficient of
    (u-c)^(j-m), j = 0 .. order+m.
    """
    if f.is_zero():
        return 0, []
    m = pole_order(f, c)
    lin = Poly([-c, c * 0 + 1])
    den = f.den
    for _ in range(m):
        den = den // lin
    terms = order + m + 1
    if terms <= 0:
        return m, []
    num_shift = f.num.shift(c)
    den_shift = den.shift(c)
    ncs = list(num_shift.coeffs) or [c * 0]
    dcs = list(den_shift.coeffs)
    return m, _series_inverse_mul(ncs, dcs, terms)


def pole_part_coeffs(f: RatFunc, c) -> dict:
    """{order l: coefficient of (u-c)^(-l)} of the pole part of f at c."""
    m = pole_order(f, c)
    if m == 0:
        return {}
    _, coeffs = local_expansion(f, c, -1)
    return {m - j: coeffs[j] for j in range(m) if coeffs[j]}


class LaurentTail:
    """Truncated Laurent expansion around a finite point."""

    __slots__ = ("center", "order", "coefficients")

    def __init__(self, center, order: int, coefficients: dict):
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "order", order)
        object.__setattr__(
            self, "coefficients", {k: v for k, v in coefficients.items() if v}
        )

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("LaurentTail is immutable")

    def __getitem__(self, k: int):
        return self.coefficients.get(k, QI_ZERO)

    def __eq__(self, other):
        if not isinstance(other, LaurentTail):
            return NotImplemented
        return (
            self.center == other.center
            and self.order == other.order
            and self.coefficients == other.coefficients
        )

    def __repr__(self):
        items = ", ".join(f"{k}: {v}" for k, v in sorted(self.coefficients.items()))
        return f"LaurentTail(center={self.center}, order={self.order}, {{{items}}})"


def laurent_expand(f: RatFunc, z, order: int) -> LaurentTail:
    """Laurent coefficients of f at the finite point z, up to (u-z)^order."""
    z = as_point(z)
    if z.is_infinity:
        raise ExactnumError("laurent_expand expects a finite point")
    c = z.value
    m, coeffs = local_expansion(f, c, order)
    return LaurentTail(c, order, {j - m: coeffs[j] for j in range(len(coeffs))})


def evaluate(f: RatFunc, z) -> GaussRational:
    """Exact value of f at a point; at infinity the leading-degree limit."""
    z = as_point(z)
    if z.is_infinity:
        dn, dd = f.num.degree, f.den.degree
        if f.is_zero() or dn < dd:
            return QI_ZERO
        if dn > dd:
            raise PoleError(INFINITY)
        return f.num.leading() / f.den.leading()
    c = z.value
    top = f.num.evaluate(c)
    bot = f.den.evaluate(c)
    if not bot:
        raise PoleError(z)
    return top / bot


def eval_at_scalar(f: RatFunc, c):
    """Value of f at a scalar point of the coefficient field (exact)."""
    bot = f.den.evaluate(c)
    if not bot:
        raise PoleError(Point(c) if isinstance(c, GaussRational) else c)
    return f.num.evaluate(c) / bot


def at_infinity_substitution(f: RatFunc) -> RatFunc:
    """f(1/t) as a rational function of t."""
    deg = max(f.num.degree, f.den.degree, 0)
    return RatFunc(f.num.reversed_padded(deg), f.den.reversed_padded(deg))


def residue_at(f: RatFunc, z) -> GaussRational:
    """Residue of the one-form f(u) du at the point z (infinity allowed).

    ``z`` may be a Point, an int/Fraction/GaussRational, or a scalar of
    whatever field f's coefficients live in (for generic-point work).
    """
    zero = _one_like(f.den) * 0
    if isinstance(z, Point):
        if z.is_infinity:
            g = at_infinity_substitution(f)
            t = RatFunc.variable(_one_like(f.den))
            g = g * (-(t ** -2))
            parts = pole_part_coeffs(g, zero)
            return parts.get(1, zero)
        c = z.value
    else:
        c = z
    parts = pole_part_coeffs(f, c)
    return parts.get(1, zero)


# ---------------------------------------------------------------------------
# Partial fractions
# ---------------------------------------------------------------------------


class PartialFractions:
    """Polynomial part plus pole terms (pole c, order l, coefficient)."""

    __slots__ = ("polynomial", "terms")

    def __init__(self, polynomial: Poly, terms):
        object.__setattr__(self, "polynomial", polynomial)
        object.__setattr__(self, "terms", tuple(terms))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("PartialFractions is immutable")

    def recompose(self, one=QI_ONE) -> RatFunc:
        out = RatFunc(self.polynomial)
        u = RatFunc.variable(one)
        for c, order, coeff in self.terms:
            out = out + RatFunc.const(coeff) / (u - c) ** order
        return out

    def __repr__(self):
        return f"PartialFractions(poly={self.polynomial!r}, terms={self.terms!r})"


def partial_fractions_known(f: RatFunc, poles) -> PartialFractions:
    """Partial fractions given the (super)set of finite poles; no factoring.

    Raises UnsupportedDenominatorError when pole parts at the listed points
    do not exhaust the denominator.
    """
    terms = []
    remainder = f
    for c in poles:
        parts = pole_part_coeffs(remainder, c)
        if not parts:
            continue
        u = RatFunc.variable(_one_like(f.den))
        for order in sorted(parts, reverse=True):
            coeff = parts[order]
            terms.append((c, order, coeff))
            remainder = remainder - RatFunc.const(coeff) / (u - c) ** order
    if remainder.den.degree != 0:
        raise UnsupportedDenominatorError(
            "denominator has poles outside the supplied set"
        )
    poly = Poly([c / remainder.den.coeffs[0] for c in remainder.num.coeffs])
    return PartialFractions(poly, terms)


def partial_fractions(f: RatFunc) -> PartialFractions:
    """Full decomposition over Q(i); denominator must split into linear factors."""
    roots = gauss_rational_roots(f.den)
    return partial_fractions_known(f, roots)


# ---------------------------------------------------------------------------
# Root finding over Q(i)
# ---------------------------------------------------------------------------

_CANDIDATE_NORM_LIMIT = 10**10


def gauss_rational_roots(p: Poly) -> list:
    """Distinct roots of a Q(i)-split polynomial (multiplicities implied).

    Raises UnsupportedDenominatorError when the polynomial has a factor
    with no root in Q(i).
    """
    if p.is_zero():
        raise ValueError("zero polynomial")
    coeffs = [GaussRational.coerce(c) if not isinstance(c, GaussRational) else c for c in p.coeffs]
    work = Poly(coeffs)
    roots = []
    while work.degree >= 1:
        root = _find_one_root(work)
        if root is None:
            raise UnsupportedDenominatorError(
                "denominator factor has no root in Q(i)"
            )
        if root not in roots:
            roots.append(root)
        lin = Poly([-root, QI_ONE])
        while work.degree >= 1:
            q, r = work.divmod(lin)
            if not r.is_zero():
                break
            work = q
    return roots


def _find_one_root(p: Poly):
    coeffs = list(p.coeffs)
    # strip u | p
    if not coeffs[0]:
        return QI_ZERO
    if p.degree == 1:
        return -coeffs[0] / coeffs[1]
    if p.degree == 2:
        a, b, c = coeffs[2], coeffs[1], coeffs[0]
        disc = b * b - 4 * a * c
        root = sqrt_gauss_rational(disc)
        if root is None:
            return None
        return (-b + root) / (2 * a)
    # clear Fraction denominators -> Z[i] coefficients
    denoms = []
    for co in coeffs:
        denoms.append(int(co.re.denominator))
        denoms.append(int(co.im.denominator))
    scale = math.lcm(*denoms)
    zi = [(co.re * scale, co.im * scale) for co in coeffs]
    lead = zi[-1]
    const = zi[0]
    n_const = int(const[0] * const[0] + const[1] * const[1])
    n_lead = int(lead[0] * lead[0] + lead[1] * lead[1])
    if n_const > _CANDIDATE_NORM_LIMIT or n_lead > _CANDIDATE_NORM_LIMIT:
        raise UnsupportedDenominatorError(
            "coefficient size beyond the supported input class"
        )
    tops = _gaussian_integers_of_dividing_norm(n_const)
    bottoms = _gaussian_integers_of_dividing_norm(n_lead)
    seen = set()
    for beta in bottoms:
        bn = beta.norm()
        if not bn:
            continue
        for alpha in tops:
            cand = alpha / beta
            key = (cand.re, cand.im)
            if key in seen:
                continue
            seen.add(key)
            if not p.evaluate(cand):
                return cand
    return None


def _gaussian_integers_of_dividing_norm(n: int) -> list:
    """All Gaussian integers whose norm divides n (n > 0), with units."""
    divisors = set()
    k = 1
    while k * k <= n:
        if n % k == 0:
            divisors.add(k)
            divisors.add(n // k)
        k += 1
    out = []
    for d in sorted(divisors):
        x = 0
        while x * x <= d:
            y2 = d - x * x
            y = math.isqrt(y2)
            if y * y == y2:
                for sx in (x, -x):
                    for sy in (y, -y):
                        out.append(GaussRational(sx, sy))
                        out.append(GaussRational(sy, sx))
            x += 1
    uniq = {}
    for g in out:
        uniq[(g.re, g.im)] = g
    return list(uniq.values())
