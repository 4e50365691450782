"""Truncated Laurent-series scalars with exact coefficients.

A jet represents sum_{k >= val} c_k t^k known exactly for k < prec and
unknown beyond; arithmetic propagates the precision bound, so any
extraction below the bound is exact (a PrecisionError is raised rather
than ever returning a possibly-corrupt coefficient).  Coefficients live
in any scalar ring with the usual protocol, including jets themselves:
two independent formal directions nest with level-aware coercion, just
like nested rational functions, but with cheap bounded arithmetic.

These are the workhorse scalars of the operator-product engine: a field
applied "at z + t" has jet-valued matrix entries, and expansion orders
are read off directly instead of canonicalizing rational functions of a
generic coordinate.
"""

from __future__ import annotations

from fractions import Fraction

from .exactnum import GaussRational, RATIONAL, RatFunc

__all__ = ["Jet", "JetPrecisionError", "jet_point"]


class JetPrecisionError(ArithmeticError):
    """An extraction or division needed orders beyond the tracked bound."""


#: precision sentinel for exact scalars (known to all orders)
EXACT = 1 << 60


def _plain_scalar(x):
    return (
        isinstance(x, (int, Fraction, GaussRational, RatFunc))
        or type(x) is type(RATIONAL(0))
    )


class Jet:
    __slots__ = ("val", "coeffs", "prec", "one", "_hash")

    def __init__(self, val: int, coeffs, prec: int, one):
        coeffs = list(coeffs)
        while coeffs and not coeffs[0]:
            coeffs.pop(0)
            val += 1
        if val >= prec:
            coeffs = []
            val = prec
        else:
            coeffs = coeffs[: prec - val]
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "prec", prec)
        object.__setattr__(self, "one", one)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("Jet is immutable")

    # -- level-aware coercion --------------------------------------------------

    def _level(self) -> int:
        lvl = 0
        one = self.one
        while isinstance(one, Jet):
            lvl += 1
            one = one.one
        return lvl

    def _align(self, other):
        if isinstance(other, Jet):
            a, b = self, other
            la, lb = a._level(), b._level()
            while lb < la:
                b = Jet(0, [b], a.prec, b * 0 + 1)
                lb += 1
            while la < lb:
                a = Jet(0, [a], b.prec, a * 0 + 1)
                la += 1
            return a, b
        if _plain_scalar(other):
            # a bare scalar is exact: it never erodes the precision window
            return self, Jet(0, [self.one * other], EXACT, self.one)
        return self, NotImplemented

    def coefficient(self, k: int):
        """Exact coefficient of t^k; raises if k is beyond the bound."""
        if k >= self.prec:
            raise JetPrecisionError(f"order {k} beyond precision {self.prec}")
        if k < self.val or k - self.val >= len(self.coeffs):
            return self.one * 0
        return self.coeffs[k - self.val]

    # -- ring operations ---------------------------------------------------------

    def __add__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        prec = min(a.prec, b.prec)
        lo = min(a.val, b.val)
        hi = min(prec, max(a.val + len(a.coeffs), b.val + len(b.coeffs)))
        zero = a.one * 0
        out = []
        for k in range(lo, hi):
            x = a.coeffs[k - a.val] if 0 <= k - a.val < len(a.coeffs) else zero
            y = b.coeffs[k - b.val] if 0 <= k - b.val < len(b.coeffs) else zero
            out.append(x + y)
        return Jet(lo, out, prec, a.one)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.val, [-c for c in self.coeffs], self.prec, self.one)

    def __sub__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return b + (-a)

    def __mul__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        prec = min(a.val + b.prec, b.val + a.prec)
        if not a.coeffs or not b.coeffs:
            return Jet(prec, [], prec, a.one)
        val = a.val + b.val
        width = min(prec - val, len(a.coeffs) + len(b.coeffs) - 1)
        if width <= 0:
            return Jet(prec, [], prec, a.one)
        out = [None] * width
        for i, x in enumerate(a.coeffs):
            if not x:
                continue
            for j, y in enumerate(b.coeffs):
                k = i + j
                if k >= width:
                    break
                prod = x * y
                out[k] = prod if out[k] is None else out[k] + prod
        zero = a.one * 0
        out = [zero if c is None else c for c in out]
        return Jet(val, out, prec, a.one)

    __rmul__ = __mul__

    def inverse(self) -> "Jet":
        if not self.coeffs:
            raise JetPrecisionError("cannot invert a series with no known part")
        lead = self.coeffs[0]
        width = self.prec - self.val
        inv = [self.one * 0] * width
        inv[0] = 1 / lead
        for k in range(1, width):
            acc = self.one * 0
            for j in range(1, min(k, len(self.coeffs) - 1) + 1):
                acc = acc + self.coeffs[j] * inv[k - j]
            inv[k] = -(acc * inv[0])
        return Jet(-self.val, inv, -self.val + width, self.one)

    def __truediv__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        return b * a.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return Jet(0, [self.one], self.prec, self.one)
        out = None
        base = self
        while n:
            if n & 1:
                out = base if out is None else out * base
            n >>= 1
            if n:
                base = base * base
        return out

    # -- structure ------------------------------------------------------------------

    def __bool__(self):
        return any(bool(c) for c in self.coeffs)

    def __eq__(self, other):
        a, b = self._align(other)
        if b is NotImplemented:
            return NotImplemented
        prec = min(a.prec, b.prec)
        lo = min(a.val, b.val)
        zero = a.one * 0
        for k in range(lo, prec):
            x = a.coeffs[k - a.val] if 0 <= k - a.val < len(a.coeffs) else zero
            y = b.coeffs[k - b.val] if 0 <= k - b.val < len(b.coeffs) else zero
            if bool(x) != bool(y) or (x and x != y):
                return False
        return True

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.val, self.coeffs, self.prec))
            object.__setattr__(self, "_hash", h)
        return h

    def conjugate(self):
        return Jet(self.val, [c.conjugate() for c in self.coeffs], self.prec, self.one)

    def sort_key(self):
        return (
            "jet",
            self.val,
            tuple(
                c.sort_key() if hasattr(c, "sort_key") else ("int", c)
                for c in self.coeffs
            ),
        )

    def __repr__(self):
        bits = [f"({c})t^{self.val + i}" for i, c in enumerate(self.coeffs) if c]
        return "Jet(" + (" + ".join(bits) or "0") + f"; O(t^{self.prec}))"


def jet_point(z, prec: int) -> Jet:
    """The jet of the moving point z + t to the given precision."""
    if isinstance(z, int):
        z = GaussRational(z)
    one = z * 0 + 1
    return Jet(0, [z, one], prec, one)


def inverse_scalar(x):
    return 1 / x
