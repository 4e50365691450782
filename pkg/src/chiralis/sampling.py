"""Seeded random generators for exact test data.

Every randomized identity check in the package draws its data from these
helpers with an explicit ``random.Random`` instance, so runs are fully
replayable from a seed.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .exactnum import GaussRational, Poly, RatFunc

__all__ = [
    "rand_fraction",
    "rand_scalar",
    "rand_nonzero_scalar",
    "rand_distinct_scalars",
    "rand_poly",
    "rand_ratfunc",
    "rand_disc_point",
]


def rand_fraction(rng: random.Random, span: int = 4) -> Fraction:
    num = rng.randint(-span, span)
    den = rng.randint(1, 3)
    return Fraction(num, den)


def rand_scalar(rng: random.Random, span: int = 4, complex_odds: float = 0.4) -> GaussRational:
    re = rand_fraction(rng, span)
    im = rand_fraction(rng, span) if rng.random() < complex_odds else Fraction(0)
    return GaussRational(re, im)


def rand_nonzero_scalar(rng: random.Random, span: int = 4) -> GaussRational:
    while True:
        s = rand_scalar(rng, span)
        if s:
            return s


def rand_distinct_scalars(rng: random.Random, count: int, span: int = 6) -> list:
    out: list = []
    while len(out) < count:
        s = rand_scalar(rng, span)
        if s not in out:
            out.append(s)
    return out


def rand_poly(rng: random.Random, max_degree: int = 3, span: int = 4) -> Poly:
    degree = rng.randint(0, max_degree)
    coeffs = [rand_scalar(rng, span) for _ in range(degree + 1)]
    if not coeffs[-1]:
        coeffs[-1] = GaussRational(1)
    return Poly(coeffs)


def rand_ratfunc(rng: random.Random, max_poles: int = 3, span: int = 4) -> RatFunc:
    """Random rational function with denominator split into linear factors."""
    num = rand_poly(rng, max_degree=max_poles, span=span)
    poles = rand_distinct_scalars(rng, rng.randint(0, max_poles), span=span)
    den = Poly([GaussRational(1)])
    for c in poles:
        for _ in range(rng.randint(1, 2)):
            den = den * Poly([-c, GaussRational(1)])
    return RatFunc(num, den)


def rand_disc_point(rng: random.Random) -> GaussRational:
    """A point with |u|^2 < 1 exactly."""
    while True:
        re = Fraction(rng.randint(-3, 3), rng.randint(4, 7))
        im = Fraction(rng.randint(-3, 3), rng.randint(4, 7)) if rng.random() < 0.5 else Fraction(0)
        p = GaussRational(re, im)
        if p.norm() < 1:
            return p
