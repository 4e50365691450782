import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chiralis.exactnum import (
    INFINITY,
    GaussRational,
    LaurentTail,
    Point,
    PoleError,
    Poly,
    RatFunc,
    UnsupportedDenominatorError,
    evaluate,
    gauss_rational_roots,
    laurent_expand,
    partial_fractions,
    qi,
    residue_at,
    sqrt_gauss_rational,
)
from chiralis.sampling import rand_ratfunc, rand_scalar

U = RatFunc.variable(GaussRational(1))


def rf(num, den=None):
    num = Poly([GaussRational.coerce(c) for c in num])
    if den is None:
        return RatFunc(num)
    return RatFunc(num, Poly([GaussRational.coerce(c) for c in den]))


small_fractions = st.fractions(
    min_value=-5, max_value=5, max_denominator=6
)


@st.composite
def gauss_rationals(draw):
    return GaussRational(draw(small_fractions), draw(small_fractions))


class TestGaussRational:
    @given(gauss_rationals(), gauss_rationals(), gauss_rationals())
    def test_field_axioms(self, a, b, c):
        assert a + b == b + a
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        if c:
            assert (a * c) / c == a

    @given(gauss_rationals(), gauss_rationals())
    def test_conjugation_is_automorphism(self, a, b):
        assert (a + b).conjugate() == a.conjugate() + b.conjugate()
        assert (a * b).conjugate() == a.conjugate() * b.conjugate()
        assert a.conjugate().conjugate() == a

    def test_conjugation_fixes_rationals(self):
        assert qi(Fraction(3, 2)).conjugate() == qi(Fraction(3, 2))

    @given(gauss_rationals())
    def test_text_round_trip(self, a):
        assert GaussRational.parse(str(a)) == a

    def test_text_format(self):
        assert str(qi(Fraction(1, 2), Fraction(-3, 4))) == "1/2-3/4*i"
        assert str(qi(2)) == "2"
        assert GaussRational.parse("0+1/2*i") == qi(0, Fraction(1, 2))

    def test_sqrt(self):
        assert sqrt_gauss_rational(qi(0, 2)) in (qi(1, 1), qi(-1, -1))
        assert sqrt_gauss_rational(qi(-1)) in (qi(0, 1), qi(0, -1))
        assert sqrt_gauss_rational(qi(2)) is None


class TestFieldOps:
    def test_sum_of_simple_poles(self):
        # oracle: cross-multiply by hand, (u-2)+(u-1) over (u-1)(u-2)
        f = rf([1]) / (U - 1)
        g = rf([1]) / (U - 2)
        expected = rf([-3, 2], [2, -3, 1])
        assert f + g == expected

    def test_derivative_of_square(self):
        assert (U * U).derivative() == 2 * U

    def test_multiplication_by_zero(self):
        f = rf([1, 2], [3, 1])
        assert f * rf([0]) == rf([0])

    def test_division_by_zero_raises(self):
        with pytest.raises(ZeroDivisionError):
            rf([1]) / rf([0])

    def test_canonical_form_is_syntactic_equality(self):
        a = (U - 1) * (U + 1) / ((U - 1) * (U + 2))
        b = (U + 1) / (U + 2)
        assert a == b
        assert hash(a) == hash(b)

    def test_denominator_monic(self):
        f = rf([1], [2, 4])  # 1/(2+4u)
        assert f.den.leading() == qi(1)


class TestEvaluate:
    def test_simple_value(self):
        assert evaluate(rf([1]) / (U - 2), 3) == qi(1)

    def test_value_at_infinity(self):
        assert evaluate(U / (U + 1), INFINITY) == qi(1)
        assert evaluate(rf([1]) / (U + 1), INFINITY) == qi(0)

    def test_pole_error_names_point(self):
        with pytest.raises(PoleError) as err:
            evaluate(rf([1]) / (U - 2), 2)
        assert err.value.point == Point(2)

    def test_pole_at_infinity(self):
        with pytest.raises(PoleError):
            evaluate(U * U, INFINITY)


class TestResidues:
    def test_simple_pole(self):
        assert residue_at(rf([1]) / (U - 2), 2) == qi(1)

    def test_double_pole(self):
        assert residue_at(rf([1]) / ((U - 2) * (U - 2)), 2) == qi(0)

    def test_residue_at_infinity_of_u(self):
        # oracle: u = 1/t, du = -dt/t^2 gives -t^{-3}dt, no t^{-1} term
        assert residue_at(U, INFINITY) == qi(0)

    def test_residue_at_infinity_of_inverse(self):
        # 1/u du -> (t)(-1/t^2)dt = -dt/t, residue -1
        assert residue_at(1 / U, INFINITY) == qi(-1)

    def test_residue_sum_vanishes(self):
        rng = random.Random(20240811)
        for _ in range(25):
            f = rand_ratfunc(rng, max_poles=3)
            roots = gauss_rational_roots(f.den)
            total = residue_at(f, INFINITY)
            for c in roots:
                total = total + residue_at(f, c)
            assert total == qi(0)


class TestPartialFractions:
    def test_two_simple_poles(self):
        f = rf([1]) / ((U - 1) * (U - 2))
        dec = partial_fractions(f)
        assert dec.polynomial == Poly()
        assert sorted(
            ((c, order, coeff) for c, order, coeff in dec.terms),
            key=lambda t: t[0].sort_key(),
        ) == [(qi(1), 1, qi(-1)), (qi(2), 1, qi(1))]

    def test_pure_polynomial(self):
        dec = partial_fractions(U * U)
        assert dec.terms == ()
        assert dec.polynomial == Poly([qi(0), qi(0), qi(1)])

    def test_double_pole_at_i(self):
        f = rf([1]) / ((U - qi(0, 1)) * (U - qi(0, 1)))
        dec = partial_fractions(f)
        assert dec.terms == ((qi(0, 1), 2, qi(1)),)

    def test_recompose_round_trip(self):
        rng = random.Random(77)
        for _ in range(30):
            f = rand_ratfunc(rng)
            assert partial_fractions(f).recompose() == f

    def test_unsupported_denominator(self):
        with pytest.raises(UnsupportedDenominatorError):
            partial_fractions(rf([1]) / (U * U * U - 2))


class TestLaurent:
    def test_pure_double_pole(self):
        w = qi(Fraction(5, 3))
        f = rf([1]) / ((U - w) * (U - w))
        tail = laurent_expand(f, w, 2)
        assert tail.coefficients == {-2: qi(1)}

    def test_geometric_series(self):
        # oracle: 1/(u(u-1)) = -(1/u)(1 + u + u^2 + ...)
        f = rf([1]) / (U * (U - 1))
        tail = laurent_expand(f, 0, 1)
        assert tail.coefficients == {-1: qi(-1), 0: qi(-1), 1: qi(-1)}

    def test_binomial(self):
        tail = laurent_expand(U * U, 1, 2)
        assert tail.coefficients == {0: qi(1), 1: qi(2), 2: qi(1)}

    def test_matches_taylor_derivatives(self):
        rng = random.Random(99)
        for _ in range(15):
            f = rand_ratfunc(rng, max_poles=2)
            z = rand_scalar(rng, span=7)
            try:
                evaluate(f, z)
            except PoleError:
                continue
            tail = laurent_expand(f, z, 3)
            g = f
            fact = 1
            for k in range(4):
                assert tail[k] == evaluate(g, z) / fact
                g = g.derivative()
                fact *= k + 1


class TestConjugation:
    def test_multiplicative(self):
        rng = random.Random(5)
        for _ in range(15):
            f = rand_ratfunc(rng)
            g = rand_ratfunc(rng)
            assert (f * g).conjugate() == f.conjugate() * g.conjugate()


class TestGenericScalars:
    """The same algorithms must run with rational functions as scalars."""

    def test_nested_ratfunc_field(self):
        w = RatFunc.variable(GaussRational(1))  # inner variable
        one = RatFunc.const(GaussRational(1))
        x = RatFunc.variable(one)  # outer variable over Q(i)(w)
        f = one / (x - w) + one / (x + w)
        # 2x/(x^2 - w^2)
        expected = RatFunc(
            Poly([w * 0, w * 0 + 2]), Poly([-(w * w), w * 0, w * 0 + 1])
        )
        assert f == expected

    def test_nested_laurent(self):
        from chiralis.exactnum import local_expansion

        w = RatFunc.variable(GaussRational(1))
        one = RatFunc.const(GaussRational(1))
        x = RatFunc.variable(one)
        f = one / (x - w)
        m, coeffs = local_expansion(f, w, 1)
        assert m == 1
        assert coeffs[0] == one
        assert not coeffs[1]
        assert not coeffs[2]


class TestMobius:
    def test_translation_of_pole(self):
        f = rf([1]) / (U * U)
        g = f.compose_mobius(qi(1), qi(-1), qi(0), qi(1))  # u -> u－1
        assert g == rf([1]) / ((U - 1) * (U - 1))

    def test_singular_matrix_rejected(self):
        from chiralis.exactnum import ExactnumError

        with pytest.raises(ExactnumError):
            U.compose_mobius(qi(1), qi(1), qi(1), qi(1))


class TestRatFuncJson:
    def test_round_trip(self):
        from chiralis.serialize import ratfunc_from_json, ratfunc_to_json

        rng = random.Random(3)
        for _ in range(10):
            f = rand_ratfunc(rng)
            assert ratfunc_from_json(ratfunc_to_json(f)) == f
