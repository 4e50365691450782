"""Mode algebras acting on boson states.

Heisenberg operators attach a rational test function to a site (a finite
point or the point at infinity) and act by residue contraction plus a
creation term; energy operators attach a meromorphic vector field and act
through the three-part (contraction / Lie / creation) formula.  Central
terms are measured, never assumed.
"""

from __future__ import annotations

from fractions import Fraction

from .exactnum import (
    GaussRational,
    INFINITY,
    Point,
    QI_ONE,
    QI_ZERO,
    RatFunc,
    gauss_rational_roots,
    partial_fractions,
    residue_at,
)
from .geometry import (
    VectorField,
    atom_ratfunc,
    atom_sort_key,
    bifunction_atom_matrix,
    form_to_atoms,
    lie_derivative_bidiff,
    omega_bifunction,
)
from .states import DomainError, SymState, monomial_state, vacuum

__all__ = [
    "HeisenbergOp",
    "heis_apply",
    "heis_commutator_check",
    "mode_b",
    "VirasoroOp",
    "vir_apply",
    "L_mode",
    "virasoro_bracket_check",
    "bracket_L_b",
    "primary_check",
    "heis_insertion_apply",
    "heis_P_with_insertions",
    "insertion_suite",
    "spanning_states",
]


def _scalar(z):
    if isinstance(z, (GaussRational, RatFunc)):
        return z
    return GaussRational.coerce(z)


# ---------------------------------------------------------------------------
# Heisenberg operators
# ---------------------------------------------------------------------------


class HeisenbergOp:
    """A test function attached to a site (finite point or infinity)."""

    __slots__ = ("testfn", "site", "insertions")

    def __init__(self, testfn: RatFunc, site=INFINITY, insertions=None):
        object.__setattr__(self, "testfn", testfn)
        object.__setattr__(self, "site", site if isinstance(site, Point) else Point(_scalar(site)))
        object.__setattr__(self, "insertions", tuple(insertions) if insertions else None)

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("HeisenbergOp is immutable")


_PF_CACHE: dict = {}
_HEIS_VALUE_CACHE: dict = {}


def _phi_pole_parts(phi: RatFunc):
    dec = _PF_CACHE.get(phi)
    if dec is None:
        dec = partial_fractions(phi)
        _PF_CACHE[phi] = dec
    return dec


def heis_apply(op: HeisenbergOp, state: SymState) -> SymState:
    """Residue-contraction plus creation action on form states."""
    if op.insertions is not None:
        return heis_insertion_apply(op, state)
    phi = op.testfn
    site = op.site
    # contraction: each basis form pairs against phi by the residue at the site
    sign = 1 if site.is_infinity else -1

    def value(atom):
        key = (phi, site.value, atom)
        cached = _HEIS_VALUE_CACHE.get(key)
        if cached is None:
            cached = residue_at(phi * atom_ratfunc(atom), site) * sign
            _HEIS_VALUE_CACHE[key] = cached
        return cached

    out = state.contract(value)
    # creation: d of the part of phi singular only at the site's complement rule
    dec = _phi_pole_parts(phi)
    creation = {}
    if site.is_infinity:
        # test functions regular at infinity create; their derivative is a form
        for c, order, coeff in dec.terms:
            creation[("pole", c, order + 1)] = -order * coeff
    else:
        o = site.value
        for c, order, coeff in dec.terms:
            if c == o:
                creation[("pole", c, order + 1)] = -order * coeff
    for atom, coeff in creation.items():
        if coeff:
            out = out + state.multiply_atom(atom, coeff)
    return out


def heis_commutator_check(phi: RatFunc, psi: RatFunc, site=INFINITY):
    """Measured central scalar of the commutator on a spanning family.

    Returns the scalar; raises if the commutator is not central.  The
    expected value is -Res_site(phi dpsi) at a finite site and
    +Res_site(phi dpsi) at infinity.
    """
    site = site if isinstance(site, Point) else Point(_scalar(site))
    op1 = HeisenbergOp(phi, site)
    op2 = HeisenbergOp(psi, site)
    measured = None
    for v in spanning_states():
        lhs = heis_apply(op1, heis_apply(op2, v)) - heis_apply(op2, heis_apply(op1, v))
        if v == vacuum():
            measured = lhs.vacuum_coefficient()
        if lhs != v.scale(measured if measured is not None else QI_ZERO):
            raise AssertionError("test-function commutator is not central")
    expected = residue_at(phi * psi.derivative(), site)
    if not site.is_infinity:
        expected = -expected
    if measured != expected:
        raise AssertionError(
            f"central term {measured} does not match the residue {expected}"
        )
    return measured


def spanning_states(site_point=QI_ZERO, extra_pole=None):
    """A small spanning family used by the measured-bracket checks."""
    o = _scalar(site_point)
    c = _scalar(extra_pole) if extra_pole is not None else o + 3
    out = [vacuum()]
    out.append(monomial_state([("pole", o, 2)]))
    out.append(monomial_state([("pole", o, 3)]))
    out.append(monomial_state([("pole", c, 2)]))
    out.append(monomial_state([("pole", o, 2), ("pole", o, 2)]))
    out.append(monomial_state([("pole", o, 2), ("pole", c, 3)]))
    out.append(monomial_state([("poly", 1)]))
    return out


def mode_b(l: int, state: SymState, site_point=QI_ZERO) -> SymState:
    """The l-th oscillator mode at the origin-like site (l nonzero)."""
    if l == 0:
        raise ValueError("the oscillator family has no zero mode here")
    o = _scalar(site_point)
    u = RatFunc.variable(QI_ONE)
    phi = (u - o) ** l
    return heis_apply(HeisenbergOp(phi, Point(o)), state)


# ---------------------------------------------------------------------------
# Virasoro operators
# ---------------------------------------------------------------------------


class VirasoroOp:
    __slots__ = ("X", "site")

    def __init__(self, X: VectorField, site=INFINITY):
        object.__setattr__(self, "X", X if isinstance(X, VectorField) else VectorField(X))
        object.__setattr__(self, "site", site if isinstance(site, Point) else Point(_scalar(site)))

    def __setattr__(self, name, value):  # pragma: no cover
        raise AttributeError("VirasoroOp is immutable")


_OMEGA_CACHE: dict = {}


def _creation_state(xi_part: RatFunc) -> SymState:
    """Degree-2 creation state for the singular vector-field part.

    Realized as the symmetric state of the Lie derivative of the invariant
    bidifferential along the doubled field; this normalization is the one
    under which the measured bracket reproduces (l^3-l)/12.
    """
    key = xi_part
    cached = _OMEGA_CACHE.get(key)
    if cached is not None:
        return cached
    if xi_part.is_zero():
        out = SymState()
    else:
        F = lie_derivative_bidiff(VectorField(xi_part), omega_bifunction())
        matrix = bifunction_atom_matrix(F)
        terms: dict = {}
        half = Fraction(1, 2)
        for (a1, a2), coeff in matrix.items():
            mon = tuple(sorted((a1, a2), key=atom_sort_key))
            acc = terms.get(mon, QI_ZERO) + coeff * half
            terms[mon] = acc
        out = SymState(terms)
    _OMEGA_CACHE[key] = out
    return out


def _xi_split(xi: RatFunc, site: Point):
    """Split a vector-field coefficient for the site's case analysis.

    Returns (singular_part, everywhere_regular_part, rest): the singular
    part drives creation, the rest never does.
    """
    dec = _phi_pole_parts(xi)
    u = RatFunc.variable(QI_ONE)
    sing = RatFunc.const(QI_ZERO)
    if site.is_infinity:
        for c, order, coeff in dec.terms:
            sing = sing + coeff / (u - c) ** order
    else:
        o = site.value
        for c, order, coeff in dec.terms:
            if c == o:
                sing = sing + coeff / (u - o) ** order
    return sing


def vir_apply(op: VirasoroOp, state: SymState) -> SymState:
    """Three-part action: pair contraction, projected Lie term, creation."""
    X, site = op.X, op.site
    xi = X.xi
    _check_vir_domain(state, site)
    out = _vir_pairs(xi, site, state)
    out = out + _vir_lie(xi, site, state)
    sing = _xi_split(xi, site)
    creation = _creation_state(sing)
    if creation:
        for mon, c in state.terms.items():
            for cmon, cc in creation.terms.items():
                out = out + monomial_state(mon + cmon, c * cc)
    return out


def _check_vir_domain(state: SymState, site: Point):
    for atom in state.atoms():
        if site.is_infinity:
            if atom[0] == "poly":
                raise DomainError("state not regular at infinity")
        else:
            if atom[0] == "poly":
                raise DomainError("state has a pole at infinity, outside this site's domain")
            if atom[0] == "pole" and atom[1] != site.value:
                raise DomainError("state has poles away from the site")


_VIR_PAIR_CACHE: dict = {}
_VIR_LIE_CACHE: dict = {}


def _vir_pairs(xi: RatFunc, site: Point, state: SymState) -> SymState:
    sign = 1 if site.is_infinity else -1
    out = SymState()
    for mon, c in state.terms.items():
        for i in range(len(mon)):
            for j in range(i + 1, len(mon)):
                key = (xi, site.value, mon[i], mon[j])
                val = _VIR_PAIR_CACHE.get(key)
                if val is None:
                    val = residue_at(
                        xi * atom_ratfunc(mon[i]) * atom_ratfunc(mon[j]), site
                    )
                    _VIR_PAIR_CACHE[key] = val
                if val:
                    rest = mon[:i] + mon[i + 1: j] + mon[j + 1:]
                    out = out + monomial_state(rest, c * val * sign)
    return out


def _vir_lie(xi: RatFunc, site: Point, state: SymState) -> SymState:
    xi_poles = None

    def on_atom(atom):
        nonlocal xi_poles
        key = (xi, site.value, atom)
        cached = _VIR_LIE_CACHE.get(key)
        if cached is not None:
            return cached
        if xi_poles is None:
            xi_poles = gauss_rational_roots(xi.den)
        a = atom_ratfunc(atom)
        image = xi * a.derivative() + xi.derivative() * a
        poles = list(xi_poles)
        if atom[0] == "pole":
            poles.append(atom[1])
        atoms = form_to_atoms(image, poles=poles)
        kept = {}
        for at, coeff in atoms.items():
            if site.is_infinity:
                if at[0] == "pole":
                    kept[at] = coeff
            else:
                if at[0] == "pole" and at[1] == site.value:
                    kept[at] = coeff
        _VIR_LIE_CACHE[key] = kept
        return kept

    return state.derive_atoms(on_atom)


def L_mode(n: int, state: SymState, site_point=QI_ZERO) -> SymState:
    """The n-th energy mode: the vector field -u^(n+1) d/du at the origin site."""
    u = RatFunc.variable(QI_ONE)
    o = _scalar(site_point)
    xi = -((u - o) ** (n + 1))
    return vir_apply(VirasoroOp(VectorField(xi), Point(o)), state)


def virasoro_bracket_check(l: int, m: int, max_degree: int = 4):
    """Measure [L_l, L_m] - (l-m) L_{l+m} on spanning origin states.

    Returns the measured central scalar (and checks it is central).
    """
    states = [vacuum()]
    orders = [2, 3, 4, 5]
    for a in orders:
        states.append(monomial_state([("pole", QI_ZERO, a)]))
    for a in orders[:3]:
        for b in orders[:3]:
            if a <= b:
                states.append(monomial_state([("pole", QI_ZERO, a), ("pole", QI_ZERO, b)]))
    states.append(
        monomial_state([("pole", QI_ZERO, 2)] * min(3, max_degree))
    )

    def bracket(v):
        lhs = L_mode(l, L_mode(m, v)) - L_mode(m, L_mode(l, v))
        return lhs - L_mode(l + m, v).scale(l - m)

    measured = bracket(vacuum()).vacuum_coefficient()
    for v in states:
        if v.degree() > max_degree:
            continue
        if bracket(v) != v.scale(measured):
            raise AssertionError(
                f"[L_{l}, L_{m}] - ({l - m}) L_{l + m} is not central"
            )
    return measured


def bracket_L_b(m: int, n: int, state: SymState) -> SymState:
    """[L_m, b_n] applied to a state (for comparison with -n b_{n+m})."""
    return mode_b(n, L_mode(m, state)).scale(-1) + L_mode(m, mode_b(n, state))


def primary_check(state: SymState, weight) -> bool:
    """True iff the state transforms with the given weight under the
    stabilizer fields of the origin (u d/du, u^2 d/du, u^2(u-1) d/du).

    The sign convention follows the scaling grading: the weight is the
    eigenvalue of the rotation generator L_0.
    """
    weight = _scalar(weight)
    u = RatFunc.variable(QI_ONE)
    for xi in (u, u * u, u * u * (u - 1)):
        xi_prime_0 = xi.derivative().num.evaluate(QI_ZERO) / xi.derivative().den.evaluate(QI_ZERO)
        lhs = vir_apply(VirasoroOp(VectorField(xi), Point(QI_ZERO)), state)
        if lhs != state.scale(-weight * xi_prime_0):
            return False
    return True


# ---------------------------------------------------------------------------
# Insertion-modified operators on function states
# ---------------------------------------------------------------------------


def heis_insertion_apply(op: HeisenbergOp, state: SymState) -> SymState:
    """Site-at-an-insertion action on function states.

    ``op.site`` must be one of the insertion points; ``op.insertions`` is
    the full list of (point, weight) pairs.
    """
    phi = op.testfn
    insertions = op.insertions
    site = op.site
    if site.is_infinity:
        return heis_P_with_insertions(phi, insertions, state)
    zl = site.value
    weights = {Point(p).value if not isinstance(p, Point) else p.value: lam for p, lam in insertions}
    if zl not in weights:
        raise DomainError("site is not an insertion point")

    def value(atom):
        a = atom_ratfunc(atom)
        return -residue_at(phi * a.derivative(), zl)

    out = state.contract(value)
    # creation / scalar part per the regular/singular split of phi at the site
    dec = partial_fractions(phi)
    scalar_part = QI_ZERO
    sing = RatFunc.const(QI_ZERO)
    u = RatFunc.variable(QI_ONE)
    reg = RatFunc.const(QI_ZERO)
    for c, order, coeff in dec.terms:
        if c == zl:
            sing = sing + coeff / (u - c) ** order
        else:
            reg = reg + coeff / (u - c) ** order
    poly = RatFunc(dec.polynomial)
    reg = reg + poly
    # regular-at-site part acts by lambda_site * phi_reg(z_site)
    if reg:
        scalar_part = scalar_part + weights[zl] * (
            reg.num.evaluate(zl) / reg.den.evaluate(zl)
        )
    # singular part: (sum lambda_j) phi_s(infinity) - sum_{j != site} lambda_j phi_s(z_j)
    # plus multiplication by phi_s itself; phi_s vanishes at infinity
    if sing:
        for zj, lam in weights.items():
            if zj == zl:
                continue
            scalar_part = scalar_part - lam * (
                sing.num.evaluate(zj) / sing.den.evaluate(zj)
            )
        for c, order, coeff in dec.terms:
            if c == zl:
                out = out + state.multiply_atom(("pole", c, order), coeff)
    if scalar_part:
        out = out + state.scale(scalar_part)
    return out


def heis_P_with_insertions(phi: RatFunc, insertions, state: SymState) -> SymState:
    """The site-at-infinity operator on function states with insertions."""
    weights = [( _scalar(p if not isinstance(p, Point) else p.value), lam) for p, lam in insertions]

    def value(atom):
        a = atom_ratfunc(atom)
        return residue_at(phi * a.derivative(), INFINITY)

    out = state.contract(value)
    dec = partial_fractions(phi)
    u = RatFunc.variable(QI_ONE)
    reg = RatFunc.const(QI_ZERO)
    for c, order, coeff in dec.terms:
        reg = reg + coeff / (u - c) ** order
    const = QI_ZERO
    if dec.polynomial.coeffs:
        const = dec.polynomial.coeffs[0]
    scalar_part = QI_ZERO
    # regular-at-infinity part: multiply by (phi_reg - phi_reg(inf)) and act
    # by phi_reg(inf) * sum of weights; phi_reg(inf) = const
    for c, order, coeff in dec.terms:
        out = out + state.multiply_atom(("pole", c, order), coeff)
    total_weight = QI_ZERO
    for _, lam in weights:
        total_weight = total_weight + _scalar(lam)
    scalar_part = scalar_part + const * total_weight
    # polynomial (singular at infinity) part: sum_j lambda_j poly(z_j)
    poly = RatFunc(Poly_shift_const_removed(dec.polynomial))
    if poly:
        for zj, lam in weights:
            scalar_part = scalar_part + _scalar(lam) * (
                poly.num.evaluate(zj) / poly.den.evaluate(zj)
            )
    if scalar_part:
        out = out + state.scale(scalar_part)
    return out


def Poly_shift_const_removed(p):
    from .exactnum import Poly

    coeffs = list(p.coeffs)
    if coeffs:
        coeffs[0] = QI_ZERO
    return Poly(coeffs)


def insertion_suite(points, lambdas, rng) -> dict:
    """Verify the four insertion-operator identities on random data."""
    from .sampling import rand_ratfunc, rand_scalar

    pts = [_scalar(p) for p in points]
    lams = [_scalar(l) for l in lambdas]
    ins = list(zip(pts, lams))
    report = {}

    def rand_state():
        out = vacuum()
        for _ in range(rng.randint(0, 2)):
            zi = rng.choice(pts)
            out = out.multiply_atom(("pole", zi, rng.randint(1, 2)), rand_scalar(rng))
        return out if out else vacuum()

    # (1) the constant test function acts by the site weight
    one = RatFunc.const(QI_ONE)
    ok1 = True
    for l, z in enumerate(pts):
        op = HeisenbergOp(one, Point(z), ins)
        v = rand_state()
        ok1 = ok1 and heis_apply(op, v) == v.scale(lams[l])
    report["constant-acts-by-weight"] = ok1

    # (2) same-site commutator equals minus the residue pairing
    ok2 = True
    for _ in range(4):
        phi = rand_ratfunc(rng, max_poles=1)
        psi = rand_ratfunc(rng, max_poles=1)
        z = pts[0]
        op1 = HeisenbergOp(phi, Point(z), ins)
        op2 = HeisenbergOp(psi, Point(z), ins)
        v = rand_state()
        lhs = heis_apply(op1, heis_apply(op2, v)) - heis_apply(op2, heis_apply(op1, v))
        expected = -residue_at(phi * psi.derivative(), z)
        ok2 = ok2 and lhs == v.scale(expected)
    report["same-site-commutator"] = ok2

    # (3) distinct sites commute
    ok3 = True
    if len(pts) >= 2:
        for _ in range(4):
            phi = rand_ratfunc(rng, max_poles=1)
            psi = rand_ratfunc(rng, max_poles=1)
            op1 = HeisenbergOp(phi, Point(pts[0]), ins)
            op2 = HeisenbergOp(psi, Point(pts[1]), ins)
            v = rand_state()
            lhs = heis_apply(op1, heis_apply(op2, v))
            rhs = heis_apply(op2, heis_apply(op1, v))
            ok3 = ok3 and lhs == rhs
    report["distinct-sites-commute"] = ok3

    # (4) the site operators sum to the operator at infinity; this needs the
    # test function's finite poles to lie among the insertion points (else
    # the infinity-based operator does not preserve the supported subspace)
    ok4 = True
    u = RatFunc.variable(QI_ONE)
    for _ in range(4):
        phi = RatFunc.const(rand_scalar(rng)) + rand_scalar(rng) * u + rand_scalar(rng) * u * u
        for z in pts:
            phi = phi + rand_scalar(rng) / (u - z) ** rng.randint(1, 2)
        v = rand_state()
        total = SymState()
        for z in pts:
            total = total + heis_apply(HeisenbergOp(phi, Point(z), ins), v)
        rhs = heis_P_with_insertions(phi, ins, v)
        ok4 = ok4 and total == rhs
    report["sites-sum-to-infinity"] = ok4
    return report
