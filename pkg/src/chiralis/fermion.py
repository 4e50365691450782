"""Neutral fermion, the two-sector ghost system, and kernel-driven bosons.

Fermionic states are exterior monomials over half-form coefficient atoms
(the same pole/monomial tuples as everywhere else, read against the
square-root trivialization); signs are normalized by sorted insertion.
The two-sector system carries one exterior factor per twist, with the
crossing sign between sectors tracked explicitly.  All kernels are exact
closed-form rational bidifferentials.
"""

from __future__ import annotations

from fractions import Fraction

from .exactnum import GaussRational, QI_ONE, QI_ZERO, RatFunc
from .geometry import Kernel, atom_eval, atom_sort_key, form_to_atoms
from .states import DomainError, SymState

__all__ = [
    "ExtState",
    "fermion_vacuum",
    "psi_e_apply",
    "psi_i_apply",
    "psi_apply",
    "fermion_npoint",
    "fermion_npoint_operator",
    "mode_psi",
    "BCState",
    "bc_vacuum",
    "bc_apply",
    "composite_b_apply",
    "composite_two_point",
    "KernelBoson",
]


def _g(z):
    return z if isinstance(z, (GaussRational, RatFunc)) else GaussRational.coerce(z)


def _wedge(atom, mono):
    """Sorted insertion into a strict exterior monomial: (sign, new) or None."""
    key = atom_sort_key(atom)
    pos = 0
    for existing in mono:
        k = atom_sort_key(existing)
        if k == key:
            return None
        if k < key:
            pos += 1
        else:
            break
    sign = -1 if pos % 2 else 1
    return sign, mono[:pos] + (atom,) + mono[pos:]


class ExtState:
    """Linear combination of exterior monomials (strictly sorted tuples)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mon, coeff in terms.items():
                if coeff:
                    clean[mon] = coeff
        self.terms = clean

    def __add__(self, other):
        out = dict(self.terms)
        for mon, coeff in other.terms.items():
            acc = out.get(mon)
            acc = coeff if acc is None else acc + coeff
            if acc:
                out[mon] = acc
            elif mon in out:
                del out[mon]
        return ExtState(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        if not s:
            return ExtState()
        return ExtState({m: c * s for m, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, ExtState):
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def vacuum_coefficient(self):
        return self.terms.get((), QI_ZERO)

    def degree(self):
        return max((len(m) for m in self.terms), default=0)

    def wedge_front(self, atom, coeff=QI_ONE):
        out = {}
        for mon, c in self.terms.items():
            hit = _wedge(atom, mon)
            if hit is None:
                continue
            sign, new = hit
            acc = out.get(new, QI_ZERO) + c * coeff * sign
            if acc:
                out[new] = acc
            elif new in out:
                del out[new]
        return ExtState(out)

    def contract(self, value_of_atom):
        """Signed contraction: sum_j (-1)^(j-1) value(atom_j) drop_j."""
        out = {}
        for mon, c in self.terms.items():
            for j, atom in enumerate(mon):
                val = value_of_atom(atom)
                if not val:
                    continue
                rest = mon[:j] + mon[j + 1:]
                sign = -1 if j % 2 else 1
                acc = out.get(rest, QI_ZERO) + c * val * sign
                if acc:
                    out[rest] = acc
                elif rest in out:
                    del out[rest]
        return ExtState(out)

    def __repr__(self):
        bits = [f"({c})*{list(m)}" for m, c in self.terms.items()]
        return "ExtState(" + (" + ".join(bits) or "0") + ")"


def fermion_vacuum() -> ExtState:
    return ExtState({(): QI_ONE})


# ---------------------------------------------------------------------------
# The neutral fermion
# ---------------------------------------------------------------------------


def psi_e_apply(z, state: ExtState) -> ExtState:
    """Wedge with the simple-pole half-form section at z."""
    return state.wedge_front(("pole", _g(z), 1))


def psi_i_apply(z, state: ExtState) -> ExtState:
    z = _g(z)
    for mon in state.terms:
        for atom in mon:
            if atom[0] == "pole" and not (z - atom[1]):
                raise DomainError("state has a section pole at the field point")
    return state.contract(lambda atom: atom_eval(atom, z))


def psi_apply(z, state: ExtState) -> ExtState:
    return psi_i_apply(z, state) + psi_e_apply(z, state)


def fermion_npoint(points) -> GaussRational:
    """Signed pair-partition sum of the odd kernel 1/(z_a - z_b)."""
    pts = [_g(p) for p in points]
    _distinct(pts)
    return _pfaffian_sum(pts)


def _pfaffian_sum(pts):
    n = len(pts)
    if n % 2:
        return QI_ZERO
    if n == 0:
        return QI_ONE
    total = QI_ZERO
    first = pts[0]
    for j in range(1, n):
        sign = -1 if (j - 1) % 2 else 1
        rest = pts[1:j] + pts[j + 1:]
        total = total + sign / (first - pts[j]) * _pfaffian_sum(rest)
    return total


def fermion_npoint_operator(points) -> GaussRational:
    pts = [_g(p) for p in points]
    _distinct(pts)
    state = fermion_vacuum()
    for z in reversed(pts):
        state = psi_apply(z, state)
    return state.vacuum_coefficient()


def _distinct(pts):
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if not (pts[i] - pts[j]):
                raise DomainError("points must be pairwise distinct")


def mode_psi(l, state: ExtState) -> ExtState:
    """Half-integer modes: negative wedge, positive contract."""
    l = Fraction(l)
    if l.denominator != 2:
        raise ValueError("modes are indexed by half-odd integers")
    if l < 0:
        order = int(-l + Fraction(1, 2))
        return state.wedge_front(("pole", QI_ZERO, order))

    def value(atom):
        if atom[0] == "pole" and atom[1] == QI_ZERO and atom[2] == int(l + Fraction(1, 2)):
            return QI_ONE
        return QI_ZERO

    return state.contract(value)


# ---------------------------------------------------------------------------
# The two-sector ghost system
# ---------------------------------------------------------------------------


class BCState:
    """Pairs of exterior monomials: the weight-one sector and its twist dual."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, coeff in terms.items():
                if coeff:
                    clean[key] = coeff
        self.terms = clean

    def __add__(self, other):
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            acc = out.get(key)
            acc = coeff if acc is None else acc + coeff
            if acc:
                out[key] = acc
            elif key in out:
                del out[key]
        return BCState(out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        if not s:
            return BCState()
        return BCState({k: c * s for k, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, BCState):
            return NotImplemented
        return self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def vacuum_coefficient(self):
        return self.terms.get(((), ()), QI_ZERO)

    def degree(self):
        return max((len(b) + len(c) for b, c in self.terms), default=0)

    def __repr__(self):
        bits = [f"({co})*{list(b)}|{list(c)}" for (b, c), co in self.terms.items()]
        return "BCState(" + (" + ".join(bits) or "0") + ")"


def bc_vacuum() -> BCState:
    return BCState({((), ()): QI_ONE})


def _bc_domain_check(state: BCState, z, sector: int):
    for key in state.terms:
        for atom in key[sector]:
            if atom[0] == "pole" and not (z - atom[1]):
                raise DomainError("state has a section pole at the field point")


def bc_apply(field: str, z, state: BCState) -> BCState:
    """Apply one of the sector fields; Koszul signs cross the first sector."""
    z = _g(z)
    out = {}
    if field == "b_e":
        for (b, c), coeff in state.terms.items():
            hit = _wedge(("pole", z, 1), b)
            if hit is None:
                continue
            sign, nb = hit
            _acc(out, (nb, c), coeff * sign)
    elif field == "c_e":
        # the twist-sector section reads the kernel in its second slot,
        # which is minus the pole atom: 1/(z - u)
        for (b, c), coeff in state.terms.items():
            hit = _wedge(("pole", z, 1), c)
            if hit is None:
                continue
            sign, nc = hit
            cross = -1 if len(b) % 2 else 1
            _acc(out, (b, nc), -coeff * sign * cross)
    elif field == "b_i":
        _bc_domain_check(state, z, 1)
        for (b, c), coeff in state.terms.items():
            cross = -1 if len(b) % 2 else 1
            for j, atom in enumerate(c):
                val = atom_eval(atom, z)
                if not val:
                    continue
                sign = -1 if j % 2 else 1
                _acc(out, (b, c[:j] + c[j + 1:]), coeff * val * sign * cross)
    elif field == "c_i":
        _bc_domain_check(state, z, 0)
        for (b, c), coeff in state.terms.items():
            for j, atom in enumerate(b):
                val = atom_eval(atom, z)
                if not val:
                    continue
                sign = -1 if j % 2 else 1
                _acc(out, (b[:j] + b[j + 1:], c), -coeff * val * sign)
    elif field == "b":
        return bc_apply("b_i", z, state) + bc_apply("b_e", z, state)
    elif field == "c":
        return bc_apply("c_i", z, state) + bc_apply("c_e", z, state)
    else:
        raise ValueError(f"unknown sector field {field!r}")
    return BCState(out)


def _acc(out, key, val):
    acc = out.get(key)
    acc = val if acc is None else acc + val
    if acc:
        out[key] = acc
    elif key in out:
        del out[key]


def composite_b_apply(z, state: BCState) -> BCState:
    """The normal-ordered bilinear of the two sector fields at one point."""
    z = _g(z)
    out = bc_apply("b_i", z, bc_apply("c_i", z, state))
    out = out + bc_apply("b_e", z, bc_apply("c_e", z, state))
    out = out + bc_apply("b_e", z, bc_apply("c_i", z, state))
    out = out - bc_apply("c_e", z, bc_apply("b_i", z, state))
    return out


def composite_two_point(z1, z2) -> GaussRational:
    """Vacuum two-point value of the composite field (double-pole kernel)."""
    state = composite_b_apply(_g(z1), composite_b_apply(_g(z2), bc_vacuum()))
    return state.vacuum_coefficient()


# ---------------------------------------------------------------------------
# Kernel-parametrized boson
# ---------------------------------------------------------------------------


class KernelBoson:
    """Boson fields built from a symmetric double-pole kernel.

    With the rational-line kernel this reproduces the standard boson
    operator for operator; other symmetric residue-one kernels plug in
    the same way.
    """

    def __init__(self, kernel: Kernel):
        if kernel.parity != 1 or kernel.diagonal_order != 2:
            raise DomainError("boson construction needs a symmetric double-pole kernel")
        self.kernel = kernel

    def creation_expansion(self, z) -> dict:
        sec = self.kernel.section_at(_g(z))
        return {atom: -coeff for atom, coeff in form_to_atoms(sec).items()}

    def e_apply(self, z, state: SymState) -> SymState:
        return state.multiply_expansion(self.creation_expansion(z))

    def i_apply(self, z, state: SymState) -> SymState:
        from .boson import i_apply as plain_i

        return plain_i(z, state)

    def b_apply(self, z, state: SymState) -> SymState:
        return self.i_apply(z, state) + self.e_apply(z, state)

    def two_point(self, z1, z2):
        state = self.b_apply(z1, self.b_apply(z2, SymState({(): QI_ONE})))
        return state.vacuum_coefficient()
