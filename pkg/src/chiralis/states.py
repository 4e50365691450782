"""Symmetric-monomial state vectors over canonical basis atoms.

A state is a finite linear combination of multisets of basis atoms; the
multiset is stored as a tuple sorted by the atom order, so equality of
states is plain dictionary equality.  Coefficients are GaussRational in
ordinary use and rational functions of a generic point when a computation
is carried out symbolically.
"""

from __future__ import annotations

from .exactnum import QI_ONE, QI_ZERO
from .geometry import atom_sort_key

__all__ = ["DomainError", "SymState", "vacuum", "monomial_state"]


class DomainError(ValueError):
    """A field was applied outside its domain (pole collision etc.)."""


def _sorted_monomial(atoms) -> tuple:
    return tuple(sorted(atoms, key=atom_sort_key))


class SymState:
    """Linear combination of symmetric monomials in basis atoms."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for mon, coeff in terms.items():
                if coeff:
                    clean[mon] = coeff
        self.terms = clean

    # -- linear structure ---------------------------------------------------

    def __add__(self, other: "SymState") -> "SymState":
        out = dict(self.terms)
        for mon, coeff in other.terms.items():
            acc = out.get(mon)
            acc = coeff if acc is None else acc + coeff
            if acc:
                out[mon] = acc
            elif mon in out:
                del out[mon]
        return SymState(out)

    def __sub__(self, other: "SymState") -> "SymState":
        return self + other.scale(-1)

    def __neg__(self) -> "SymState":
        return self.scale(-1)

    def scale(self, s) -> "SymState":
        if not s:
            return SymState()
        return SymState({mon: coeff * s for mon, coeff in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, SymState):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "SymState(0)"
        bits = []
        for mon in sorted(self.terms, key=lambda m: (len(m), tuple(map(atom_sort_key, m)))):
            bits.append(f"({self.terms[mon]})*{list(mon)}")
        return "SymState(" + " + ".join(bits) + ")"

    # -- structure helpers ----------------------------------------------------

    def degree(self) -> int:
        """Largest monomial length present."""
        return max((len(m) for m in self.terms), default=0)

    def vacuum_coefficient(self):
        return self.terms.get((), QI_ZERO)

    def atoms(self) -> set:
        out = set()
        for mon in self.terms:
            out.update(mon)
        return out

    def multiply_atom(self, atom, coeff=QI_ONE) -> "SymState":
        """Symmetric product with a single atom, scaled."""
        out = {}
        for mon, c in self.terms.items():
            new = _sorted_monomial(mon + (atom,))
            acc = out.get(new)
            val = c * coeff
            acc = val if acc is None else acc + val
            if acc:
                out[new] = acc
            elif new in out:
                del out[new]
        return SymState(out)

    def multiply_expansion(self, expansion: dict) -> "SymState":
        """Symmetric product with sum(expansion[atom] * atom)."""
        out = SymState()
        for atom, coeff in expansion.items():
            out = out + self.multiply_atom(atom, coeff)
        return out

    def contract(self, value_of_atom) -> "SymState":
        """Apply the derivation sending each atom to the scalar value_of_atom(atom).

        This is the common shape of every 'evaluation' field: the result is
        the sum over atom occurrences of value * (monomial without it).
        """
        out = {}
        for mon, c in self.terms.items():
            k = 0
            while k < len(mon):
                atom = mon[k]
                mult = 1
                while k + mult < len(mon) and mon[k + mult] == atom:
                    mult += 1
                val = value_of_atom(atom)
                if val:
                    rest = mon[:k] + mon[k + 1:]  # drop one occurrence
                    add = c * val * mult
                    acc = out.get(rest)
                    acc = add if acc is None else acc + add
                    if acc:
                        out[rest] = acc
                    elif rest in out:
                        del out[rest]
                k += mult
        return SymState(out)

    def map_monomials(self, fn) -> "SymState":
        """Relabel monomials; fn(mon) -> (new_mon_atoms, scalar factor)."""
        out = SymState()
        for mon, c in self.terms.items():
            new_atoms, factor = fn(mon)
            out = out + SymState({_sorted_monomial(new_atoms): c * factor})
        return out

    def map_atoms_linear(self, fn) -> "SymState":
        """Apply an atom-wise linear substitution atom -> {atom: coeff} factorwise."""
        out = SymState()
        for mon, c in self.terms.items():
            pieces = [fn(a) for a in mon]
            expanded = [((), c)]
            for piece in pieces:
                nxt = []
                for atoms, coeff in expanded:
                    for atom, w in piece.items():
                        nxt.append((atoms + (atom,), coeff * w))
                expanded = nxt
            for atoms, coeff in expanded:
                out = out + SymState({_sorted_monomial(atoms): coeff})
        return out

    def derive_atoms(self, fn) -> "SymState":
        """Extend an atom-wise linear map atom -> {atom: coeff} as a derivation."""
        out = SymState()
        for mon, c in self.terms.items():
            k = 0
            while k < len(mon):
                atom = mon[k]
                mult = 1
                while k + mult < len(mon) and mon[k + mult] == atom:
                    mult += 1
                rest = mon[:k] + mon[k + 1:]
                for new_atom, w in fn(atom).items():
                    out = out + SymState(
                        {_sorted_monomial(rest + (new_atom,)): c * w * mult}
                    )
                k += mult
        return out

    def map_coefficients(self, fn) -> "SymState":
        return SymState({mon: fn(c) for mon, c in self.terms.items()})

    def truncate_degree(self, max_degree: int) -> "SymState":
        return SymState({m: c for m, c in self.terms.items() if len(m) <= max_degree})


def vacuum() -> SymState:
    return SymState({(): QI_ONE})


def monomial_state(atoms, coeff=QI_ONE) -> SymState:
    return SymState({_sorted_monomial(atoms): coeff})
