"""Small constructors that keep expected values in tests readable."""

from __future__ import annotations

from tropscatter.nilring import LaurentPoly, NilCoefficient


def z(a1: int, a2: int, coeff=1, *tset: int) -> LaurentPoly:
    """The monomial coeff * t_tset * z1^a1 z2^a2."""
    return LaurentPoly.monomial(a1, a2, coeff, tset)


def t(*indices: int, coeff=1) -> NilCoefficient:
    return NilCoefficient.t(*indices, coeff=coeff)


ONE = LaurentPoly.one()
W0_P2 = z(1, 0) + z(0, 1) + z(-1, -1)


def relabel(p: LaurentPoly, dropped: int) -> LaurentPoly:
    """Rename t_j -> t_(j+1) for j >= dropped: the labels of a scene with point ``dropped`` removed."""
    out = {}
    for (a1, a2, mask), c in p.items():
        low = mask & ((1 << (dropped - 1)) - 1)
        high = mask >> (dropped - 1)
        out[(a1, a2, low | (high << dropped))] = c
    return LaurentPoly(out)
