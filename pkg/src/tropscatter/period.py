"""Quantum periods as constant terms of W^m/m!, and the descendant numbers they encode.

The period of a potential ``W`` over R_k is the series

    1 + sum_{m >= 2} hbar^(-m) * [z^0] W^m / m!

truncated at an explicit ``mmax``.  The coefficient of ``t_I hbar^(-m)`` is the
descendant number with ``n = |I|`` point insertions, psi-power ``m - 2`` at the
root, summed over all degrees of total size ``|Delta| = m + n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

from .nilring import (
    CollapsedPoly,
    LaurentPoly,
    NilCoefficient,
    lp_collapse,
    lp_constant_term,
    mask_members,
    tset_mask,
)

__all__ = [
    "PeriodSeries",
    "DescendantEntry",
    "DescendantTable",
    "period",
    "default_mmax",
    "descendants",
    "chamber_invariance_check",
    "collapsed_period",
]


def _norm(x):
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


@dataclass(frozen=True)
class PeriodSeries:
    """Truncated period; ``coeff[m]`` for 2 <= m <= mmax, the unit term implicit."""

    mmax: int
    coeff: dict

    def __eq__(self, other):
        if not isinstance(other, PeriodSeries):
            return NotImplemented
        return self.mmax == other.mmax and self.coeff == other.coeff

    def __hash__(self):
        return hash((self.mmax, tuple(sorted(self.coeff.items()))))

    def terms(self):
        """Nonzero ``(m, mask, value)`` triples in canonical order."""
        out = []
        for m in sorted(self.coeff):
            for mask, c in sorted(self.coeff[m].items(), key=lambda kv: (bin(kv[0]).count("1"), kv[0])):
                out.append((m, mask, c))
        return out


def default_mmax(k: int) -> int:
    return 3 * (k + 2)


def period(w: LaurentPoly, mmax: int) -> PeriodSeries:
    if mmax < 2:
        raise ValueError("mmax must be at least 2")
    coeff = {}
    power = w
    for m in range(2, mmax + 1):
        power = power * w
        coeff[m] = lp_constant_term(power) / factorial(m)
    return PeriodSeries(mmax, coeff)


@dataclass(frozen=True)
class DescendantEntry:
    m: int
    tset: tuple[int, ...]
    value: int | Fraction

    @property
    def n(self) -> int:
        return len(self.tset)

    @property
    def psi_power(self) -> int:
        return self.m - 2

    @property
    def degree_size(self) -> int:
        """|Delta|: the number of unbounded ends of the curves counted."""
        return self.m + self.n


class DescendantTable:
    """entry(m, I) = coefficient of t_I in the hbar^(-m) term of the period."""

    def __init__(self, series: PeriodSeries, k: int | None = None):
        self.mmax = series.mmax
        top = 0
        for c in series.coeff.values():
            for mask in c.masks:
                top |= mask
        self.k = k if k is not None else top.bit_length()
        self._values = {}
        for m, c in series.coeff.items():
            for mask, v in c.items():
                self._values[(m, mask)] = v

    def entry(self, m: int, tset=()) -> int | Fraction:
        if not 2 <= m <= self.mmax:
            raise KeyError(f"m={m} outside the computed range 2..{self.mmax}")
        return self._values.get((m, tset_mask(tset)), 0)

    def entries(self, include_zero: bool = True) -> list[DescendantEntry]:
        """All (m, I) with I ranging over subsets of {1..k}, canonical order."""
        subsets = sorted(range(1 << self.k), key=lambda mk: (bin(mk).count("1"), mk))
        out = []
        for m in range(2, self.mmax + 1):
            for mask in subsets:
                v = self._values.get((m, mask), 0)
                if v or include_zero:
                    out.append(DescendantEntry(m, mask_members(mask), v))
        return out

    def by_size(self) -> dict:
        """Map (m, n) -> set of values entry(m, I) over all I with |I| = n."""
        out: dict = {}
        for e in self.entries():
            out.setdefault((e.m, e.n), set()).add(e.value)
        return out

    def __eq__(self, other):
        if not isinstance(other, DescendantTable):
            return NotImplemented
        return self.mmax == other.mmax and self.k == other.k and self._values == other._values


def descendants(s: PeriodSeries, k: int | None = None) -> DescendantTable:
    return DescendantTable(s, k)


def chamber_invariance_check(d, samples, mmax: int):
    """None if the period agrees at all samples, else the first difference.

    The difference is reported as ``(u, u2, m, tset)``.
    """
    from .potential import potential_at

    samples = list(samples)
    if not samples:
        return None
    ref_u = samples[0]
    ref = period(potential_at(d, ref_u).value, mmax)
    for u in samples[1:]:
        cur = period(potential_at(d, u).value, mmax)
        for m in range(2, mmax + 1):
            a, b = ref.coeff[m], cur.coeff[m]
            if a != b:
                diff = a - b
                mask = min(diff.masks, key=lambda mk: (bin(mk).count("1"), mk))
                return (ref_u, u, m, mask_members(mask))
    return None


@dataclass(frozen=True)
class CollapsedSeries:
    """Period after the base change t_I -> t^|I|.

    ``coeff[(m, n)]`` is the raw sum of entry(m, I) over all subsets with |I| = n,
    i.e. the coefficient of ``hbar^(-m) t^n``.  No ``n!`` is divided out; since
    entries depend only on |I|, the single-subset value is recovered by
    :meth:`per_subset`.
    """

    mmax: int
    k: int
    coeff: dict

    def per_subset(self) -> dict:
        """coeff[(m, n)] / C(k, n): the common value of entry(m, I) for |I| = n."""
        return {key: _norm(Fraction(v) / comb(self.k, key[1])) for key, v in self.coeff.items()}


def collapsed_period(s: PeriodSeries, k: int) -> CollapsedSeries:
    coeff = {}
    for m, c in s.coeff.items():
        cp: CollapsedPoly = lp_collapse(c if isinstance(c, NilCoefficient) else NilCoefficient(c), k)
        for (_, _, n), v in cp.terms.items():
            coeff[(m, n)] = v
    return CollapsedSeries(s.mmax, k, coeff)
