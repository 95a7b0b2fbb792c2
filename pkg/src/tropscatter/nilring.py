"""Exact arithmetic over R_k = Q[t_1..t_k]/(t_i^2) and Laurent polynomials in z1, z2.

Monomials t_I are indexed by squarefree subsets I of {1..k}, stored as bit masks
(bit ``i-1`` set for ``t_i``).  Rational coefficients are kept as ``int`` when
integral and ``fractions.Fraction`` otherwise; nothing here ever touches floats.

A :class:`LaurentPoly` is stored flat, keyed by ``(a1, a2, mask)``, which keeps the
inner multiplication loop to one dict lookup per term pair.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import MalformedRational, NotUnipotent

__all__ = [
    "NilCoefficient",
    "LaurentPoly",
    "CoordMap",
    "CollapsedPoly",
    "tset_mask",
    "mask_members",
    "coeff_mul",
    "lp_add",
    "lp_mul",
    "lp_unit_pow",
    "lp_substitute",
    "lp_constant_term",
    "lp_collapse",
    "coordmap_compose",
    "coordmap_is_identity",
    "format_rational",
    "parse_rational",
]


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def _to_number(x):
    if isinstance(x, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return _norm(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"unsupported coefficient type {type(x).__name__}")


_RATIONAL_RE = re.compile(r"^\s*(-?\d+)(?:/(\d+))?\s*$")


def parse_rational(text: str):
    """Parse ``"p"`` or ``"p/q"`` exactly.  Raises MalformedRational."""
    if not isinstance(text, str):
        raise MalformedRational(f"rational must be a string, got {text!r}")
    match = _RATIONAL_RE.match(text)
    if match is None:
        raise MalformedRational(f"not a rational: {text!r}")
    num = int(match.group(1))
    if match.group(2) is None:
        return num
    den = int(match.group(2))
    if den == 0:
        raise MalformedRational(f"zero denominator: {text!r}")
    return _norm(Fraction(num, den))


def format_rational(x) -> str:
    return str(Fraction(x))


def tset_mask(indices: Iterable[int]) -> int:
    """Bit mask of a set of 1-based t-indices."""
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"t-indices are 1-based, got {i}")
        mask |= 1 << (i - 1)
    return mask


def mask_members(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _tset_name(mask: int) -> str:
    return "*".join(f"t{i}" for i in mask_members(mask))


# ---------------------------------------------------------------------------
# NilCoefficient
# ---------------------------------------------------------------------------


class NilCoefficient:
    """Element of R_k (x) Q, a finite map TSubset mask -> rational."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        clean = {}
        if terms:
            for mask, c in terms.items():
                c = _to_number(c)
                if c:
                    clean[int(mask)] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "NilCoefficient":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def scalar(cls, c) -> "NilCoefficient":
        return cls({0: c})

    @classmethod
    def t(cls, *indices: int, coeff=1) -> "NilCoefficient":
        return cls({tset_mask(indices): coeff})

    def items(self):
        return self._terms.items()

    def get(self, mask: int):
        return self._terms.get(mask, 0)

    @property
    def masks(self):
        return self._terms.keys()

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def order(self) -> int | None:
        """Smallest |I| among the stored terms, None for zero."""
        if not self._terms:
            return None
        return min(bin(m).count("1") for m in self._terms)

    def is_nilpotent(self) -> bool:
        return 0 not in self._terms

    def drop_index(self, i: int) -> "NilCoefficient":
        bit = 1 << (i - 1)
        return NilCoefficient._raw({m: c for m, c in self._terms.items() if not m & bit})

    def __add__(self, other):
        if not isinstance(other, NilCoefficient):
            other = NilCoefficient.scalar(_to_number(other))
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = _norm(v)
            else:
                out.pop(m, None)
        return NilCoefficient._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return NilCoefficient._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, NilCoefficient):
            other = NilCoefficient.scalar(_to_number(other))
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, NilCoefficient):
            return coeff_mul(self, other)
        c = _to_number(other)
        if not c:
            return NilCoefficient._raw({})
        return NilCoefficient._raw({m: _norm(v * c) for m, v in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _to_number(other)
        return NilCoefficient._raw(
            {m: _norm(Fraction(v) / c) for m, v in self._terms.items()}
        )

    def __eq__(self, other):
        if isinstance(other, NilCoefficient):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({0: other} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms):
            c = self._terms[m]
            if m == 0:
                parts.append(str(c))
            elif c == 1:
                parts.append(_tset_name(m))
            else:
                parts.append(f"{c}*{_tset_name(m)}")
        return " + ".join(parts)


def coeff_mul(a: NilCoefficient, b: NilCoefficient) -> NilCoefficient:
    """Product in R_k: t_I * t_J = t_(I u J) if I and J are disjoint, else 0."""
    out: dict = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            if ma & mb:
                continue
            key = ma | mb
            out[key] = out.get(key, 0) + ca * cb
    return NilCoefficient._raw({m: _norm(c) for m, c in out.items() if c})


# ---------------------------------------------------------------------------
# LaurentPoly
# ---------------------------------------------------------------------------


class LaurentPoly:
    """Finite Laurent polynomial in z1, z2 with coefficients in R_k (x) Q."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        """``terms`` maps ``(a1, a2, mask)`` to a rational."""
        clean = {}
        if terms:
            for key, c in terms.items():
                a1, a2, mask = key
                c = _to_number(c)
                if c:
                    clean[(int(a1), int(a2), int(mask))] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "LaurentPoly":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls._raw({})

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls._raw({(0, 0, 0): 1})

    @classmethod
    def monomial(cls, a1: int, a2: int, coeff=1, tset: Iterable[int] = ()) -> "LaurentPoly":
        return cls({(a1, a2, tset_mask(tset)): coeff})

    @classmethod
    def from_coefficients(cls, coeffs: Mapping[tuple, NilCoefficient]) -> "LaurentPoly":
        """Build from a map ``(a1, a2) -> NilCoefficient``."""
        out = {}
        for (a1, a2), nc in coeffs.items():
            for m, c in nc.items():
                out[(a1, a2, m)] = c
        return cls._raw(out)

    # -- inspection -------------------------------------------------------

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def exponents(self) -> set[tuple[int, int]]:
        return {(a1, a2) for a1, a2, _ in self._terms}

    def coefficient(self, a: tuple[int, int]) -> NilCoefficient:
        a1, a2 = a
        return NilCoefficient._raw(
            {m: c for (b1, b2, m), c in self._terms.items() if b1 == a1 and b2 == a2}
        )

    def by_exponent(self) -> dict[tuple[int, int], NilCoefficient]:
        grouped: dict = {}
        for (a1, a2, m), c in self._terms.items():
            grouped.setdefault((a1, a2), {})[m] = c
        return {a: NilCoefficient._raw(d) for a, d in grouped.items()}

    def t_free_part(self) -> "LaurentPoly":
        return LaurentPoly._raw({k: c for k, c in self._terms.items() if k[2] == 0})

    def max_order(self) -> int:
        return max((bin(k[2]).count("1") for k in self._terms), default=0)

    def is_unipotent(self) -> bool:
        """True when self = 1 + n with every term of n carrying a nonempty TSubset."""
        if self._terms.get((0, 0, 0)) != 1:
            return False
        return all(m != 0 for (a1, a2, m) in self._terms if (a1, a2, m) != (0, 0, 0))

    def drop_index(self, i: int) -> "LaurentPoly":
        """Specialize t_i = 0."""
        bit = 1 << (i - 1)
        return LaurentPoly._raw({k: c for k, c in self._terms.items() if not k[2] & bit})

    def shift(self, a1: int, a2: int) -> "LaurentPoly":
        """Multiply by z^(a1, a2)."""
        return LaurentPoly._raw(
            {(b1 + a1, b2 + a2, m): c for (b1, b2, m), c in self._terms.items()}
        )

    def sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = _as_poly(other)
        return lp_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, LaurentPoly):
            other = _as_poly(other)
        return lp_add(self, -other)

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            return lp_mul(self, other)
        if isinstance(other, NilCoefficient):
            return lp_mul(self, _as_poly(other))
        c = _to_number(other)
        if not c:
            return LaurentPoly.zero()
        return LaurentPoly._raw({k: _norm(v * c) for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _to_number(other)
        return LaurentPoly._raw({k: _norm(Fraction(v) / c) for k, v in self._terms.items()})

    def __pow__(self, e: int):
        if e < 0:
            return lp_unit_pow(self, e)
        result = LaurentPoly.one()
        base = self
        while e:
            if e & 1:
                result = lp_mul(result, base)
            e >>= 1
            if e:
                base = lp_mul(base, base)
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({(0, 0, 0): other} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for (a1, a2, m), c in self.sorted_items():
            factors = []
            if m:
                factors.append(_tset_name(m))
            for name, e in (("z1", a1), ("z2", a2)):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- serialization -----------------------------------------------------

    def to_records(self) -> list[dict]:
        """Canonical list of ``{zexp, tset, coeff}`` records."""
        return [
            {"zexp": [a1, a2], "tset": list(mask_members(m)), "coeff": format_rational(c)}
            for (a1, a2, m), c in self.sorted_items()
        ]

    @classmethod
    def from_records(cls, records) -> "LaurentPoly":
        if not isinstance(records, list):
            raise TypeError("LaurentPoly records must be a list")
        out: dict = {}
        for rec in records:
            if not isinstance(rec, dict) or set(rec) != {"zexp", "tset", "coeff"}:
                raise ValueError(f"bad LaurentPoly record {rec!r}")
            zexp, tset = rec["zexp"], rec["tset"]
            if (
                not isinstance(zexp, list)
                or len(zexp) != 2
                or not all(type(v) is int for v in zexp)
                or not isinstance(tset, list)
                or not all(type(v) is int for v in tset)
                or len(set(tset)) != len(tset)
            ):
                raise ValueError(f"bad LaurentPoly record {rec!r}")
            key = (zexp[0], zexp[1], tset_mask(tset))
            if key in out:
                raise ValueError(f"duplicate LaurentPoly term {rec!r}")
            out[key] = parse_rational(rec["coeff"])
        return cls(out)


def _as_poly(x) -> LaurentPoly:
    if isinstance(x, LaurentPoly):
        return x
    if isinstance(x, NilCoefficient):
        return LaurentPoly._raw({(0, 0, m): c for m, c in x.items()})
    c = _to_number(x)
    return LaurentPoly._raw({(0, 0, 0): c} if c else {})


def lp_add(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    out = dict(p._terms)
    for k, c in q._terms.items():
        v = out.get(k, 0) + c
        if v:
            out[k] = _norm(v)
        else:
            out.pop(k, None)
    return LaurentPoly._raw(out)


def lp_mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    if len(p._terms) < len(q._terms):
        p, q = q, p
    out: dict = {}
    get = out.get
    qitems = list(q._terms.items())
    for (a1, a2, ma), ca in p._terms.items():
        for (b1, b2, mb), cb in qitems:
            if ma & mb:
                continue
            key = (a1 + b1, a2 + b2, ma | mb)
            out[key] = get(key, 0) + ca * cb
    return LaurentPoly._raw({k: _norm(c) for k, c in out.items() if c})


def _binomial(e: int, j: int):
    """Generalised binomial coefficient C(e, j) for any integer e, j >= 0."""
    num = 1
    for r in range(j):
        num *= e - r
    den = 1
    for r in range(2, j + 1):
        den *= r
    return num // den


def lp_unit_pow(f: LaurentPoly, e: int) -> LaurentPoly:
    """f**e for f = 1 + n with n nilpotent; any integer e.

    Uses (1 + n)^e = sum_j C(e, j) n^j, which terminates because n^(k+1) = 0.
    """
    if not f.is_unipotent():
        raise NotUnipotent(f"{f!r} is not of the form 1 + nilpotent")
    if e == 0:
        return LaurentPoly.one()
    n = lp_add(f, LaurentPoly._raw({(0, 0, 0): -1}))
    result = LaurentPoly.one()
    power = LaurentPoly.one()
    j = 0
    while True:
        j += 1
        power = lp_mul(power, n)
        if not power:
            break
        b = _binomial(e, j)
        if e > 0 and b == 0:
            break
        result = lp_add(result, power * b)
    return result


def lp_constant_term(p: LaurentPoly) -> NilCoefficient:
    return NilCoefficient._raw({m: c for (a1, a2, m), c in p._terms.items() if a1 == 0 and a2 == 0})


# ---------------------------------------------------------------------------
# Coordinate maps
# ---------------------------------------------------------------------------


class CoordMap:
    """Substitution z1 -> image_z1, z2 -> image_z2 with image_zi = zi * (1 + nilpotent)."""

    __slots__ = ("image_z1", "image_z2", "_units", "_pow_cache")

    def __init__(self, image_z1: LaurentPoly, image_z2: LaurentPoly):
        u1 = image_z1.shift(-1, 0)
        u2 = image_z2.shift(0, -1)
        if not (u1.is_unipotent() and u2.is_unipotent()):
            raise NotUnipotent("coordinate images must be z_i * (1 + nilpotent)")
        self.image_z1 = image_z1
        self.image_z2 = image_z2
        self._units = (u1, u2)
        self._pow_cache = ({}, {})

    @classmethod
    def identity(cls) -> "CoordMap":
        return cls(LaurentPoly.monomial(1, 0), LaurentPoly.monomial(0, 1))

    @classmethod
    def from_units(cls, u1: LaurentPoly, u2: LaurentPoly) -> "CoordMap":
        """Map z_i -> z_i * u_i."""
        return cls(u1.shift(1, 0), u2.shift(0, 1))

    @property
    def units(self) -> tuple[LaurentPoly, LaurentPoly]:
        return self._units

    def _unit_pow(self, i: int, e: int) -> LaurentPoly:
        cache = self._pow_cache[i]
        val = cache.get(e)
        if val is None:
            val = lp_unit_pow(self._units[i], e)
            cache[e] = val
        return val

    def monomial_factor(self, a1: int, a2: int) -> LaurentPoly:
        """The unit u with z^a -> z^a * u under this map."""
        return lp_mul(self._unit_pow(0, a1), self._unit_pow(1, a2))

    def is_identity(self) -> bool:
        return self._units[0] == 1 and self._units[1] == 1

    def inverse(self) -> "CoordMap":
        """Two-sided inverse, found by fixed-point iteration (terminates by nilpotency)."""
        inv = CoordMap.identity()
        for _ in range(64):
            # inv must satisfy self then inv == id, i.e. inv_i = z_i / (self_i/z_i)(inv)
            u1 = lp_substitute(self._units[0], inv)
            u2 = lp_substitute(self._units[1], inv)
            nxt = CoordMap.from_units(lp_unit_pow(u1, -1), lp_unit_pow(u2, -1))
            if nxt == inv:
                return inv
            inv = nxt
        raise RuntimeError("inverse iteration did not converge")

    def __eq__(self, other):
        if not isinstance(other, CoordMap):
            return NotImplemented
        return self.image_z1 == other.image_z1 and self.image_z2 == other.image_z2

    def __hash__(self):
        return hash((self.image_z1, self.image_z2))

    def __repr__(self):
        return f"CoordMap(z1 -> {self.image_z1!r}, z2 -> {self.image_z2!r})"


def lp_substitute(p: LaurentPoly, s: CoordMap) -> LaurentPoly:
    """p(s(z)): every z^a becomes image_z1^a1 * image_z2^a2."""
    out: dict = {}
    get = out.get
    for (a1, a2, m), c in p._terms.items():
        factor = s.monomial_factor(a1, a2)
        for (b1, b2, mb), cb in factor._terms.items():
            if m & mb:
                continue
            key = (a1 + b1, a2 + b2, m | mb)
            out[key] = get(key, 0) + c * cb
    return LaurentPoly._raw({k: _norm(v) for k, v in out.items() if v})


def coordmap_compose(s: CoordMap, r: CoordMap) -> CoordMap:
    """Apply ``s`` first, then ``r``.

    The result satisfies ``lp_substitute(p, compose(s, r)) ==
    lp_substitute(lp_substitute(p, s), r)``, which is the order in which
    wall-crossing pullbacks accumulate along a path.
    """
    return CoordMap(lp_substitute(s.image_z1, r), lp_substitute(s.image_z2, r))


def coordmap_is_identity(s: CoordMap) -> bool:
    return s.is_identity()


# ---------------------------------------------------------------------------
# Collapse t_I -> t^|I|
# ---------------------------------------------------------------------------


class CollapsedPoly:
    """Laurent polynomial over Q[t]/(t^(k+1)), keyed by ``(a1, a2, n)``."""

    __slots__ = ("terms", "k")

    def __init__(self, terms: Mapping[tuple, object], k: int):
        self.k = k
        self.terms = {
            key: _norm(c) for key, c in terms.items() if c and key[2] <= k
        }

    def __add__(self, other: "CollapsedPoly") -> "CollapsedPoly":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return CollapsedPoly(out, max(self.k, other.k))

    def __mul__(self, other: "CollapsedPoly") -> "CollapsedPoly":
        k = max(self.k, other.k)
        out: dict = {}
        for (a1, a2, n), c in self.terms.items():
            for (b1, b2, m), d in other.terms.items():
                if n + m > k:
                    continue
                key = (a1 + b1, a2 + b2, n + m)
                out[key] = out.get(key, 0) + c * d
        return CollapsedPoly(out, k)

    def __eq__(self, other):
        if not isinstance(other, CollapsedPoly):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self):
        return f"CollapsedPoly({dict(sorted(self.terms.items()))}, k={self.k})"


def lp_collapse(p: LaurentPoly | NilCoefficient, k: int) -> CollapsedPoly:
    """Base change t_I -> t^|I| into Q[t]/(t^(k+1)).

    Additive, and multiplicative on factors whose t-supports use disjoint
    index sets; it is not a ring map on all of R_k (t_1 * t_1 = 0 but t * t != 0).
    """
    if isinstance(p, NilCoefficient):
        p = _as_poly(p)
    out: dict = {}
    for (a1, a2, m), c in p._terms.items():
        key = (a1, a2, bin(m).count("1"))
        out[key] = out.get(key, 0) + c
    return CollapsedPoly(out, k)
