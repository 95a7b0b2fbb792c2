"""Exact planar predicates over Q: determinants, angular order, ray intersections."""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key
from math import gcd
from typing import NamedTuple


class RationalPoint(NamedTuple):
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x, y) -> "RationalPoint":
        return cls(Fraction(x), Fraction(y))

    def __repr__(self):
        return f"({self.x}, {self.y})"


def det(a, b) -> int | Fraction:
    """det((a1, a2), (b1, b2)) = a1*b2 - a2*b1."""
    return a[0] * b[1] - a[1] * b[0]


def sign(x) -> int:
    return (x > 0) - (x < 0)


def primitive(v: tuple[int, int]) -> tuple[int, int]:
    g = gcd(v[0], v[1])
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return (v[0] // g, v[1] // g)


def _half(d) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2pi)
    return 0 if (d[1] > 0 or (d[1] == 0 and d[0] > 0)) else 1


def angle_cmp(a, b) -> int:
    """Compare directions by polar angle in [0, 2pi)."""
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha - hb
    return -sign(det(a, b))


angle_key = cmp_to_key(angle_cmp)


def rot_ccw(d):
    return (-d[1], d[0])


def rot_cw(d):
    return (d[1], -d[0])


def point_on_ray(base, direction, pt):
    """Parameter s >= 0 with pt = base + s*direction, or None."""
    dx, dy = pt[0] - base[0], pt[1] - base[1]
    if det(direction, (dx, dy)) != 0:
        return None
    if direction[0] != 0:
        s = Fraction(dx) / direction[0]
    else:
        s = Fraction(dy) / direction[1]
    return s if s >= 0 else None


def line_intersection(b1, m1, b2, m2):
    """Parameters (s, r) with b1 + s*m1 = b2 + r*m2, or None if parallel."""
    d = det(m1, m2)
    if d == 0:
        return None
    wx, wy = b2[0] - b1[0], b2[1] - b1[1]
    s = Fraction(det((wx, wy), m2)) / d
    r = Fraction(det((wx, wy), m1)) / d
    return s, r


def collinear_overlap(b1, m1, b2, m2) -> bool:
    """True if two parallel rays share a segment of positive length."""
    if det(m1, m2) != 0:
        return False
    if det(m1, (b2[0] - b1[0], b2[1] - b1[1])) != 0:
        return False
    if m1[0] * m2[0] + m1[1] * m2[1] > 0:
        return True
    # opposite directions: overlap iff each base lies on the other ray beyond its base
    s = point_on_ray(b1, m1, b2)
    return s is not None and s > 0


def segment_ray_overlap(a, b, base, direction) -> bool:
    """True if the segment [a, b] and a parallel ray share a piece of positive length."""
    tau = (b[0] - a[0], b[1] - a[1])
    if det(tau, direction) != 0 or det(direction, (a[0] - base[0], a[1] - base[1])) != 0:
        return False

    def param(p):
        dx, dy = p[0] - base[0], p[1] - base[1]
        return Fraction(dx) / direction[0] if direction[0] else Fraction(dy) / direction[1]

    return max(param(a), param(b)) > 0


def point_at(base, direction, s) -> RationalPoint:
    return RationalPoint(base[0] + s * direction[0], base[1] + s * direction[1])
