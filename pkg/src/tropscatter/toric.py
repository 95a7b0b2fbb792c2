"""Fans of the smooth toric Fano surfaces, marked-point scenes, Hori-Vafa potentials.

Rays are given in tropical orientation: they are the directions of the unbounded
edges of tropical curves, and the ray ``v`` contributes the monomial ``z^(-v)`` to
the Hori-Vafa potential.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import (
    DegenerateScene,
    GenericityExhausted,
    NotComplete,
    NotFano,
    NotPrimitive,
    NotSmooth,
    UnknownFan,
)
from .geometry import RationalPoint, angle_key, det
from .nilring import LaurentPoly

_BUILTIN_RAYS = {
    "P2": ((-1, 0), (0, -1), (1, 1)),
    "P1xP1": ((1, 0), (0, 1), (-1, 0), (0, -1)),
    "dP1": ((1, 1), (-1, 0), (-1, -1), (0, -1)),
    "dP2": ((1, 0), (1, 1), (-1, 0), (-1, -1), (0, -1)),
    "dP3": ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)),
}

BUILTIN_FANS = tuple(_BUILTIN_RAYS)


@dataclass(frozen=True)
class Fan:
    rays: tuple[tuple[int, int], ...]
    name: str | None = None

    @classmethod
    def from_rays(cls, rays, name=None) -> "Fan":
        """Fan with the rays put into counterclockwise order."""
        rays = [tuple(int(c) for c in r) for r in rays]
        return cls(tuple(sorted(rays, key=angle_key)), name)

    def __len__(self):
        return len(self.rays)


def fan_builtin(name: str) -> Fan:
    try:
        return Fan(_BUILTIN_RAYS[name], name)
    except KeyError:
        raise UnknownFan(f"unknown fan {name!r}; known: {', '.join(BUILTIN_FANS)}") from None


def fan_validate(fan: Fan) -> None:
    """Raise if ``fan`` is not a complete smooth Fano fan in ccw order."""
    rays = fan.rays
    for v in rays:
        if v == (0, 0) or gcd(v[0], v[1]) != 1:
            raise NotPrimitive(f"ray {v} is not primitive", ray=v)
    n = len(rays)
    if n < 3:
        raise NotComplete(f"{n} rays cannot span a complete fan", ray=rays[0] if rays else None)
    # consecutive rays strictly ccw and the total turning is exactly once around
    for i in range(n):
        if det(rays[i], rays[(i + 1) % n]) <= 0:
            raise NotComplete(
                f"rays {rays[i]} -> {rays[(i + 1) % n]} are not strictly counterclockwise "
                "with an angle below pi",
                ray=rays[i],
            )
    start = rays.index(min(rays, key=angle_key))
    rotated = rays[start:] + rays[:start]
    if list(rotated) != sorted(rays, key=angle_key):
        raise NotComplete("rays wind around the origin more than once", ray=rays[0])
    for i in range(n):
        if det(rays[i], rays[(i + 1) % n]) != 1:
            raise NotSmooth(
                f"cone ({rays[i]}, {rays[(i + 1) % n]}) has determinant "
                f"{det(rays[i], rays[(i + 1) % n])}",
                ray=rays[i],
            )
    for i in range(n):
        prev, cur, nxt = rays[i - 1], rays[i], rays[(i + 1) % n]
        s = (prev[0] + nxt[0], prev[1] + nxt[1])
        # s = -a * cur; the coefficient exists because the fan is smooth
        a = -(s[0] // cur[0]) if cur[0] else -(s[1] // cur[1])
        if a < -1:
            raise NotFano(f"ray {cur} has self-intersection {a} < -1", ray=cur)


def hori_vafa(fan: Fan) -> LaurentPoly:
    fan_validate(fan)
    return LaurentPoly({(-v[0], -v[1], 0): 1 for v in fan.rays})


@dataclass(frozen=True)
class Scene:
    fan: Fan
    points: tuple[RationalPoint, ...] = field(default=())

    def __post_init__(self):
        pts = tuple(RationalPoint.of(p[0], p[1]) for p in self.points)
        object.__setattr__(self, "points", pts)
        if len(set(pts)) != len(pts):
            dup = next(p for p in pts if pts.count(p) > 1)
            raise DegenerateScene(
                f"marked points coincide at {dup}",
                {"kind": "coincident_points", "point": [str(dup.x), str(dup.y)]},
            )

    @property
    def k(self) -> int:
        return len(self.points)

    @classmethod
    def make(cls, fan, points=()) -> "Scene":
        if isinstance(fan, str):
            fan = fan_builtin(fan)
        return cls(fan, tuple(points))


def scene_random(
    fan: Fan | str,
    k: int,
    seed: int,
    box=((-10, 10), (-10, 10)),
    max_tries: int = 50,
) -> Scene:
    """Reproducible random generic scene with rational points inside ``box``."""
    from .scatter import validate_generic

    if isinstance(fan, str):
        fan = fan_builtin(fan)
    if k < 0:
        raise ValueError("k must be non-negative")
    (x0, x1), (y0, y1) = box
    x0, x1, y0, y1 = (Fraction(v) for v in (x0, x1, y0, y1))
    if k == 0:
        return Scene(fan, ())
    if x1 <= x0 or y1 <= y0:
        raise GenericityExhausted(f"bounding box {box} has no interior")
    rng = random.Random(seed)
    for _ in range(max_tries):
        pts = []
        for _ in range(k):
            den = rng.choice((997, 1009, 1013, 1019, 1021, 1031))
            x = x0 + (x1 - x0) * Fraction(rng.randrange(1, den), den)
            y = y0 + (y1 - y0) * Fraction(rng.randrange(1, den), den)
            pts.append(RationalPoint(x, y))
        try:
            scene = Scene(fan, tuple(pts))
            validate_generic(scene)
        except DegenerateScene:
            continue
        return scene
    raise GenericityExhausted(f"no generic scene found after {max_tries} draws")
