"""Tropical wall structures: wall crossings, loop products, scattering completion.

Conventions used throughout the package:

* a wall is the ray ``base + s*dir`` (s >= 0) carrying ``fun = 1 + sum c z^(l*dir)``;
* crossing it with velocity ``tau`` pulls back monomials by
  ``z^a -> z^a * fun^(det(a, dir) * sgn det(tau, dir))``;
* substitutions along a path accumulate in path order, so the potential on the
  far side is the near-side potential with the crossing map substituted in.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

from .errors import (
    DegenerateScene,
    NondecomposableDiscrepancy,
    PointOnWall,
    TangentialCrossing,
    TraceThroughVertex,
)
from .geometry import (
    RationalPoint,
    angle_key,
    det,
    line_intersection,
    point_at,
    point_on_ray,
    primitive,
    rot_ccw,
    rot_cw,
    sign,
)
from .nilring import (
    CoordMap,
    LaurentPoly,
    NilCoefficient,
    coordmap_compose,
    lp_unit_pow,
    mask_members,
    tset_mask,
)
from .toric import Scene

__all__ = [
    "Provenance",
    "Wall",
    "Diagram",
    "crossing_map",
    "wall_crossing_map",
    "loop_automorphism",
    "complete_at",
    "build_diagram",
    "validate_generic",
    "check_consistency",
]


@dataclass(frozen=True, order=True)
class Provenance:
    kind: str  # "point" or "scattered"
    index: int | None = None
    at: RationalPoint | None = None

    @classmethod
    def from_point(cls, i: int) -> "Provenance":
        return cls("point", index=i)

    @classmethod
    def scattered(cls, q) -> "Provenance":
        return cls("scattered", at=RationalPoint.of(q[0], q[1]))

    def __repr__(self):
        if self.kind == "point":
            return f"FromPoint({self.index})"
        return f"Scattered({self.at!r})"


@dataclass(frozen=True)
class Wall:
    base: RationalPoint
    dir: tuple[int, int]
    fun: LaurentPoly
    provenance: Provenance

    def __post_init__(self):
        if not self.fun.is_unipotent():
            raise ValueError(f"wall function {self.fun!r} is not 1 + nilpotent")
        d = self.dir
        for a1, a2 in self.fun.exponents() - {(0, 0)}:
            if det((a1, a2), d) != 0 or a1 * d[0] + a2 * d[1] <= 0:
                raise ValueError(f"term z^({a1},{a2}) is not a positive multiple of {d}")

    @property
    def sort_key(self):
        return (self.base.x, self.base.y, angle_key(self.dir))

    @property
    def order(self) -> int:
        """Lowest t-order among the nontrivial terms."""
        return min(bin(m).count("1") for (_, _, m), _ in self.fun.items() if m)

    def contains(self, pt) -> Fraction | None:
        return point_on_ray(self.base, self.dir, pt)

    def drop_index(self, i: int) -> "Wall | None":
        f = self.fun.drop_index(i)
        if f == 1:
            return None
        return Wall(self.base, self.dir, f, self.provenance)

    def __repr__(self):
        return f"Wall(base={self.base!r}, dir={self.dir}, fun={self.fun!r}, {self.provenance!r})"


# ---------------------------------------------------------------------------
# Crossing maps
# ---------------------------------------------------------------------------


@lru_cache(maxsize=65536)
def _crossing(fun: LaurentPoly, d: tuple[int, int], sigma: int) -> CoordMap:
    # det(e1, d) = d_y, det(e2, d) = -d_x
    return CoordMap.from_units(lp_unit_pow(fun, d[1] * sigma), lp_unit_pow(fun, -d[0] * sigma))


def wall_crossing_map(w: Wall, tau) -> CoordMap:
    """Pullback substitution for crossing ``w`` with velocity ``tau``."""
    sigma = sign(det(tau, w.dir))
    if sigma == 0:
        raise TangentialCrossing(f"velocity {tuple(tau)} is parallel to wall direction {w.dir}")
    return _crossing(w.fun, w.dir, sigma)


def crossing_map(w: Wall, a, tau) -> tuple[int, CoordMap]:
    """Exponent e with z^a -> z^a * fun^e, and the full crossing map."""
    s = wall_crossing_map(w, tau)
    return det(a, w.dir) * sign(det(tau, w.dir)), s


# ---------------------------------------------------------------------------
# Local loops
# ---------------------------------------------------------------------------


def _germs(walls, q):
    germs = []
    for w in walls:
        if w.base == q:
            germs.append((w.dir, w))
            continue
        s = w.contains(q)
        if s is not None:
            germs.append((w.dir, w))
            germs.append(((-w.dir[0], -w.dir[1]), w))
    return germs


def loop_automorphism(walls, q, orientation: str = "ccw") -> CoordMap:
    """Composite crossing map of a small loop around ``q``.

    Germs (rays into or out of ``q``) are visited in angular order, starting
    from the germ of smallest angle in [0, 2pi) and turning in ``orientation``.
    """
    if orientation not in ("ccw", "cw"):
        raise ValueError("orientation must be 'ccw' or 'cw'")
    q = RationalPoint.of(q[0], q[1])
    germs = sorted(_germs(walls, q), key=lambda g: angle_key(g[0]))
    if orientation == "cw" and germs:
        germs = germs[:1] + germs[1:][::-1]
    rot = rot_ccw if orientation == "ccw" else rot_cw
    total = CoordMap.identity()
    for d, w in germs:
        total = coordmap_compose(total, wall_crossing_map(w, rot(d)))
    return total


def _discrepancy(F: CoordMap):
    u1, u2 = F.units
    d1 = u1 - 1
    d2 = u2 - 1
    return d1, d2


def complete_at(walls, q, max_rounds: int = 64) -> list[Wall]:
    """New walls based at ``q`` that make the loop around ``q`` trivial.

    The lowest-order part of the loop discrepancy is a Hamiltonian shift
    z^a -> z^a (1 + sum_mu c_mu det(mu, a) z^mu); each exponent mu is cancelled
    by a ray from q in direction mu.  Repeats with rising t-order until the loop
    closes; rays sharing a direction are merged by multiplying their functions.
    """
    q = RationalPoint.of(q[0], q[1])
    prov = Provenance.scattered(q)
    new: dict[tuple[int, int], LaurentPoly] = {}
    last_order = 0
    for _ in range(max_rounds):
        current = list(walls) + [Wall(q, d, f, prov) for d, f in new.items()]
        F = loop_automorphism(current, q, "ccw")
        if F.is_identity():
            return sorted((Wall(q, d, f, prov) for d, f in new.items()), key=lambda w: w.sort_key)
        d1, d2 = _discrepancy(F)
        order = min(bin(key[2]).count("1") for p in (d1, d2) for key, _ in p.items())
        if order <= last_order:
            raise NondecomposableDiscrepancy(
                f"loop discrepancy at {q} did not rise above order {last_order}"
            )
        low1: dict = {}
        low2: dict = {}
        for poly, sink in ((d1, low1), (d2, low2)):
            for (a1, a2, m), c in poly.items():
                if bin(m).count("1") == order:
                    sink.setdefault((a1, a2), {})[m] = c
        for mu in sorted(set(low1) | set(low2)):
            c1 = NilCoefficient(low1.get(mu, {}))
            c2 = NilCoefficient(low2.get(mu, {}))
            if mu == (0, 0):
                raise NondecomposableDiscrepancy(f"constant discrepancy at {q}: {c1!r}, {c2!r}")
            d = primitive(mu)
            if c1 * d[0] + c2 * d[1]:
                raise NondecomposableDiscrepancy(
                    f"discrepancy at {q} in exponent {mu} is not a Hamiltonian shift"
                )
            g = c1 / d[1] if d[1] else -c2 / d[0]
            term = LaurentPoly({(mu[0], mu[1], m): c for m, c in g.items()})
            new[d] = new.get(d, LaurentPoly.one()) * (LaurentPoly.one() + term)
        last_order = order
    raise NondecomposableDiscrepancy(f"completion at {q} did not terminate")


# ---------------------------------------------------------------------------
# Diagram
# ---------------------------------------------------------------------------


def _pt_json(p):
    return [str(p[0]), str(p[1])]


def _wall_id(w: Wall) -> dict:
    return {"base": _pt_json(w.base), "dir": list(w.dir), "provenance": repr(w.provenance)}


@dataclass(eq=False)
class Diagram:
    """Completed wall structure for the marked points ``subset`` of ``scene``."""

    scene: Scene
    walls: tuple[Wall, ...]
    subset: int = -1
    subdiagrams: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.subset == -1:
            self.subset = (1 << self.scene.k) - 1
        self.walls = tuple(sorted(self.walls, key=lambda w: w.sort_key))

    @property
    def marked(self) -> dict[int, RationalPoint]:
        return {i: self.scene.points[i - 1] for i in mask_members(self.subset)}

    def __eq__(self, other):
        if not isinstance(other, Diagram):
            return NotImplemented
        return (
            self.scene == other.scene
            and self.subset == other.subset
            and self.walls == other.walls
        )

    def __hash__(self):
        return hash((self.scene, self.subset, self.walls))

    @cached_property
    def joints(self) -> tuple[RationalPoint, ...]:
        """Intersection points of wall supports away from the marked points."""
        marked = set(self.marked.values())
        pts = set()
        ws = self.walls
        for i in range(len(ws)):
            for j in range(i + 1, len(ws)):
                a, b = ws[i], ws[j]
                if a.base == b.base:
                    continue
                st = line_intersection(a.base, a.dir, b.base, b.dir)
                if st is None:
                    continue
                s, r = st
                if s < 0 or r < 0:
                    continue
                p = point_at(a.base, a.dir, s)
                if p not in marked:
                    pts.add(p)
        return tuple(sorted(pts))

    @cached_property
    def vertices(self) -> frozenset:
        """Wall bases together with all joints."""
        return frozenset({w.base for w in self.walls} | set(self.joints))

    def specialize(self, i: int) -> "Diagram":
        """Set t_i = 0: drop every term containing t_i and any wall left trivial."""
        walls = []
        for w in self.walls:
            nw = w.drop_index(i)
            if nw is not None:
                walls.append(nw)
        return Diagram(self.scene, tuple(walls), self.subset & ~(1 << (i - 1)))

    def walls_through(self, pt) -> list[Wall]:
        return [w for w in self.walls if w.contains(pt) is not None]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


class _Arrangement:
    """Incremental wall set driving the scattering sweep.

    A joint is any point, other than a marked point, where two non-parallel
    walls meet.  Joints are completed in lexicographic order; a joint is queued
    again whenever a later wall passes through it, so every completion sees all
    walls through its point.  Walls with equal base and direction are merged.
    Several walls may share a support line: trees of scatterings that combine
    the same incoming walls in a different order produce collinear rays.
    """

    def __init__(self, marked: dict[int, RationalPoint]):
        self.walls: list[Wall] = []
        self.marked = marked
        self.marked_at = {p: i for i, p in marked.items()}
        self.joints: set[RationalPoint] = set()
        self.index: dict[tuple, int] = {}
        self.heap: list = []
        self.queued: set[RationalPoint] = set()

    def _degenerate(self, msg, **witness):
        raise DegenerateScene(msg, witness)

    def _queue(self, p):
        if p not in self.queued:
            self.queued.add(p)
            heapq.heappush(self.heap, p)

    def add(self, w: Wall):
        for i, p in self.marked.items():
            s = w.contains(p)
            if s is not None and s > 0:
                self._degenerate(
                    f"marked point p{i} lies on a wall", kind="point_on_wall", point=i, wall=_wall_id(w)
                )
        key = (w.base, w.dir)
        if key in self.index:
            j = self.index[key]
            old = self.walls[j]
            self.walls[j] = Wall(w.base, w.dir, old.fun * w.fun, old.provenance)
            for q in self.joints:
                if w.contains(q) is not None and q != w.base:
                    self._queue(q)
            return
        for v in self.walls:
            if v.base == w.base:
                continue
            st = line_intersection(w.base, w.dir, v.base, v.dir)
            if st is None:
                continue
            s, r = st
            if s < 0 or r < 0:
                continue
            p = point_at(w.base, w.dir, s)
            if p in self.marked_at:
                continue
            self.joints.add(p)
            self._queue(p)
        self.index[key] = len(self.walls)
        self.walls.append(w)

    def through(self, q) -> list[Wall]:
        return [w for w in self.walls if w.contains(q) is not None]

    def sweep(self):
        while self.heap:
            q = heapq.heappop(self.heap)
            self.queued.discard(q)
            for w in complete_at(self.through(q), q):
                self.add(w)


def _walls_from_potential(i: int, point, potential: LaurentPoly) -> list[Wall]:
    bit = 1 << (i - 1)
    grouped: dict[tuple[int, int], dict] = {}
    for (a1, a2, m), c in potential.items():
        if (a1, a2) == (0, 0):
            raise NondecomposableDiscrepancy(f"potential at p{i} has a constant term")
        if m & bit:
            continue
        d = primitive((a1, a2))
        index = a1 // d[0] if d[0] else a2 // d[1]
        grouped.setdefault(d, {})[(a1, a2, m | bit)] = index * c
    walls = []
    for d, terms in grouped.items():
        terms[(0, 0, 0)] = 1
        walls.append(Wall(point, d, LaurentPoly(terms), Provenance.from_point(i)))
    return walls


class DiagramBuilder:
    """Recursive construction over point subsets with memoization."""

    def __init__(self, scene: Scene):
        self.scene = scene
        self.memo: dict[int, Diagram] = {}

    def build(self, mask: int | None = None) -> Diagram:
        from .potential import potential_at

        if mask is None:
            mask = (1 << self.scene.k) - 1
        if mask in self.memo:
            return self.memo[mask]
        members = mask_members(mask)
        marked = {i: self.scene.points[i - 1] for i in members}
        initial: list[Wall] = []
        subs = {}
        for i in members:
            sub = self.build(mask & ~(1 << (i - 1)))
            subs[mask & ~(1 << (i - 1))] = sub
            try:
                pot = potential_at(sub, marked[i]).value
            except PointOnWall as exc:
                raise DegenerateScene(
                    f"p{i} lies on a wall of the diagram without it",
                    {"kind": "point_on_wall", "point": i,
                     "subset": list(mask_members(sub.subset)),
                     "wall": _wall_id(exc.wall) if exc.wall else None},
                ) from exc
            except TraceThroughVertex as exc:
                raise DegenerateScene(
                    f"a broken line ending at p{i} passes through a vertex",
                    {"kind": "trace_through_vertex", "point": i,
                     "subset": list(mask_members(sub.subset)),
                     "vertex": _pt_json(exc.vertex) if exc.vertex else None},
                ) from exc
            initial.extend(_walls_from_potential(i, marked[i], pot))
        arr = _Arrangement(marked)
        for w in sorted(initial, key=lambda w: w.sort_key):
            arr.add(w)
        arr.sweep()
        for sub in list(subs.values()):
            subs.update(sub.subdiagrams)
        diagram = Diagram(self.scene, tuple(arr.walls), mask, subs)
        self.memo[mask] = diagram
        return diagram


@lru_cache(maxsize=128)
def build_diagram(scene: Scene) -> Diagram:
    """Completed tropical wall structure for ``scene``; raises DegenerateScene."""
    return DiagramBuilder(scene).build()


def validate_generic(scene: Scene, diagram: Diagram | None = None) -> None:
    """Raise DegenerateScene (with a witness) unless the configuration is generic.

    Without ``diagram`` the full construction is run, which exercises every
    sub-diagram.  With ``diagram`` its walls are checked as given: no marked
    point on a wall, and every scattered wall based at a joint.
    """
    if diagram is None:
        build_diagram(scene)
        return
    arr = _Arrangement(diagram.marked)
    for w in diagram.walls:
        arr.add(w)
    for w in diagram.walls:
        if w.provenance.kind == "scattered" and w.base not in arr.joints:
            raise DegenerateScene(
                "scattered wall based away from any joint",
                {"kind": "orphan_wall", "wall": _wall_id(w)},
            )


def check_consistency(diagram: Diagram):
    """First joint whose loop is not the identity, as (point, CoordMap), or None."""
    for q in diagram.joints:
        F = loop_automorphism(diagram.walls_through(q), q)
        if not F.is_identity():
            return q, F
    return None


def subset_mask(indices) -> int:
    return tset_mask(indices)
