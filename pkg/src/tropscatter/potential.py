"""Bulk-deformed potentials by broken-line enumeration, and transport along paths."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import PathThroughVertex, PointOnWall, TangentialCrossing, TraceThroughVertex
from .geometry import RationalPoint, angle_key, det, line_intersection, point_at, segment_ray_overlap
from .nilring import LaurentPoly, lp_substitute, lp_unit_pow, mask_members
from .scatter import Diagram, Wall, wall_crossing_map

__all__ = [
    "Segment",
    "BrokenLine",
    "ChamberPotential",
    "potential_at",
    "enumerate_broken_lines",
    "transport",
    "chamber_samples",
]


@dataclass(frozen=True)
class Segment:
    """One straight piece of a broken line, carrying ``coeff * t_tset * z^exponent``.

    ``start`` is None for the unbounded first segment; ``bend`` is the wall the
    segment starts on (None for the first one).
    """

    exponent: tuple[int, int]
    coeff: int | Fraction
    tset: tuple[int, ...]
    start: RationalPoint | None
    bend: Wall | None

    @property
    def monomial(self) -> LaurentPoly:
        return LaurentPoly.monomial(self.exponent[0], self.exponent[1], self.coeff, self.tset)


@dataclass(frozen=True)
class BrokenLine:
    segments: tuple[Segment, ...]
    endpoint: RationalPoint

    @property
    def final(self) -> LaurentPoly:
        return self.segments[-1].monomial

    @property
    def bends(self) -> int:
        return len(self.segments) - 1

    def sort_key(self):
        last = self.segments[-1]
        return (
            last.exponent,
            last.tset,
            tuple((s.exponent, s.start if s.start is not None else ()) for s in self.segments),
        )


@dataclass(frozen=True)
class ChamberPotential:
    at: RationalPoint
    value: LaurentPoly
    lines: tuple[BrokenLine, ...] | None = field(default=None, compare=False)


def _check_off_walls(d: Diagram, u):
    for w in d.walls:
        if w.contains(u) is not None:
            raise PointOnWall(f"{u} lies on a wall", wall=w)


def _reachable(d: Diagram) -> dict[tuple[int, int], set[int]]:
    """All exponent sums of wall terms with pairwise disjoint t-supports -> masks."""
    gens = set()
    for w in d.walls:
        for (a1, a2, m), _ in w.fun.items():
            if m:
                gens.add((a1, a2, m))
    states = {((0, 0), 0)}
    for a1, a2, m in sorted(gens):
        extra = set()
        for (s, mask) in states:
            if not mask & m:
                extra.add(((s[0] + a1, s[1] + a2), mask | m))
        states |= extra
    reach: dict = {}
    for s, mask in states:
        reach.setdefault(s, set()).add(mask)
    return reach


class _Tracer:
    def __init__(self, d: Diagram, u, collect: bool):
        self.d = d
        self.u = u
        self.collect = collect
        self.hv = [(-v[0], -v[1]) for v in d.scene.fan.rays]
        self.hv_set = set(self.hv)
        self.reach = _reachable(d)
        self.wdata = []
        for w in d.walls:
            bx, by, bd = _integral(w.base)
            c = Fraction(w.dir[0] * by - w.dir[1] * bx, bd)
            self.wdata.append((w, w.dir[0], w.dir[1], c.numerator, c.denominator, bx, by, bd))
        self.pow_cache: dict = {}
        self.results: dict = {}
        self.lines: list[BrokenLine] = []

    def feasible(self, a, used: int) -> bool:
        for h in self.hv:
            masks = self.reach.get((a[0] - h[0], a[1] - h[1]))
            if masks and any(not (m & used) for m in masks):
                return True
        return False

    def crossings(self, pos, a):
        """Walls met by the backward ray pos - s*a (s > 0), ordered by s.

        Returns ``(hits, degenerate)``: the transversal crossings before the first
        degenerate event, and that event as ``(point, walls)`` or None.  A degenerate
        event is the ray meeting a wall base, two non-parallel walls at once, or a
        wall at a point of a wall it runs alongside.  Walls parallel to the ray
        are never crossed: the ray carries an infinitesimal sideways offset (see
        :meth:`trace`).  Walls through ``pos`` itself are met at s = 0 and so
        are ignored.
        """
        back = (-a[0], -a[1])
        b0, b1 = back
        X, Y, D = _integral(pos)
        det_bp = b0 * Y - b1 * X
        events: dict = {}
        special = set()
        along = []
        for w, d0, d1, cn, cd, bx, by, bd in self.wdata:
            den = d0 * b1 - d1 * b0
            if den == 0:
                if b0 * (by * D - Y * bd) == b1 * (bx * D - X * bd):
                    along.append(w)
                continue
            # s = snum / (cd*D*den) is the ray parameter; only its sign is needed first
            snum = cn * D - (d0 * Y - d1 * X) * cd
            if snum == 0 or (snum > 0) != (den > 0):
                continue
            # r = rnum / (D*bd*(-den)) is the wall parameter
            rnum = det_bp * bd - (b0 * by - b1 * bx) * D
            if rnum != 0 and (rnum > 0) == (den > 0):
                continue
            s = Fraction(snum, cd * D * den)
            events.setdefault(s, []).append(w)
            if rnum == 0:
                special.add(s)
        hits = []
        for s in sorted(events):
            ws = events[s]
            pt = point_at(pos, back, s)
            # a wall the ray runs alongside is crossed right after any bend here
            beside = [w for w in along if w.contains(pt) is not None]
            merged = None if s in special or beside else _merge_collinear(ws)
            if merged is None:
                return hits, (pt, tuple(ws) + tuple(beside))
            hits.append((pt, merged))
        return hits, None

    def fpow(self, w: Wall, e: int) -> LaurentPoly:
        key = (w.fun, e)
        val = self.pow_cache.get(key)
        if val is None:
            val = lp_unit_pow(w.fun, e)
            self.pow_cache[key] = val
        return val

    def bends(self, w: Wall, a, used):
        """Admissible bends of exponent ``a`` (travelling backward) at wall ``w``."""
        e = abs(det(a, w.dir))
        if not e:
            return
        for (m1, m2, mk), c in self.fpow(w, e).items():
            if mk == 0 or mk & used:
                continue
            a2 = (a[0] - m1, a[1] - m2)
            if a2 == (0, 0) or not self.feasible(a2, used | mk):
                continue
            yield a2, c, mk

    def trace(self, pos, a, coeff, used, chain, off):
        # The ray really starts at pos + eps*off for an infinitesimal eps > 0, with
        # off never parallel to a; this is what decides the side on which it
        # passes a vertex, and the offset is carried unchanged along the ray.
        # chain holds the bends found so far, nearest to u first, as
        # (point, wall, exponent after the bend, bend coefficient, bend mask)
        hits, degenerate = self.crossings(pos, a)
        for point, w in hits:
            bends = list(self.bends(w, a, used))
            if not bends:
                continue
            # where the offset line off - s*a meets the wall's line through the origin
            t = Fraction(det(off, w.dir), det(a, w.dir))
            off2 = (off[0] - t * a[0], off[1] - t * a[1])
            for a2, c, mk in bends:
                self.trace(point, a2, coeff * c, used | mk, chain + ((point, w, a, c, mk),), off2)
        if degenerate is not None:
            self.resolve(degenerate, a, coeff, used, chain, off)
        elif a in self.hv_set:
            self.record(a, coeff, used, chain)

    def resolve(self, degenerate, a, coeff, used, chain, off):
        """Continue a trace through a vertex ``q`` using its infinitesimal offset.

        Blown up around ``q``, the walls through it are rays from the origin
        (walls based at ``q``) or lines through it, and the ray is the line
        ``off - s*a``, which misses the origin.  The local crossings are
        resolved in that picture; the trace then leaves ``q`` with the offset
        of its last local position.
        """
        q, walls = degenerate
        q = RationalPoint(*q)
        if det(off, a) == 0:
            raise TraceThroughVertex(
                f"a broken line ending at {self.u} passes through the vertex {q}", vertex=q
            )
        local = []
        for w in walls:
            if w.base == q:
                local.append((w, True))
            elif w.contains(q) is not None:
                local.append((w, False))
        self._local(q, local, off, a, coeff, used, chain, True)

    def _local(self, q, local, pos, a, coeff, used, chain, full_line):
        back = (-a[0], -a[1])
        hits = []
        for w, is_ray in local:
            st = line_intersection(pos, back, (0, 0), w.dir)
            if st is None:
                continue
            s, r = st
            if (not full_line and s <= 0) or (is_ray and r <= 0):
                continue
            hits.append((s, w))
        grouped: dict = {}
        for s, w in hits:
            grouped.setdefault(s, []).append(w)
        for s in sorted(grouped):
            w = _merge_collinear(grouped[s])
            if w is None:
                raise TraceThroughVertex(
                    f"a broken line ending at {self.u} meets opposite walls at {q}", vertex=q
                )
            point = point_at(pos, back, s)
            for a2, c, mk in self.bends(w, a, used):
                self._local(
                    q, local, point, a2, coeff * c, used | mk,
                    chain + ((q, w, a, c, mk),), False,
                )
        self.trace(q, a, coeff, used, chain, pos)

    def record(self, a_initial, coeff, used, chain):
        a_final = chain[0][2] if chain else a_initial
        key = (a_final[0], a_final[1], used)
        self.results[key] = self.results.get(key, 0) + coeff
        if not self.collect:
            return
        segs = [Segment(a_initial, 1, (), None, None)]
        acc_coeff, acc_mask = 1, 0
        for point, w, post, c, mk in reversed(chain):
            acc_coeff *= c
            acc_mask |= mk
            segs.append(Segment(post, acc_coeff, mask_members(acc_mask), point, w))
        self.lines.append(BrokenLine(tuple(segs), self.u))


def _integral(p) -> tuple[int, int, int]:
    """A rational point as integers (X, Y, D) with p = (X/D, Y/D) and D > 0."""
    x, y = Fraction(p[0]), Fraction(p[1])
    D = x.denominator * y.denominator // gcd(x.denominator, y.denominator)
    return x.numerator * (D // x.denominator), y.numerator * (D // y.denominator), D


def _merge_collinear(walls) -> Wall | None:
    """A single wall standing for walls crossed at one point of a common support.

    Only walls with one and the same direction combine (their functions commute
    and multiply); anything else is a genuine vertex and gives None.
    """
    if len(walls) == 1:
        return walls[0]
    d = walls[0].dir
    if any(w.dir != d for w in walls):
        return None
    return _merged_wall(tuple(sorted(walls, key=lambda w: w.base)))


@lru_cache(maxsize=4096)
def _merged_wall(walls: tuple[Wall, ...]) -> Wall:
    fun = walls[0].fun
    for w in walls[1:]:
        fun = fun * w.fun
    return Wall(walls[0].base, walls[0].dir, fun, walls[0].provenance)


# Initial infinitesimal offset of every backward ray; its slope is not the
# slope of any exponent vector that can occur.
_OFFSET = (Fraction(1), Fraction(7919, 104729))


def _trace_all(d: Diagram, u, collect: bool) -> _Tracer:
    u = RationalPoint.of(u[0], u[1])
    _check_off_walls(d, u)
    tracer = _Tracer(d, u, collect)
    finals = set()
    for s in tracer.reach:
        for h in tracer.hv:
            a = (h[0] + s[0], h[1] + s[1])
            if a != (0, 0):
                finals.add(a)
    for a in sorted(finals):
        tracer.trace(u, a, 1, 0, (), _OFFSET)
    return tracer


def potential_at(d: Diagram, u, lines: bool = False) -> ChamberPotential:
    """W_k(u): sum of final monomials of all broken lines ending at ``u``."""
    tracer = _trace_all(d, u, lines)
    value = LaurentPoly(tracer.results)
    found = None
    if lines:
        found = tuple(sorted(tracer.lines, key=BrokenLine.sort_key))
    return ChamberPotential(tracer.u, value, found)


def enumerate_broken_lines(d: Diagram, u) -> list[BrokenLine]:
    tracer = _trace_all(d, u, True)
    return sorted(tracer.lines, key=BrokenLine.sort_key)


def transport(p: LaurentPoly, d: Diagram, path) -> LaurentPoly:
    """Pull ``p`` back across every wall crossed by the polyline ``path``."""
    pts = [RationalPoint.of(x, y) for x, y in path]
    for w in d.walls:
        for q in pts:
            if w.contains(q) is not None:
                raise PathThroughVertex(f"path vertex {q} lies on a wall")
    for a, b in zip(pts, pts[1:]):
        tau = (b.x - a.x, b.y - a.y)
        if tau == (0, 0):
            continue
        hits = []
        for w in d.walls:
            st = line_intersection(a, tau, w.base, w.dir)
            if st is None:
                if segment_ray_overlap(a, b, w.base, w.dir):
                    raise TangentialCrossing(f"path segment {a} -> {b} runs along a wall")
                continue
            s, r = st
            if s <= 0 or s >= 1 or r < 0:
                continue
            if r == 0:
                raise PathThroughVertex(f"path passes through wall base {w.base}")
            hits.append((s, w))
        hits.sort(key=lambda h: h[0])
        for i in range(1, len(hits)):
            if hits[i][0] == hits[i - 1][0] and det(hits[i][1].dir, hits[i - 1][1].dir) != 0:
                raise PathThroughVertex(
                    f"path passes through wall intersection {point_at(a, tau, hits[i][0])}"
                )
        for _, w in hits:
            p = lp_substitute(p, wall_crossing_map(w, tau))
    return p


# ---------------------------------------------------------------------------
# Chambers
# ---------------------------------------------------------------------------


def _box_exit(base, direction, half):
    """Parameter at which base + s*direction leaves the square [-half, half]^2."""
    ts = []
    for c in (0, 1):
        if direction[c] > 0:
            ts.append((half - base[c]) / Fraction(direction[c]))
        elif direction[c] < 0:
            ts.append((-half - base[c]) / Fraction(direction[c]))
    return min(ts)


def _segment_clear(d: Diagram, start, end) -> bool:
    """True if the half-open segment (start, end] meets no wall."""
    tau = (end[0] - start[0], end[1] - start[1])
    for w in d.walls:
        st = line_intersection(start, tau, w.base, w.dir)
        if st is None:
            if segment_ray_overlap(start, end, w.base, w.dir) or w.contains(end) is not None:
                return False
            continue
        s, r = st
        if 0 < s <= 1 and r >= 0:
            return False
    return True


def chamber_samples(d: Diagram) -> list[RationalPoint]:
    """One interior point for every chamber (connected component of the wall complement).

    The walls are clipped to a square containing every vertex, the resulting planar
    subdivision is traversed face by face, and each bounded face yields a point
    just inside one of its edges.  Points are returned in canonical order.
    """
    pts = [w.base for w in d.walls] + list(d.joints) + list(d.scene.points)
    half = Fraction(max([abs(c) for p in pts for c in p] + [1]) * 2 + 1)
    if not d.walls:
        return [RationalPoint(Fraction(1, 3), Fraction(1, 7))]
    adj: dict = {}

    def link(p, q):
        adj.setdefault(p, set()).add(q)
        adj.setdefault(q, set()).add(p)

    boundary = []
    for w in d.walls:
        params = {Fraction(0)}
        for q in [*d.joints, *(v.base for v in d.walls)]:
            s = w.contains(q)
            if s is not None:
                params.add(s)
        end = _box_exit(w.base, w.dir, half)
        params.add(end)
        chain = [point_at(w.base, w.dir, s) for s in sorted(params)]
        for p, q in zip(chain, chain[1:]):
            link(p, q)
        boundary.append(chain[-1])
    corners = [RationalPoint(half, half), RationalPoint(-half, half),
               RationalPoint(-half, -half), RationalPoint(half, -half)]

    def perimeter_key(p):
        # position along the square boundary, counterclockwise from the corner (half, -half)
        x, y = p
        if x == half and y > -half:
            return (0, y)
        if y == half:
            return (1, -x)
        if x == -half:
            return (2, -y)
        return (3, x)

    ring = sorted(set(boundary) | set(corners), key=perimeter_key)
    for p, q in zip(ring, ring[1:] + ring[:1]):
        link(p, q)

    order = {}
    for v, nbrs in adj.items():
        order[v] = sorted(nbrs, key=lambda q: angle_key((q[0] - v[0], q[1] - v[1])))
    visited = set()
    samples = []
    for v in sorted(adj):
        for q in order[v]:
            if (v, q) in visited:
                continue
            cycle = []
            a, b = v, q
            while (a, b) not in visited:
                visited.add((a, b))
                cycle.append((a, b))
                nb = order[b]
                idx = nb.index(a)
                a, b = b, nb[idx - 1]
            area = sum(det(p, r) for p, r in cycle)
            if area <= 0:
                continue
            samples.append(_face_point(d, cycle))
    return sorted(samples)


def _face_point(d: Diagram, cycle) -> RationalPoint:
    for p, q in cycle:
        mid = RationalPoint((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
        normal = (-(q[1] - p[1]), q[0] - p[0])
        eps = Fraction(1, 16)
        for _ in range(40):
            cand = RationalPoint(mid[0] + eps * normal[0], mid[1] + eps * normal[1])
            if _segment_clear(d, mid, cand):
                return cand
            eps /= 4
    raise RuntimeError("could not place a sample point inside a chamber")
