"""End-to-end consistency checks of a finished diagram.

Three independent checks, each returning None or a witness dictionary:

* every joint away from the marked points has trivial loop automorphism;
* transporting the potential between chamber samples agrees with evaluating
  broken lines at the destination;
* the period is the same in every sampled chamber.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import PathThroughVertex, TangentialCrossing, TraceThroughVertex
from .geometry import RationalPoint
from .nilring import LaurentPoly, format_rational
from .period import chamber_invariance_check, default_mmax
from .potential import chamber_samples, potential_at, transport
from .scatter import Diagram, check_consistency

__all__ = ["loop_check", "transport_check", "period_check", "run_checks", "pick_samples", "transport_path"]


def _pt(p):
    return [format_rational(p[0]), format_rational(p[1])]


def pick_samples(d: Diagram, n: int | None, seed: int) -> list[RationalPoint]:
    """``n`` chamber sample points (all chambers if ``n`` is None or large)."""
    pts = chamber_samples(d)
    if n is None or n >= len(pts):
        return pts
    return sorted(random.Random(seed).sample(pts, n))


def _path_ok(d: Diagram, path) -> bool:
    try:
        transport(LaurentPoly.zero(), d, path)
    except (PathThroughVertex, TangentialCrossing):
        return False
    return True


def loop_check(d: Diagram):
    bad = check_consistency(d)
    if bad is None:
        return None
    q, F = bad
    return {"check": "loop", "joint": _pt(q), "automorphism": repr(F)}


def transport_check(d: Diagram, samples, seed: int = 0, pairs: int | None = None):
    rng = random.Random(seed)
    samples = list(samples)
    if len(samples) < 2:
        return None
    values = {}

    def value(u):
        if u not in values:
            values[u] = potential_at(d, u).value
        return values[u]

    all_pairs = [(a, b) for i, a in enumerate(samples) for b in samples[i + 1:]]
    if pairs is not None and pairs < len(all_pairs):
        all_pairs = rng.sample(all_pairs, pairs)
    for u, v in all_pairs:
        path = transport_path(d, u, v, rng)
        if path is None:
            continue
        moved = transport(value(u), d, path)
        if moved != value(v):
            return {
                "check": "transport",
                "from": _pt(u),
                "to": _pt(v),
                "path": [_pt(p) for p in path],
                "transported": repr(moved),
                "evaluated": repr(value(v)),
            }
    return None


def transport_path(d: Diagram, u, v, rng: random.Random, tries: int = 20):
    """A polyline from u to v whose wall crossings are all transversal and simple.

    The straight segment is tried first, then two-leg detours through random
    rational points; None if nothing works.
    """
    candidates = [[u, v]]
    span = max(abs(Fraction(c)) for c in (*u, *v)) + 1
    for _ in range(tries):
        candidates.append([
            u,
            (span * Fraction(rng.randrange(-997, 998), 499), span * Fraction(rng.randrange(-997, 998), 503)),
            v,
        ])
    for path in candidates:
        if _path_ok(d, path):
            return path
    return None


def period_check(d: Diagram, samples, mmax: int):
    diff = chamber_invariance_check(d, samples, mmax)
    if diff is None:
        return None
    u, v, m, tset = diff
    return {"check": "period", "from": _pt(u), "to": _pt(v), "m": m, "tset": list(tset)}


def run_checks(d: Diagram, samples: int | None = None, seed: int = 0, mmax: int | None = None):
    """Run all checks; returns None if everything passes, else the first witness."""
    witness = loop_check(d)
    if witness is not None:
        return witness
    pts = pick_samples(d, samples, seed)
    try:
        witness = transport_check(d, pts, seed)
        if witness is not None:
            return witness
        return period_check(d, pts, mmax if mmax is not None else default_mmax(d.scene.k))
    except TraceThroughVertex as exc:
        return {"check": "potential", "error": str(exc)}
