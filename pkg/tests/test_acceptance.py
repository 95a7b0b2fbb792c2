"""Acceptance criteria 1-10; each test records a PASS/FAIL line in the terminal summary."""

from __future__ import annotations

import itertools
import time
from collections import Counter
from fractions import Fraction
from math import factorial
from pathlib import Path

from conftest import ACCEPTANCE
from helpers import ONE, W0_P2, relabel, z

from tropscatter.checks import loop_check, pick_samples, transport_check
from tropscatter.geometry import RationalPoint
from tropscatter.period import chamber_invariance_check, descendants, period
from tropscatter.potential import chamber_samples, potential_at
from tropscatter.scatter import DiagramBuilder, build_diagram, loop_automorphism
from tropscatter.sceneio import emit, golden_scene, golden_tables
from tropscatter.toric import BUILTIN_FANS, Scene, scene_random

README = Path(__file__).resolve().parent.parent / "README.md"


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_first_order_tables():
    start = time.perf_counter()
    d = DiagramBuilder(golden_scene(1)).build()
    got = [potential_at(d, u).value for u in [(1, -1), (-2, 1), (2, 1)]]
    elapsed = time.perf_counter() - start
    expected = [W0_P2 + z(0, -1, 1, 1), W0_P2 + z(-1, 0, 1, 1), W0_P2 + z(1, 1, 1, 1)]
    record(1, got == expected and elapsed < 1, f"3 chamber potentials exact in {elapsed:.3f}s")


def test_criterion_2_second_order_tables():
    start = time.perf_counter()
    d = DiagramBuilder(golden_scene(2)).build()
    samples = chamber_samples(d)
    got = Counter(emit_value(potential_at(d, u).value) for u in samples)
    elapsed = time.perf_counter() - start
    table = Counter(emit_value(cp.value) for (order, _), cp in golden_tables().items() if order == 2)
    ok = len(samples) == 9 and got == table and elapsed < 5
    record(2, ok, f"{len(samples)} chambers match the 9-row table as a multiset in {elapsed:.3f}s")


def emit_value(p):
    return tuple(sorted((k, str(v)) for k, v in p.items()))


def test_criterion_3_wall_census(diagram_k2):
    walls = {(w.base, w.dir, w.fun) for w in diagram_k2.walls}
    o, p2, q = RationalPoint.of(0, 0), RationalPoint.of(3, -2), RationalPoint.of(3, 0)
    first = {
        (o, (1, 0), ONE + z(1, 0, 1, 1)),
        (o, (0, 1), ONE + z(0, 1, 1, 1)),
        (o, (-1, -1), ONE + z(-1, -1, 1, 1)),
        (p2, (1, 0), ONE + z(1, 0, 1, 2)),
        (p2, (0, 1), ONE + z(0, 1, 1, 2)),
        (p2, (-1, -1), ONE + z(-1, -1, 1, 2)),
    }
    second = {
        (p2, (0, -1), ONE + z(0, -1, 1, 1, 2)),
        (o, (-1, 0), ONE + z(-1, 0, 1, 1, 2)),
        (q, (1, 1), ONE + z(1, 1, 1, 1, 2)),
    }
    ok = len(diagram_k2.walls) == 9 and walls == first | second
    record(3, ok, f"{len(diagram_k2.walls)} walls: 6 initial, 2 extended, 1 scattered")


def test_criterion_4_consistency_suite():
    start = time.perf_counter()
    failures = []
    count = 0
    for fan in BUILTIN_FANS:
        for seed in range(25):
            d = build_diagram(scene_random(fan, 1 + seed % 3, seed))
            witness = loop_check(d) or transport_check(d, pick_samples(d, 6, seed), seed)
            count += 1
            if witness is not None:
                failures.append((fan, seed, witness))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    record(4, ok, f"{count} scenes, {len(failures)} failures, {elapsed:.1f}s")


def test_criterion_5_monodromy_witness(diagram_k1):
    F = loop_automorphism(diagram_k1.walls, (0, 0), "cw")
    expected = (ONE - z(-1, -1, 1, 1) + z(0, 1, 1, 1), ONE + z(-1, -1, 1, 1) - z(1, 0, 1, 1))
    ok = not F.is_identity() and F.units == expected
    record(5, ok, "clockwise loop at p1 is z1 -> z1(1 - t1/(z1z2) + t1z2), z2 -> z2(1 + t1/(z1z2) - t1z1)")


def brute_closed_period(m):
    hits = sum(
        1
        for choice in itertools.product([(1, 0), (0, 1), (-1, -1)], repeat=m)
        if sum(c[0] for c in choice) == 0 and sum(c[1] for c in choice) == 0
    )
    return Fraction(hits, factorial(m))


def test_criterion_6_closed_period():
    start = time.perf_counter()
    s = period(potential_at(build_diagram(Scene.make("P2", ())), (1, 1)).value, 12)
    ok = all(s.coeff[3 * d] == Fraction(1, factorial(d) ** 3) for d in range(1, 5))
    ok = ok and all(s.coeff[m] == 0 for m in range(2, 13) if m % 3)
    ok = ok and all(s.coeff[m] == brute_closed_period(m) for m in range(2, 11))
    elapsed = time.perf_counter() - start
    record(6, ok and elapsed < 10, f"1/(d!)^3 for d <= 4, zero off 3Z, brute-force oracle agrees, {elapsed:.2f}s")


def test_criterion_7_descendants(diagram_k1, diagram_k2):
    t1 = descendants(period(potential_at(diagram_k1, (1, -1)).value, 6), 1)
    ta = descendants(period(potential_at(diagram_k2, (10, -10)).value, 6), 2)
    tc = descendants(period(potential_at(diagram_k2, (4, 3)).value, 6), 2)
    ok = (
        t1.entry(2, {1}) == 1
        and ta.entry(2, {1, 2}) == 0
        and all(t.entry(3, {i}) == 0 for t in (ta, tc) for i in (1, 2))
        and t1.entry(3, {1}) == 0
        and ta.entry(4, {1, 2}) == 1
        and tc.entry(4, {1, 2}) == 1
    )
    record(7, ok, "entry(2,{1})=1, entry(2,{1,2})=0, entry(3,{i})=0, entry(4,{1,2})=1 from chambers A1 and C1")


def test_criterion_8_chamber_and_position_independence():
    start = time.perf_counter()
    scenes = [golden_scene(2)] + [scene_random(fan, k, 40 + k) for fan in BUILTIN_FANS for k in (2, 3)]
    chambers = 0
    ok = True
    for scene in scenes:
        d = build_diagram(scene)
        pts = chamber_samples(d)
        chambers += len(pts)
        if chamber_invariance_check(d, pts, 7) is not None:
            ok = False
    pairs = [("P2", 2), ("P1xP1", 2), ("dP3", 1), ("P2", 3)]
    for fan, k in pairs:
        tables = []
        for seed in (101, 202):
            d = build_diagram(scene_random(fan, k, seed))
            tables.append(descendants(period(potential_at(d, chamber_samples(d)[0]).value, 7), k))
        ok = ok and tables[0] == tables[1] and all(len(v) == 1 for v in tables[0].by_size().values())
    elapsed = time.perf_counter() - start
    record(8, ok and elapsed < 120,
           f"{chambers} chambers over {len(scenes)} scenes agree; {len(pairs)} scene pairs agree; {elapsed:.1f}s")


def test_criterion_9_specialization():
    failures = 0
    checks = 0
    for n in range(10):
        fan = BUILTIN_FANS[n % len(BUILTIN_FANS)]
        scene = scene_random(fan, 3, 300 + n)
        d = build_diagram(scene)
        samples = chamber_samples(d)[:5]
        for i in range(1, 4):
            sub = build_diagram(Scene(scene.fan, tuple(p for j, p in enumerate(scene.points, 1) if j != i)))
            got = sorted((w.base, w.dir, w.fun) for w in d.specialize(i).walls)
            want = sorted((w.base, w.dir, relabel(w.fun, i)) for w in sub.walls)
            checks += 1
            failures += got != want
            for u in samples:
                if any(w.contains(u) is not None for w in sub.walls):
                    continue
                checks += 1
                failures += potential_at(d, u).value.drop_index(i) != relabel(potential_at(sub, u).value, i)
    record(9, failures == 0, f"10 scenes with k=3, {checks} diagram and potential comparisons, {failures} failures")


def test_criterion_10_non_reproducibility_note():
    text = README.read_text(encoding="utf-8") if README.exists() else ""
    ok = "## What is not reproduced" in text
    record(10, ok, "analytic statements documented as out of reach in README 'What is not reproduced'")
