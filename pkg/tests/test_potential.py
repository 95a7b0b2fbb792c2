from __future__ import annotations

import random

import pytest
from helpers import W0_P2, relabel, z
from hypothesis import given, settings
from hypothesis import strategies as st

from tropscatter.checks import transport_path
from tropscatter.errors import PathThroughVertex, PointOnWall
from tropscatter.nilring import LaurentPoly
from tropscatter.potential import chamber_samples, enumerate_broken_lines, potential_at, transport
from tropscatter.scatter import build_diagram
from tropscatter.toric import BUILTIN_FANS, Scene, fan_builtin, hori_vafa, scene_random


def test_empty_scene_gives_hori_vafa(scene_k0):
    d = build_diagram(scene_k0)
    assert potential_at(d, (1, 2)).value == W0_P2
    assert potential_at(d, ("-7/3", 5)).value == W0_P2


@pytest.mark.parametrize(
    "u, extra",
    [((1, -1), z(0, -1, 1, 1)), ((-2, 1), z(-1, 0, 1, 1)), ((2, 1), z(1, 1, 1, 1))],
)
def test_first_order_chambers(diagram_k1, u, extra):
    assert potential_at(diagram_k1, u).value == W0_P2 + extra


def test_second_order_far_chamber(diagram_k2):
    expected = W0_P2 + z(0, -1, 1, 1) + z(0, -1, 1, 2) + z(1, -1, 1, 1, 2)
    assert potential_at(diagram_k2, (10, -10)).value == expected


def test_point_on_wall(diagram_k1):
    with pytest.raises(PointOnWall) as info:
        potential_at(diagram_k1, (0, 5))
    assert info.value.wall.dir == (0, 1)


# ---------------------------------------------------------------------------
# broken lines
# ---------------------------------------------------------------------------


def test_three_straight_lines_without_walls(scene_k0):
    lines = enumerate_broken_lines(build_diagram(scene_k0), (1, 1))
    assert len(lines) == 3
    assert all(line.bends == 0 for line in lines)
    assert {line.segments[0].exponent for line in lines} == {(1, 0), (0, 1), (-1, -1)}


def test_four_lines_in_chamber_a(diagram_k1):
    lines = enumerate_broken_lines(diagram_k1, (1, -1))
    assert len(lines) == 4
    bent = [line for line in lines if line.bends]
    assert len(bent) == 1
    assert bent[0].final == z(0, -1, 1, 1)


@pytest.mark.parametrize("u, wall_dir", [((2, 1), (1, 0)), ((1, 2), (0, 1))])
def test_chamber_c_line_bends_on_one_wall(diagram_k1, u, wall_dir):
    lines = [line for line in enumerate_broken_lines(diagram_k1, u) if line.bends]
    assert len(lines) == 1
    (line,) = lines
    assert line.final == z(1, 1, 1, 1)
    assert [s.bend.dir for s in line.segments[1:]] == [wall_dir]


def test_line_structure(diagram_k2):
    fan = fan_builtin("P2")
    starts = {(-r[0], -r[1]) for r in fan.rays}
    for u in [(10, -10), (4, 3), (-4, -6)]:
        lines = enumerate_broken_lines(diagram_k2, u)
        total = LaurentPoly.zero()
        for line in lines:
            first = line.segments[0]
            assert first.start is None and first.bend is None
            assert first.exponent in starts and first.coeff == 1 and first.tset == ()
            orders = [len(s.tset) for s in line.segments]
            assert orders == sorted(set(orders))
            assert line.bends <= 2
            total = total + line.final
        assert total == potential_at(diagram_k2, u).value


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------


def test_transport_across_horizontal_wall(diagram_k1):
    assert transport(W0_P2 + z(1, 1, 1, 1), diagram_k1, [(2, 1), (1, -1)]) == W0_P2 + z(0, -1, 1, 1)


def test_transport_contractible_loop(diagram_k1):
    p = W0_P2 + z(0, -1, 1, 1)
    small = [(1, -1), (3, -1), (3, -3), (1, -3), (1, -1)]
    assert transport(p, diagram_k1, small) == p


def test_transport_around_marked_point(diagram_k1):
    # the loop automorphism around p1 is not the identity, yet it fixes the
    # potential itself: W is single-valued on the chambers
    loop = [(1, -1), (5, -1), (5, 3), (-3, 3), (-3, -1), (1, -1)]
    p = potential_at(diagram_k1, (1, -1)).value
    assert transport(p, diagram_k1, loop) == p
    assert transport(z(1, 0), diagram_k1, loop) != z(1, 0)


def test_transport_around_scattering_point(diagram_k2):
    p = potential_at(diagram_k2, (2, "-1/2")).value
    square = [(2, "-1/2"), (4, "-1/2"), (4, "1/2"), (2, "1/2"), (2, "-1/2")]
    assert transport(p, diagram_k2, square) == p


def test_transport_degenerate_paths(diagram_k1):
    with pytest.raises(PathThroughVertex):
        transport(W0_P2, diagram_k1, [(1, 1), (-1, -1)])
    with pytest.raises(PathThroughVertex):
        transport(W0_P2, diagram_k1, [(-1, 1), (2, 0)])


@settings(max_examples=8)
@given(st.sampled_from(BUILTIN_FANS), st.integers(1, 3), st.integers(0, 1000))
def test_transport_matches_evaluation(fan, k, seed):
    d = build_diagram(scene_random(fan, k, seed))
    rng = random.Random(seed)
    pts = chamber_samples(d)
    for _ in range(3):
        u, v = rng.sample(pts, 2)
        path = transport_path(d, u, v, rng)
        if path is None:
            continue
        assert transport(potential_at(d, u).value, d, path) == potential_at(d, v).value


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


def test_locality_within_chambers(diagram_k2):
    for u, others in [
        ((10, -10), [(20, -30), (8, -9), ("9/2", -4)]),
        ((4, 3), [(9, 7), (5, 3), (60, 100)]),
        ((-4, -6), [(-50, -51), (-1, -2), ("-1/2", "-3/2")]),
    ]:
        ref = potential_at(diagram_k2, u).value
        for v in others:
            assert potential_at(diagram_k2, v).value == ref


@settings(max_examples=10)
@given(st.sampled_from(BUILTIN_FANS), st.integers(0, 3), st.integers(0, 1000))
def test_hori_vafa_part_and_order_bound(fan, k, seed):
    scene = scene_random(fan, k, seed)
    d = build_diagram(scene)
    for u in chamber_samples(d)[:4]:
        lines = enumerate_broken_lines(d, u)
        value = potential_at(d, u).value
        assert value.t_free_part() == hori_vafa(scene.fan)
        assert value.max_order() <= k
        assert all(line.bends <= k for line in lines)


@settings(max_examples=6)
@given(st.sampled_from(BUILTIN_FANS), st.integers(1, 3), st.integers(0, 1000))
def test_potential_specialization(fan, k, seed):
    scene = scene_random(fan, k, seed)
    d = build_diagram(scene)
    u = chamber_samples(d)[seed % len(chamber_samples(d))]
    value = potential_at(d, u).value
    for i in range(1, k + 1):
        rest = Scene(scene.fan, tuple(p for j, p in enumerate(scene.points, start=1) if j != i))
        sub = build_diagram(rest)
        try:
            expected = potential_at(sub, u).value
        except PointOnWall:
            continue
        assert value.drop_index(i) == relabel(expected, i)


def test_golden_chambers_by_label():
    from tropscatter.sceneio import GOLDEN_POINTS, golden_scene, golden_tables

    tables = golden_tables()
    for (order, label), u in GOLDEN_POINTS.items():
        d = build_diagram(golden_scene(order))
        assert potential_at(d, u).value == tables[(order, label)].value, label
