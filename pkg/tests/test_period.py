from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial

import pytest
from helpers import ONE, W0_P2, z
from hypothesis import given, settings
from hypothesis import strategies as st

from tropscatter.nilring import LaurentPoly, lp_constant_term
from tropscatter.period import (
    chamber_invariance_check,
    collapsed_period,
    default_mmax,
    descendants,
    period,
)
from tropscatter.potential import chamber_samples, potential_at
from tropscatter.scatter import Diagram, Wall, build_diagram
from tropscatter.toric import BUILTIN_FANS, fan_builtin, hori_vafa, scene_random


def brute_constant_term(exponents, m):
    """[z^0] (sum of z^e)^m by enumerating every ordered choice of m terms."""
    count = 0
    for choice in itertools.product(exponents, repeat=m):
        if sum(e[0] for e in choice) == 0 and sum(e[1] for e in choice) == 0:
            count += 1
    return count


def test_brute_force_oracle_against_closed_form():
    for d in range(1, 4):
        assert brute_constant_term([(1, 0), (0, 1), (-1, -1)], 3 * d) == factorial(3 * d) // factorial(d) ** 3


def test_closed_period_p2():
    s = period(W0_P2, 12)
    for m in range(2, 13):
        expected = Fraction(brute_constant_term([(1, 0), (0, 1), (-1, -1)], m), factorial(m))
        assert s.coeff[m] == expected
    assert [s.coeff[3 * d] for d in range(1, 5)] == [1, Fraction(1, 8), Fraction(1, 216), Fraction(1, 13824)]
    assert all(s.coeff[m] == 0 for m in range(2, 13) if m % 3)


def test_period_rejects_small_mmax():
    with pytest.raises(ValueError):
        period(W0_P2, 1)


def test_default_truncation():
    assert default_mmax(0) == 6 and default_mmax(2) == 12


# ---------------------------------------------------------------------------
# descendants
# ---------------------------------------------------------------------------


def test_one_line_through_two_points(diagram_k1):
    table = descendants(period(potential_at(diagram_k1, (1, -1)).value, 6), 1)
    assert table.entry(2, {1}) == 1
    assert table.entry(3, {1}) == 0
    e = [x for x in table.entries() if x.m == 2 and x.tset == (1,)][0]
    assert (e.n, e.psi_power, e.degree_size) == (1, 0, 3)


@pytest.mark.parametrize("u", [(10, -10), (4, 3)])
def test_two_point_entries(diagram_k2, u):
    table = descendants(period(potential_at(diagram_k2, u).value, 7), 2)
    assert table.entry(2, {1, 2}) == 0
    assert table.entry(4, {1, 2}) == 1
    assert table.entry(2, {1}) == table.entry(2, {2}) == 1


def test_hand_expanded_fourth_power():
    # chamber A1: [z^0] W^4 picks t1 t2 from 4!/(1!1!1!1!) arrangements of z1 * z2^(-1) ... = 24 terms
    w = W0_P2 + z(0, -1, 1, 1) + z(0, -1, 1, 2) + z(1, -1, 1, 1, 2)
    c = lp_constant_term(w ** 4)
    assert c.get(0b11) == 24


def test_entry_out_of_range(diagram_k1):
    table = descendants(period(W0_P2, 4), 1)
    with pytest.raises(KeyError):
        table.entry(5, {1})


# ---------------------------------------------------------------------------
# chamber invariance
# ---------------------------------------------------------------------------


def test_chamber_invariance_one_point(diagram_k1):
    assert chamber_invariance_check(diagram_k1, [(1, -1), (-2, 1), (2, 1)], 6) is None


def test_chamber_invariance_two_points(diagram_k2):
    samples = chamber_samples(diagram_k2)
    assert len(samples) == 9
    assert chamber_invariance_check(diagram_k2, samples, 7) is None


def test_corrupted_diagram_is_caught(diagram_k2):
    walls = list(diagram_k2.walls)
    i = next(j for j, w in enumerate(walls) if w.provenance.kind == "scattered")
    w = walls[i]
    walls[i] = Wall(w.base, w.dir, ONE + z(1, 1, 2, 1, 2), w.provenance)
    bad = Diagram(diagram_k2.scene, tuple(walls))
    diff = chamber_invariance_check(bad, chamber_samples(bad), 7)
    assert diff is not None
    u, v, m, tset = diff
    assert tset == (1, 2)


# ---------------------------------------------------------------------------
# collapse
# ---------------------------------------------------------------------------


def test_collapsed_examples(diagram_k1, diagram_k2):
    c1 = collapsed_period(period(potential_at(diagram_k1, (1, -1)).value, 6), 1)
    assert c1.coeff[(2, 1)] == 1
    c2 = collapsed_period(period(potential_at(diagram_k2, (10, -10)).value, 7), 2)
    assert c2.coeff[(4, 2)] == 1
    assert c2.coeff[(2, 1)] == 2 and c2.per_subset()[(2, 1)] == 1
    c0 = collapsed_period(period(W0_P2, 9), 0)
    assert c0.coeff == {(m, 0): v for m, v in period(W0_P2, 9).coeff.items() if v}


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


@settings(max_examples=6)
@given(st.integers(1, 3), st.integers(0, 1000))
def test_p2_divisibility(k, seed):
    d = build_diagram(scene_random("P2", k, seed))
    table = descendants(period(potential_at(d, chamber_samples(d)[0]).value, 9), k)
    for e in table.entries():
        if (e.m + e.n) % 3:
            assert e.value == 0


@settings(max_examples=6)
@given(st.integers(1, 3), st.integers(0, 1000))
def test_p1xp1_parity(k, seed):
    d = build_diagram(scene_random("P1xP1", k, seed))
    table = descendants(period(potential_at(d, chamber_samples(d)[0]).value, 8), k)
    for e in table.entries():
        if (e.m + e.n) % 2:
            assert e.value == 0


@pytest.mark.parametrize("fan", BUILTIN_FANS)
def test_closed_sector_every_fan(fan):
    w0 = hori_vafa(fan_builtin(fan))
    d = build_diagram(scene_random(fan, 2, 3))
    table = descendants(period(potential_at(d, chamber_samples(d)[-1]).value, 8), 2)
    exps = [e for e in w0.exponents()]
    for m in range(2, 9):
        assert table.entry(m, ()) == Fraction(brute_constant_term(exps, m), factorial(m))


@settings(max_examples=4)
@given(st.sampled_from(BUILTIN_FANS), st.integers(1, 2), st.integers(0, 1000))
def test_entries_depend_only_on_subset_size(fan, k, seed):
    tables = []
    for s in (seed, seed + 1):
        d = build_diagram(scene_random(fan, k, s))
        tables.append(descendants(period(potential_at(d, chamber_samples(d)[0]).value, 7), k))
    assert tables[0] == tables[1]
    assert all(len(values) == 1 for values in tables[0].by_size().values())


def test_period_of_zero_is_zero():
    s = period(LaurentPoly.zero(), 4)
    assert all(c.is_zero() for c in s.coeff.values())
