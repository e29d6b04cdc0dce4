from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from infoplan.domains import (
    Found,
    Grid,
    admissible_moves,
    destinations,
    guess_model,
    sonar_coverage,
    stranded_configuration,
    submarine_process,
    weighing_model,
)
from infoplan.domains.guess import NO as G_NO, YES as G_YES
from infoplan.domains.submarine import NO, YES
from infoplan.domains.weighing import BALANCED, LEFT, RIGHT, admissible_weighings
from infoplan.entropy import information_content
from infoplan.errors import ModelError


def test_weighing_outcomes():
    m = weighing_model(3)
    d = m.outcome_distribution(0, 3, 2)
    assert d.probability(BALANCED) == pytest.approx(1 / 3)
    assert m.transition(0, 3, 2, BALANCED) == 1
    m = weighing_model(4)
    d = m.outcome_distribution(0, 4, 4)
    assert d.probability(LEFT) == pytest.approx(0.5)
    assert m.transition(0, 4, 4, LEFT) == 2
    assert [o for o, _ in d.support()] == [LEFT, RIGHT]


def test_weighing_admissible_sets():
    assert admissible_weighings(4) == (2, 4)
    assert admissible_weighings(5) == (2, 4)
    with pytest.raises(ModelError):
        weighing_model(1)
    with pytest.raises(ModelError):
        weighing_model(5).outcome_distribution(0, 5, 3)


def test_guess_outcomes():
    g = guess_model(4)
    d = g.outcome_distribution(0, 2, 1)
    assert d.probability(G_YES) == pytest.approx(0.5)
    assert {g.transition(0, 4, 2, m) for m in (G_YES, G_NO)} == {2}
    d = g.outcome_distribution(0, 3, 1)
    assert d.probability(G_YES) == pytest.approx(1 / 3)
    assert sorted(g.transition(0, 3, 1, m) for m in (G_YES, G_NO)) == [1, 2]
    with pytest.raises(ModelError):
        guess_model(1)


@given(st.integers(2, 60), st.data())
def test_counting_conservation(x, data):
    w = weighing_model(x)
    u = data.draw(st.sampled_from(w.measurement_set(0, x)))
    assert sum(w.transition(0, x, u, m) for m in (LEFT, RIGHT, BALANCED)) == x
    g = guess_model(x)
    u = data.draw(st.integers(1, x - 1))
    assert sum(g.transition(0, x, u, m) for m in (G_YES, G_NO)) == x


def test_sonar_coverage_examples():
    g = Grid(3)
    assert sonar_coverage(g, 5)[0] == 5
    assert sonar_coverage(g, 4)[0] == 4
    assert sonar_coverage(g, 7)[0] == 3
    assert set(sonar_coverage(g, 5)[1]) == {2, 4, 5, 6, 8}
    assert sonar_coverage(g, 5, g.mask_of([5, 2]))[0] == 3


def test_moves_examples():
    g = Grid(3)
    assert set(destinations(g, 5)) == {1, 3, 7, 9}
    assert set(destinations(g, 2)) == {8, 4, 6}
    assert 6 in admissible_moves(g, 2)
    assert len(admissible_moves(Grid(7), 25)) == 8


def test_grid_validation():
    with pytest.raises(ModelError):
        Grid(1)
    with pytest.raises(ModelError):
        Grid(3, tie_break="random")
    with pytest.raises(ModelError):
        sonar_coverage(Grid(3), 10)
    with pytest.raises(ModelError):
        Grid(3, move_order=[(1, 1)] * 8)


def test_lowest_control_id_order():
    g = Grid(5, tie_break="lowest-control-id")
    assert list(g.moves[13]) == sorted(g.moves[13])


@given(st.integers(3, 9), st.integers(3, 9), st.data())
def test_moves_on_grid_and_distinct(w, h, data):
    g = Grid(w, h)
    cell = data.draw(st.sampled_from(list(g.cells())))
    dests = destinations(g, cell)
    assert len(set(dests)) == len(dests)
    for d in dests:
        g.coords(d)
        r0, c0 = g.coords(cell)
        r1, c1 = g.coords(d)
        assert (abs(r1 - r0), abs(c1 - c0)) in {(2, 0), (0, 2), (1, 1)}


@given(st.integers(3, 8), st.data())
def test_coverage_monotone_in_mask(w, data):
    g = Grid(w)
    cell = data.draw(st.sampled_from(list(g.cells())))
    a = data.draw(st.integers(0, g.full_mask))
    b = a | data.draw(st.integers(0, g.full_mask))
    assert sonar_coverage(g, cell, b)[0] <= sonar_coverage(g, cell, a)[0]


@pytest.mark.parametrize("w", [3, 4, 5, 6])
def test_symmetries_commute(w):
    g = Grid(w)
    mask = g.mask_of([1, 2, w + 2])
    for perm in g.symmetries():
        pmask = g.mask_of(perm[c] for c in g.cells_of(mask))
        for c in g.cells():
            n, cells = sonar_coverage(g, c, mask)
            pn, pcells = sonar_coverage(g, perm[c], pmask)
            assert n == pn and {perm[x] for x in cells} == set(pcells)
            assert {perm[d] for d in destinations(g, c)} == set(destinations(g, perm[c]))


def test_parity_is_preserved():
    g = Grid(6)
    for c in g.cells():
        for d in destinations(g, c):
            assert sum(g.coords(c)) % 2 == sum(g.coords(d)) % 2


def test_submarine_process_branches():
    g = Grid(3)
    proc = submarine_process(g)
    assert proc.measurement_set(0, 4, 0) == (4,)
    d = proc.outcome_distribution(0, 0, 4)
    assert d.probability(YES) == pytest.approx(4 / 9)
    found = proc.transition(0, 0, 4, YES)
    assert found == Found(4)
    h = information_content(d.probability(YES)) + proc.terminal_entropy(4, found)
    assert h == pytest.approx(math.log2(9), abs=1e-12)
    miss = proc.transition(0, 0, 4, NO)
    assert g.remaining(miss) == 5
    assert proc.transition(1, found, 5, YES) == found


def test_zero_coverage_stage_is_certain():
    g = Grid(3)
    proc = submarine_process(g)
    mask = g.sonar_bits[5]
    d = proc.outcome_distribution(1, mask, 5)
    assert d.is_point_mass and d.probability(NO) == 1.0


def test_full_resolution_identity():
    g = Grid(4)
    proc = submarine_process(g)
    mask, bits = 0, []
    for ship in (6, 8, 16, 11, 1, 3, 9):
        d = proc.outcome_distribution(0, mask, ship)
        m = proc.not_found(0, mask, ship, d)
        bits.append(information_content(d.probability(m)))
        mask = proc.transition(0, mask, ship, m)
    assert g.remaining(mask) == 1
    assert math.fsum(bits) == pytest.approx(4.0, abs=1e-12)


def test_stranded_configuration_ties():
    from infoplan.rollout import base_policy_scores

    g, ship, mask = stranded_configuration()
    scores = base_policy_scores(g, ship, mask)
    assert len(scores) > 1 and len({s for _, s in scores}) == 1
    assert g.remaining(mask) == 4
