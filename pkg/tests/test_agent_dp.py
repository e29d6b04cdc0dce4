from __future__ import annotations

import math

import pytest

from infoplan.agent_dp import (
    FixedAgent,
    brute_force_value,
    count_policies,
    maximize_initial,
    solve_extended,
)
from infoplan.domains import Grid, submarine_process, weighing_model
from infoplan.entropy import OutcomeDistribution
from infoplan.errors import ModelError, ResourceError

LOG9 = math.log2(9)


@pytest.fixture(scope="module")
def sub3():
    proc = submarine_process(Grid(3))
    return proc, solve_extended(proc, 3)


def test_three_by_three_value_and_starts(sub3):
    proc, sol = sub3
    value, starts = sol.best_initial()
    assert value == pytest.approx(LOG9, abs=1e-9)
    assert set(starts) == {2, 4, 6, 8}


def test_corner_starts_fall_short_at_three_stages(sub3):
    _, sol = sub3
    value, _ = sol.best_initial([1, 3, 7, 9])
    assert value < LOG9 - 1e-6
    proc = submarine_process(Grid(3))
    value4, _ = solve_extended(proc, 4, positions=[1, 3, 7, 9]).best_initial()
    assert value4 == pytest.approx(LOG9, abs=1e-9)


def test_symmetry_classes(sub3):
    _, sol = sub3
    for cls in ({2, 4, 6, 8}, {1, 3, 7, 9}):
        vals = {round(sol.value_at(c), 12) for c in cls}
        assert len(vals) == 1


def test_table_rows_present(sub3):
    _, sol = sub3
    grid = Grid(3)
    rows = {2: (6, {-4, -2}), 4: (2, {-4, 2}), 6: (-2, {-2, 4}), 8: (-6, {2, 4})}
    for start, (first, second) in rows.items():
        assert first in sol.move_policy[0][(start, 0)]
        mask = grid.sonar_bits[start]
        assert second <= set(sol.move_policy[1][(start + first, mask)])


def test_maximize_initial():
    assert maximize_initial({("a", 0): 1.5}, 0, ["a"]) == (1.5, ("a",))
    with pytest.raises(ModelError):
        maximize_initial({}, 0, [])


def test_all_searched_state_is_worth_nothing():
    grid = Grid(2)
    proc = submarine_process(grid)
    sol = solve_extended(proc, 2)
    full = grid.full_mask
    for k in (0, 1):
        for (xp, x), v in sol.values[k].items():
            if x == full:
                assert v == 0.0


def test_oracle_trivial_horizon():
    proc = submarine_process(Grid(3))
    assert brute_force_value(proc, 0, positions=[5]) == 0.0
    assert brute_force_value(FixedAgent(weighing_model(3)), 1) == pytest.approx(math.log2(3))


def test_oracle_cap():
    proc = submarine_process(Grid(3))
    with pytest.raises(ResourceError):
        brute_force_value(proc, 3, cap=10)
    assert count_policies(proc, 0, 1, 5, 0) == 4


@pytest.mark.parametrize("N", [1, 2, 3])
def test_oracle_matches_two_by_two(N):
    proc = submarine_process(Grid(2))
    assert solve_extended(proc, N).best_initial()[0] == pytest.approx(brute_force_value(proc, N), abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("N", [1, 2])
def test_oracle_matches_weighing(n, N):
    proc = FixedAgent(weighing_model(n))
    assert solve_extended(proc, N).best_initial()[0] == pytest.approx(brute_force_value(proc, N), abs=1e-9)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_monotone_horizon(N):
    proc = submarine_process(Grid(3))
    a = solve_extended(proc, N).best_initial()[0]
    b = solve_extended(proc, N + 1).best_initial()[0]
    assert b >= a - 1e-12


class SlipAgent:
    """A line of cells where a move may slip and stay put; guess-style measurements."""

    def __init__(self, slip, n_cells=3, n=6):
        self.slip = slip
        self.n_cells = n_cells
        self.initial_positions = tuple(range(n_cells))
        self.initial_state = n

    def control_set(self, k, xp):
        return tuple(d for d in (-1, 1) if 0 <= xp + d < self.n_cells)

    def disturbance_distribution(self, k, xp, up):
        if self.slip == 0.0:
            return OutcomeDistribution.point_mass("go")
        return OutcomeDistribution([("go", 1 - self.slip), ("stay", self.slip)])

    def dynamics(self, k, xp, up, w):
        return xp + up if w == "go" else xp

    def measurement_set(self, k, xp, x):
        # position limits the size of the probe
        top = min(x - 1, xp + 1)
        return tuple(range(1, top + 1)) if x > 1 else (0,)

    def outcome_distribution(self, k, x, u):
        if u == 0:
            return OutcomeDistribution.point_mass("none")
        return OutcomeDistribution([("yes", u / x), ("no", (x - u) / x)])

    def transition(self, k, x, u, m):
        return {"yes": u, "no": x - u, "none": x}[m]

    def terminal_entropy(self, xp, x):
        return 0.0


@pytest.mark.parametrize("slip", [0.0, 0.3])
@pytest.mark.parametrize("N, n", [(1, 6), (2, 6), (3, 4)])
def test_oracle_matches_random_disturbance(slip, N, n):
    proc = SlipAgent(slip, n=n)
    assert solve_extended(proc, N).best_initial()[0] == pytest.approx(brute_force_value(proc, N), abs=1e-9)


def test_point_mass_disturbance_reduces_to_substitution():
    proc = SlipAgent(0.0)
    sol = solve_extended(proc, 3)
    # recompute one backup by direct substitution of the next position
    for (xp, x), v in sol.values[0].items():
        best = -math.inf
        for up in proc.control_set(0, xp):
            nxt = xp + up
            for u in proc.measurement_set(0, xp, x):
                d = proc.outcome_distribution(0, x, u)
                q = math.fsum(
                    p * (math.log2(1 / p) + sol.values[1][(nxt, proc.transition(0, x, u, m))])
                    for m, p in d.support()
                )
                best = max(best, q)
        assert v == pytest.approx(best, abs=1e-12)
