from __future__ import annotations

import math

import pytest

from infoplan.agent_dp import FixedAgent, brute_force_value
from infoplan.domains import guess_model, questions_needed, weighing_model, weighings_needed
from infoplan.dp import (
    bellman_backup,
    min_stages_for_information,
    reachable_states,
    solve,
    state_cap,
)
from infoplan.entropy import OutcomeDistribution
from infoplan.errors import ConsistencyError, ModelError, ResourceError, TargetNotReached


class Toy:
    """Single measurement with a fixed outcome distribution, then absorbing."""

    initial_state = "s"

    def __init__(self, probs=(1.0,), options=("u",)):
        self.probs = probs
        self.options = options

    def measurement_set(self, k, x):
        return self.options if x == "s" else ("u",)

    def outcome_distribution(self, k, x, u):
        if x != "s":
            return OutcomeDistribution.point_mass("m0")
        return OutcomeDistribution([(f"m{i}", p) for i, p in enumerate(self.probs)])

    def transition(self, k, x, u, m):
        return "t"

    def terminal_entropy(self, x):
        return 0.0


class Reversed:
    """Wrap a process and reverse its measurement enumeration order."""

    def __init__(self, proc):
        self.proc = proc
        self.initial_state = proc.initial_state

    def measurement_set(self, k, x):
        return tuple(reversed(self.proc.measurement_set(k, x)))

    def __getattr__(self, name):
        return getattr(self.proc, name)


def test_backup_weighing_two_and_three():
    zero = {0: 0.0, 1: 0.0}
    v, us = bellman_backup(weighing_model(2), 0, 2, zero)
    assert v == pytest.approx(1.0) and us == (2,)
    v, us = bellman_backup(weighing_model(3), 0, 3, zero)
    assert v == pytest.approx(math.log2(3)) and us == (2,)


def test_backup_trivial_and_errors():
    v, us = bellman_backup(Toy(), 0, "s", {"t": 0.0})
    assert v == 0.0 and us == ("u",)
    with pytest.raises(ConsistencyError):
        bellman_backup(Toy(), 0, "s", {})
    with pytest.raises(ModelError):
        bellman_backup(Toy(options=()), 0, "s", {"t": 0.0})


def test_solve_weighing_four():
    sol = solve(weighing_model(4), 2)
    assert sol.value == pytest.approx(2.0, abs=1e-9)
    assert set(sol.argmax(0, 4)) == {2, 4}


def test_solve_guess():
    sol = solve(guess_model(4), 2)
    assert sol.value == pytest.approx(2.0, abs=1e-9)
    assert sol.argmax(0, 4) == (2,)
    sol = solve(guess_model(3), 2)
    assert sol.value == pytest.approx(math.log2(3), abs=1e-9)
    assert set(sol.argmax(0, 3)) == {1, 2}


def test_policy_covers_reachable_states():
    proc = weighing_model(12)
    sol = solve(proc, 3)
    layers = reachable_states(proc, 3)
    for k in range(3):
        assert set(sol.policy[k]) == layers[k]
        for x, us in sol.policy[k].items():
            assert us and set(us) <= set(proc.measurement_set(k, x))
    assert set(sol.values[3]) == layers[3]


@pytest.mark.parametrize(
    "proc, target, expected",
    [
        (weighing_model(9), math.log2(9), 2),
        (guess_model(8), 3.0, 3),
        (weighing_model(3), math.log2(3), 1),
    ],
)
def test_min_stages(proc, target, expected):
    assert min_stages_for_information(proc, target, 10) == expected


def test_min_stages_unattainable():
    with pytest.raises(TargetNotReached) as info:
        min_stages_for_information(weighing_model(27), 5.0, 2)
    assert info.value.best == pytest.approx(math.log2(9))
    with pytest.raises(ModelError):
        min_stages_for_information(weighing_model(3), 0.0, 2)


def test_state_cap(monkeypatch):
    with pytest.raises(ResourceError) as info:
        solve(guess_model(64), 6, cap=10)
    assert info.value.cap == 10
    monkeypatch.setenv("INFOPLAN_STATE_CAP", "7")
    assert state_cap() == 7
    assert state_cap(3) == 3
    with pytest.raises(ResourceError):
        solve(guess_model(64), 6)


@pytest.mark.parametrize("n", range(2, 31))
def test_value_bounded_by_hypotheses(n):
    for model in (weighing_model, guess_model):
        assert solve(model(n), 3).value <= math.log2(n) + 1e-9


@pytest.mark.parametrize("n", [5, 9, 16])
def test_more_stages_never_hurt(n):
    for model in (weighing_model, guess_model):
        vals = [solve(model(n), N).value for N in range(1, 6)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("n", range(2, 13))
def test_bounds_match_min_stages(n):
    assert min_stages_for_information(weighing_model(n), math.log2(n), 10) == weighings_needed(n)
    assert min_stages_for_information(guess_model(n), math.log2(n), 10) == questions_needed(n)


def test_enumeration_order_does_not_matter():
    for proc in (weighing_model(10), guess_model(9)):
        a, b = solve(proc, 3), solve(Reversed(proc), 3)
        for k in range(3):
            assert a.values[k].keys() == b.values[k].keys()
            for x in a.values[k]:
                assert a.values[k][x] == pytest.approx(b.values[k][x], abs=1e-12)
                assert set(a.policy[k][x]) == set(b.policy[k][x])


@pytest.mark.parametrize("model", [weighing_model, guess_model])
@pytest.mark.parametrize("n", range(2, 9))
@pytest.mark.parametrize("N", range(1, 4))
def test_matches_decision_tree_enumeration(model, n, N):
    proc = model(n)
    if sum(len(layer) for layer in reachable_states(proc, N)) > 200:
        pytest.skip("too many states for enumeration")
    assert solve(proc, N).value == pytest.approx(brute_force_value(FixedAgent(proc), N), abs=1e-9)
