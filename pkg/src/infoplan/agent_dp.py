"""Dynamic programming for an agent whose position constrains its measurements.

A coupled process adds agent motion to a measurement process:

* ``initial_positions`` and ``initial_state``
* ``control_set(k, xp)``, ``disturbance_distribution(k, xp, up)``,
  ``dynamics(k, xp, up, w)`` for the agent
* ``measurement_set(k, xp, x)``, ``outcome_distribution(k, x, u)``,
  ``transition(k, x, u, m)`` for the measurements
* ``terminal_entropy(xp, x)``

The recurrence maximizes over the agent control outside the expectation over
the disturbance, and over the measurement inside it, so the measurement may
depend on the realized disturbance.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Protocol, Sequence

from .dp import argmax_set, state_cap
from .entropy import OutcomeDistribution, information_content
from .errors import ConsistencyError, ModelError, ResourceError

DEFAULT_TREE_CAP = 2_000_000


class CoupledProcess(Protocol):
    initial_positions: Sequence[Hashable]
    initial_state: Hashable

    def control_set(self, k: int, xp: Hashable) -> Sequence[Hashable]: ...

    def disturbance_distribution(self, k: int, xp: Hashable, up: Hashable) -> OutcomeDistribution: ...

    def dynamics(self, k: int, xp: Hashable, up: Hashable, w: Hashable) -> Hashable: ...

    def measurement_set(self, k: int, xp: Hashable, x: Hashable) -> Sequence[Hashable]: ...

    def outcome_distribution(self, k: int, x: Hashable, u: Hashable) -> OutcomeDistribution: ...

    def transition(self, k: int, x: Hashable, u: Hashable, m: Hashable) -> Hashable: ...

    def terminal_entropy(self, xp: Hashable, x: Hashable) -> float: ...


class FixedAgent:
    """Present a plain measurement process as a coupled one with an idle agent."""

    POSITION = "idle"
    CONTROL = "stay"

    def __init__(self, proc):
        self.proc = proc
        self.initial_positions = (self.POSITION,)
        self.initial_state = proc.initial_state

    def control_set(self, k, xp):
        return (self.CONTROL,)

    def disturbance_distribution(self, k, xp, up):
        return OutcomeDistribution.point_mass(None)

    def dynamics(self, k, xp, up, w):
        return xp

    def measurement_set(self, k, xp, x):
        return self.proc.measurement_set(k, x)

    def outcome_distribution(self, k, x, u):
        return self.proc.outcome_distribution(k, x, u)

    def transition(self, k, x, u, m):
        return self.proc.transition(k, x, u, m)

    def terminal_entropy(self, xp, x):
        return self.proc.terminal_entropy(x)


def _branches(proc, k, xp, x, up):
    """``[(p_w, xp_next, [(u, [(p_m, h, x_next), ...]), ...]), ...]`` for one control."""
    controls = proc.measurement_set(k, xp, x)
    if not controls:
        raise ModelError(f"empty measurement set at stage {k}, state {(xp, x)!r}")
    out = []
    for w, pw in proc.disturbance_distribution(k, xp, up).support():
        xp_next = proc.dynamics(k, xp, up, w)
        per_u = []
        for u in controls:
            outs = [
                (pm, information_content(pm), proc.transition(k, x, u, m))
                for m, pm in proc.outcome_distribution(k, x, u).support()
            ]
            per_u.append((u, outs))
        out.append((w, pw, xp_next, per_u))
    return out


@dataclass
class ExtendedSolution:
    """Result of :func:`solve_extended`.

    ``values[k][(xp, x)]`` is in bits. ``move_policy[k][(xp, x)]`` is the
    tuple of maximizing agent controls. ``measurement_policy[k][(xp, x)]``
    maps ``(up, w)`` for every maximizing control ``up`` and each of its
    disturbances ``w`` to the tuple of maximizing measurements.
    """

    horizon: int
    initial_state: Hashable
    initial_positions: tuple
    values: list[dict] = field(repr=False)
    move_policy: list[dict] = field(repr=False)
    measurement_policy: list[dict] = field(repr=False)

    def value_at(self, xp: Hashable, x: Hashable | None = None) -> float:
        return self.values[0][(xp, self.initial_state if x is None else x)]

    def best_initial(self, positions: Sequence[Hashable] | None = None) -> tuple[float, tuple]:
        pos = self.initial_positions if positions is None else tuple(positions)
        return maximize_initial(self.values[0], self.initial_state, pos)

    def measurements(self, k: int, xp: Hashable, x: Hashable) -> tuple:
        """Union of maximizing measurements over optimal controls and disturbances."""
        seen = []
        for us in self.measurement_policy[k][(xp, x)].values():
            seen.extend(u for u in us if u not in seen)
        return tuple(seen)

    @property
    def n_states(self) -> int:
        return sum(len(v) for v in self.values)


def reachable_augmented(proc: CoupledProcess, horizon: int, starts, cap: int | None = None):
    cap = state_cap(cap)
    layers = [set(starts)]
    count = len(layers[0])
    for k in range(horizon):
        nxt = set()
        for xp, x in layers[k]:
            controls = proc.control_set(k, xp)
            if not controls:
                raise ModelError(f"empty control set at stage {k}, position {xp!r}")
            for up in controls:
                for _, _, xp_next, per_u in _branches(proc, k, xp, x, up):
                    for _, outs in per_u:
                        for _, _, x_next in outs:
                            nxt.add((xp_next, x_next))
        count += len(nxt)
        if count > cap:
            raise ResourceError(
                f"coupled reachable state count exceeds cap {cap} at stage {k + 1}", cap=cap
            )
        layers.append(nxt)
    return layers


def _backup(proc, k, xp, x, J_next):
    controls = list(proc.control_set(k, xp))
    if not controls:
        raise ModelError(f"empty control set at stage {k}, position {xp!r}")
    scored = []
    inner = {}
    for up in controls:
        q = 0.0
        for w, pw, xp_next, per_u in _branches(proc, k, xp, x, up):
            candidates = []
            for u, outs in per_u:
                total = 0.0
                for pm, h, x_next in outs:
                    try:
                        total += pm * (h + J_next[(xp_next, x_next)])
                    except KeyError:
                        raise ConsistencyError(
                            f"successor {(xp_next, x_next)!r} missing at stage {k + 1}"
                        ) from None
                candidates.append((u, total))
            best_u, us = argmax_set(candidates)
            inner[(up, w)] = us
            q += pw * best_u
        scored.append((up, q))
    value, ups = argmax_set(scored)
    chosen = {key: us for key, us in inner.items() if key[0] in ups}
    return value, ups, chosen


def solve_extended(
    proc: CoupledProcess,
    horizon: int,
    positions: Sequence[Hashable] | None = None,
    cap: int | None = None,
) -> ExtendedSolution:
    """Backward induction over reachable (position, measurement state) pairs.

    *positions* restricts the candidate initial positions (default: all of
    ``proc.initial_positions``).
    """
    if horizon < 1:
        raise ModelError(f"horizon must be >= 1, got {horizon}")
    positions = tuple(proc.initial_positions if positions is None else positions)
    if not positions:
        raise ModelError("no initial positions")
    starts = [(xp, proc.initial_state) for xp in positions]
    layers = reachable_augmented(proc, horizon, starts, cap)
    values = [dict() for _ in range(horizon + 1)]
    moves = [dict() for _ in range(horizon)]
    meas = [dict() for _ in range(horizon)]
    values[horizon] = {s: float(proc.terminal_entropy(*s)) for s in layers[horizon]}
    for k in range(horizon - 1, -1, -1):
        J_next = values[k + 1]
        for s in sorted(layers[k], key=repr):
            values[k][s], moves[k][s], meas[k][s] = _backup(proc, k, s[0], s[1], J_next)
    return ExtendedSolution(horizon, proc.initial_state, positions, values, moves, meas)


def maximize_initial(
    J0: Mapping[tuple, float], x0: Hashable, positions: Sequence[Hashable]
) -> tuple[float, tuple]:
    """Best stage-0 value over candidate initial positions, with all maximizers."""
    positions = tuple(positions)
    if not positions:
        raise ModelError("no initial positions to maximize over")
    return argmax_set([(xp, J0[(xp, x0)]) for xp in positions])


# --- brute-force oracle -----------------------------------------------------
#
# Policies are enumerated as explicit decision trees and each tree is scored
# by summing probability-weighted information over its root-to-leaf paths.
# Nothing is memoized and no value-to-go is ever maximized per node, so the
# result is independent of the backward recursion above.


def count_policies(proc: CoupledProcess, k: int, horizon: int, xp, x) -> int:
    if k == horizon:
        return 1
    total = 0
    for up in proc.control_set(k, xp):
        prod = 1
        for _, _, xp_next, per_u in _branches(proc, k, xp, x, up):
            options = 0
            for _, outs in per_u:
                sub = 1
                for _, _, x_next in outs:
                    sub *= count_policies(proc, k + 1, horizon, xp_next, x_next)
                options += sub
            prod *= options
        total += prod
    return total


def enumerate_policies(proc: CoupledProcess, k: int, horizon: int, xp, x):
    """Yield every closed-loop decision tree rooted at stage *k*.

    A leaf is ``("leaf", terminal_bits)``; an internal node is
    ``("node", up, ((pw, u, ((pm, h, subtree), ...)), ...))`` with one entry
    per disturbance.
    """
    if k == horizon:
        yield ("leaf", float(proc.terminal_entropy(xp, x)))
        return
    for up in proc.control_set(k, xp):
        per_w_choices = []
        for _, pw, xp_next, per_u in _branches(proc, k, xp, x, up):
            choices = []
            for u, outs in per_u:
                subtree_lists = [
                    list(enumerate_policies(proc, k + 1, horizon, xp_next, x_next))
                    for _, _, x_next in outs
                ]
                for combo in itertools.product(*subtree_lists):
                    choices.append(
                        (pw, u, tuple((pm, h, t) for (pm, h, _), t in zip(outs, combo)))
                    )
            per_w_choices.append(choices)
        for branch in itertools.product(*per_w_choices):
            yield ("node", up, branch)


def policy_value(tree) -> float:
    """Expected total information of one decision tree, summed path by path."""
    total = 0.0
    stack = [(tree, 1.0, 0.0)]
    while stack:
        node, prob, acc = stack.pop()
        if node[0] == "leaf":
            total += prob * (acc + node[1])
            continue
        for pw, _u, outs in node[2]:
            for pm, h, sub in outs:
                stack.append((sub, prob * pw * pm, acc + h))
    return total


def brute_force_value(
    proc: CoupledProcess,
    horizon: int,
    positions: Sequence[Hashable] | None = None,
    cap: int = DEFAULT_TREE_CAP,
) -> float:
    """Maximum over all decision trees (and initial positions) of the objective.

    Intended for tiny instances only; raises :class:`ResourceError` when the
    number of trees exceeds *cap*.
    """
    if horizon < 0:
        raise ModelError(f"horizon must be >= 0, got {horizon}")
    positions = tuple(proc.initial_positions if positions is None else positions)
    if not positions:
        raise ModelError("no initial positions")
    x0 = proc.initial_state
    n_trees = sum(count_policies(proc, 0, horizon, xp, x0) for xp in positions)
    if n_trees > cap:
        raise ResourceError(f"{n_trees} policy trees exceed cap {cap}", cap=cap)
    best = -math.inf
    for xp in positions:
        for tree in enumerate_policies(proc, 0, horizon, xp, x0):
            best = max(best, policy_value(tree))
    return best
