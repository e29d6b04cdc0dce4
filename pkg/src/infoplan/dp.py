"""Exact finite-horizon dynamic programming over a measurement process.

A measurement process is any object with

* ``initial_state``
* ``measurement_set(k, x)`` -> sequence of admissible measurements
* ``outcome_distribution(k, x, u)`` -> :class:`~infoplan.entropy.OutcomeDistribution`
* ``transition(k, x, u, m)`` -> next state
* ``terminal_entropy(x)`` -> bits

States and measurements are opaque hashables; the solver never looks inside.
The value of a state is the largest expected sum of outcome information
contents obtainable from it, and the policy keeps every maximizing
measurement, not just one.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping, Protocol, Sequence

from .entropy import OutcomeDistribution, information_content
from .errors import ConsistencyError, ModelError, ResourceError, TargetNotReached

TIE_TOL = 1e-9
DEFAULT_STATE_CAP = 5_000_000


class MeasurementProcess(Protocol):
    initial_state: Hashable

    def measurement_set(self, k: int, x: Hashable) -> Sequence[Hashable]: ...

    def outcome_distribution(self, k: int, x: Hashable, u: Hashable) -> OutcomeDistribution: ...

    def transition(self, k: int, x: Hashable, u: Hashable, m: Hashable) -> Hashable: ...

    def terminal_entropy(self, x: Hashable) -> float: ...


def state_cap(cap: int | None = None) -> int:
    """Resolve the reachable-state cap: explicit value, then ``INFOPLAN_STATE_CAP``."""
    if cap is not None:
        return int(cap)
    env = os.environ.get("INFOPLAN_STATE_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ModelError(f"INFOPLAN_STATE_CAP must be an integer, got {env!r}") from None
    return DEFAULT_STATE_CAP


def argmax_set(scored: Sequence[tuple[Any, float]], tol: float = TIE_TOL) -> tuple[float, tuple]:
    """Best score and every candidate within *tol* of it, in input order."""
    best = max(v for _, v in scored)
    return best, tuple(c for c, v in scored if v >= best - tol)


@dataclass
class Solution:
    """Values and argmax sets from :func:`solve`.

    ``values[k]`` maps each reachable stage-``k`` state to its value in bits
    (``values[N]`` holds terminal entropies); ``policy[k]`` maps each
    stage-``k`` state to the tuple of all maximizing measurements.
    """

    horizon: int
    initial_state: Hashable
    values: list[dict] = field(repr=False)
    policy: list[dict] = field(repr=False)

    @property
    def value(self) -> float:
        return self.values[0][self.initial_state]

    def argmax(self, k: int, x: Hashable) -> tuple:
        return self.policy[k][x]

    @property
    def n_states(self) -> int:
        return sum(len(v) for v in self.values)


def _successors(proc, k, x, u):
    dist = proc.outcome_distribution(k, x, u)
    return [(p, information_content(p), m) for m, p in dist.support()]


def bellman_backup(
    proc: MeasurementProcess, k: int, x: Hashable, J_next: Mapping[Hashable, float]
) -> tuple[float, tuple]:
    """One application of the recurrence at stage *k*, state *x*.

    Returns the maximal expected information content plus continuation value
    and the full tuple of maximizing measurements (ties within ``TIE_TOL``).
    """
    controls = list(proc.measurement_set(k, x))
    if not controls:
        raise ModelError(f"empty measurement set at stage {k}, state {x!r}")
    scored = []
    for u in controls:
        total = 0.0
        for p, h, m in _successors(proc, k, x, u):
            nxt = proc.transition(k, x, u, m)
            try:
                cont = J_next[nxt]
            except KeyError:
                raise ConsistencyError(
                    f"successor {nxt!r} of state {x!r} (u={u!r}, m={m!r}) missing at stage {k + 1}"
                ) from None
            total += p * (h + cont)
        scored.append((u, total))
    return argmax_set(scored)


def reachable_states(proc: MeasurementProcess, horizon: int, cap: int | None = None) -> list[set]:
    """Forward pass: the states reachable at each stage ``0..horizon``."""
    cap = state_cap(cap)
    layers = [{proc.initial_state}]
    count = 1
    for k in range(horizon):
        nxt = set()
        for x in layers[k]:
            controls = proc.measurement_set(k, x)
            if not controls:
                raise ModelError(f"empty measurement set at stage {k}, state {x!r}")
            for u in controls:
                for m, _ in proc.outcome_distribution(k, x, u).support():
                    nxt.add(proc.transition(k, x, u, m))
        count += len(nxt)
        if count > cap:
            raise ResourceError(
                f"reachable state count exceeds cap {cap} at stage {k + 1}", cap=cap
            )
        layers.append(nxt)
    return layers


def solve(proc: MeasurementProcess, horizon: int, cap: int | None = None) -> Solution:
    """Backward induction over the states reachable from ``proc.initial_state``."""
    if horizon < 1:
        raise ModelError(f"horizon must be >= 1, got {horizon}")
    layers = reachable_states(proc, horizon, cap)
    values: list[dict] = [dict() for _ in range(horizon + 1)]
    policy: list[dict] = [dict() for _ in range(horizon)]
    values[horizon] = {x: float(proc.terminal_entropy(x)) for x in layers[horizon]}
    for k in range(horizon - 1, -1, -1):
        J_next = values[k + 1]
        vk, pk = values[k], policy[k]
        # sorted by repr only to make dict iteration order reproducible
        for x in sorted(layers[k], key=repr):
            vk[x], pk[x] = bellman_backup(proc, k, x, J_next)
    return Solution(horizon, proc.initial_state, values, policy)


def min_stages_for_information(
    proc: MeasurementProcess, target: float, max_stages: int, cap: int | None = None
) -> int:
    """Smallest horizon whose optimal value reaches *target* bits.

    Re-solves with horizons ``1, 2, ...`` and stops at the first that
    attains ``target - TIE_TOL``. Raises :class:`TargetNotReached` carrying
    the best value seen if none up to *max_stages* does.
    """
    if not target > 0:
        raise ModelError(f"target must be positive, got {target!r}")
    if max_stages < 1:
        raise ModelError(f"max_stages must be >= 1, got {max_stages}")
    best = float("-inf")
    for n in range(1, max_stages + 1):
        value = solve(proc, n, cap).value
        best = max(best, value)
        if value >= target - TIE_TOL:
            return n
    raise TargetNotReached(
        f"target {target:.6f} bits not reached within {max_stages} stages "
        f"(best {best:.6f} bits)",
        best=best,
        stages=max_stages,
    )
