"""Find the single heavy ball among ``n`` with a two-pan balance.

State: number of candidate balls. Measurement: how many balls go on the
pans (even, split equally). Outcomes: left heavier, right heavier, balanced.
"""
from __future__ import annotations

from ..entropy import OutcomeDistribution
from ..errors import ModelError

LEFT, RIGHT, BALANCED = "left-heavier", "right-heavier", "balanced"


def admissible_weighings(x: int) -> tuple[int, ...]:
    """Even pan loads ``2, 4, ...`` up to *x* (or ``x - 1`` when *x* is odd).

    A resolved state (one candidate) only admits the empty weighing ``0``.
    """
    if x >= 2:
        return tuple(range(2, x + 1, 2))
    return (0,)


class WeighingModel:
    def __init__(self, n: int):
        if int(n) != n or n < 2:
            raise ModelError(f"weighing needs n >= 2 balls, got {n!r}")
        self.n = int(n)
        self.initial_state = self.n

    def __repr__(self):
        return f"WeighingModel(n={self.n})"

    def measurement_set(self, k, x):
        return admissible_weighings(x)

    def _check(self, x, u):
        if u not in admissible_weighings(x):
            raise ModelError(f"weighing {u!r} balls is not admissible with {x!r} candidates")

    def outcome_distribution(self, k, x, u):
        self._check(x, u)
        side = u / (2 * x)
        return OutcomeDistribution([(LEFT, side), (RIGHT, side), (BALANCED, (x - u) / x)])

    def transition(self, k, x, u, m):
        self._check(x, u)
        if m in (LEFT, RIGHT):
            return u // 2
        if m == BALANCED:
            return x - u
        raise ModelError(f"unknown weighing outcome {m!r}")

    def terminal_entropy(self, x):
        return 0.0


def weighing_model(n: int) -> WeighingModel:
    return WeighingModel(n)


def weighings_needed(n: int) -> int:
    """``ceil(log2 n / log2 3)`` computed exactly: the least ``k`` with ``3**k >= n``."""
    k, reach = 0, 1
    while reach < n:
        k += 1
        reach *= 3
    return k
