"""Guess an integer in ``[0, n)`` with yes/no interval questions.

State: size of the interval still consistent with the answers. Measurement:
size of the proper subinterval asked about.
"""
from __future__ import annotations

from ..entropy import OutcomeDistribution
from ..errors import ModelError

YES, NO = "yes", "no"


class GuessModel:
    def __init__(self, n: int):
        if int(n) != n or n < 2:
            raise ModelError(f"guess-my-number needs n >= 2, got {n!r}")
        self.n = int(n)
        self.initial_state = self.n

    def __repr__(self):
        return f"GuessModel(n={self.n})"

    def measurement_set(self, k, x):
        # a single surviving integer only admits the empty question
        return tuple(range(1, x)) if x >= 2 else (0,)

    def _check(self, x, u):
        if u not in self.measurement_set(0, x):
            raise ModelError(f"subinterval size {u!r} not admissible for interval size {x!r}")

    def outcome_distribution(self, k, x, u):
        self._check(x, u)
        return OutcomeDistribution([(YES, u / x), (NO, (x - u) / x)])

    def transition(self, k, x, u, m):
        self._check(x, u)
        if m == YES:
            return u
        if m == NO:
            return x - u
        raise ModelError(f"unknown answer {m!r}")

    def terminal_entropy(self, x):
        return 0.0


def guess_model(n: int) -> GuessModel:
    return GuessModel(n)


def questions_needed(n: int) -> int:
    """``ceil(log2 n)`` without floating point."""
    return (n - 1).bit_length()
