"""Finite distributions, Shannon information content and entropies (in bits)."""
from __future__ import annotations

import math
from typing import Hashable, Iterable, Iterator

from .errors import ModelError

PROB_TOL = 1e-9


class OutcomeDistribution:
    """A finite distribution over distinct, hashable outcome labels.

    Probabilities within ``PROB_TOL`` of summing to one are renormalized;
    anything further off is rejected. Zero-probability outcomes are kept so
    callers can see them, but :meth:`support` skips them.
    """

    __slots__ = ("_outcomes",)

    def __init__(self, outcomes: Iterable[tuple[Hashable, float]]):
        pairs = [(label, float(p)) for label, p in outcomes]
        if not pairs:
            raise ModelError("empty outcome distribution")
        labels = [label for label, _ in pairs]
        if len(set(labels)) != len(labels):
            raise ModelError(f"duplicate outcome labels in {labels!r}")
        for label, p in pairs:
            if not (p >= 0.0) or math.isinf(p):
                raise ModelError(f"invalid probability {p!r} for outcome {label!r}")
        total = math.fsum(p for _, p in pairs)
        if abs(total - 1.0) > PROB_TOL:
            raise ModelError(f"probabilities sum to {total!r}, not 1")
        self._outcomes = tuple((label, p / total) for label, p in pairs)

    @classmethod
    def point_mass(cls, label: Hashable) -> "OutcomeDistribution":
        return cls([(label, 1.0)])

    @classmethod
    def uniform(cls, labels: Iterable[Hashable]) -> "OutcomeDistribution":
        labels = list(labels)
        return cls((label, 1.0 / len(labels)) for label in labels)

    @property
    def outcomes(self) -> tuple[tuple[Hashable, float], ...]:
        return self._outcomes

    def support(self) -> Iterator[tuple[Hashable, float]]:
        return ((label, p) for label, p in self._outcomes if p > 0.0)

    @property
    def is_point_mass(self) -> bool:
        return sum(1 for _ in self.support()) == 1

    def probability(self, label: Hashable) -> float:
        for other, p in self._outcomes:
            if other == label:
                return p
        return 0.0

    def __len__(self) -> int:
        return len(self._outcomes)

    def __iter__(self):
        return iter(self._outcomes)

    def __repr__(self) -> str:
        body = ", ".join(f"{label!r}: {p:.6g}" for label, p in self._outcomes)
        return f"OutcomeDistribution({{{body}}})"


def information_content(p: float) -> float:
    """Shannon information content ``log2(1/p)`` of an outcome of probability *p*."""
    if not (0.0 < p <= 1.0 + PROB_TOL):
        raise ModelError(f"information content needs 0 < p <= 1, got {p!r}")
    return -math.log2(min(p, 1.0))


def entropy(d: OutcomeDistribution | Iterable[float]) -> float:
    """Entropy in bits, with 0 log 0 taken as 0.

    Accepts an :class:`OutcomeDistribution` or a bare sequence of
    probabilities (validated the same way).
    """
    if not isinstance(d, OutcomeDistribution):
        d = OutcomeDistribution(enumerate(d))
    h = math.fsum(p * information_content(p) for _, p in d.support())
    return h + 0.0  # normalizes -0.0


def gaussian_entropy(variance: float) -> float:
    """Differential entropy ``0.5*log2(2*pi*e*variance)`` of a Gaussian, in bits."""
    if not (variance > 0.0) or math.isinf(variance):
        raise ModelError(f"gaussian entropy needs a positive finite variance, got {variance!r}")
    return 0.5 * math.log2(2.0 * math.pi * math.e * variance)
