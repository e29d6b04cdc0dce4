"""On-line planning by rollout over a coupled agent/measurement process.

The generic part works on any coupled process (see :mod:`infoplan.agent_dp`).
At each stage every admissible pair of agent control and measurement is
scored by its immediate information plus the information a base policy
collects when simulated to the horizon; the best pair is applied.

The base policy looks one stage ahead with single sampled outcomes. The
lookahead leaf adds the terminal entropy of the sampled state, so that a
measurement ending in an absorbing state is credited with the information
still owed there.

The second half specializes to the submarine search, where the only random
quantity is the sonar outcome and the guaranteed-find analysis fixes it to
"not found". There the value of a plan reduces to the number of cells it
sweeps, and the search loops run in :mod:`infoplan.kernels`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from . import kernels
from .dp import TIE_TOL
from .domains.submarine import TIE_BREAKS, Grid, submarine_process
from .entropy import OutcomeDistribution, information_content
from .errors import ConsistencyError, ModelError, ResourceError

StopRule = Callable[[int, Hashable, Hashable], bool]
OutcomeRule = Callable[[int, Hashable, Hashable, OutcomeDistribution], Hashable]


@dataclass(frozen=True)
class RolloutConfig:
    """Settings shared by the rollout and base-policy drivers.

    Parameters
    ----------
    horizon : int
        Stage count N; continuations are simulated up to stage N.
    samples_per_control : int
        Monte Carlo repetitions per candidate when the continuation is random.
    rng_seed : int
        Seed for every random stream used by a run.
    tie_break : str
        ``"first-in-enumeration"`` keeps the model's control order,
        ``"lowest-control-id"`` sorts candidates first.
    step_cap : int, optional
        Largest number of stages a driver may take; defaults to *horizon*.
    """

    horizon: int
    samples_per_control: int = 1
    rng_seed: int = 0
    tie_break: str = "first-in-enumeration"
    step_cap: int | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ModelError(f"horizon must be >= 1, got {self.horizon}")
        if self.samples_per_control < 1:
            raise ModelError(f"samples_per_control must be >= 1, got {self.samples_per_control}")
        if self.tie_break not in TIE_BREAKS:
            raise ModelError(f"unknown tie_break {self.tie_break!r}")
        if self.step_cap is None:
            object.__setattr__(self, "step_cap", self.horizon)
        elif self.step_cap < self.horizon:
            raise ModelError(f"step_cap {self.step_cap} is below horizon {self.horizon}")


@dataclass(frozen=True)
class StageRecord:
    k: int
    position: Hashable
    state: Hashable
    move: Hashable
    measurement: Hashable
    outcome: Hashable
    bits: float
    coverage: int | None = None


@dataclass
class Trajectory:
    """Realized stages of one run.

    ``bits`` on each record is the information content of the realized
    outcome. ``move`` is None on a final record when the run ended before
    the agent needed to move.
    """

    records: list = field(default_factory=list)
    final_position: Hashable = None
    final_state: Hashable = None
    completed: bool = False
    reason: str = ""
    terminal_bits: float = 0.0

    def __len__(self):
        return len(self.records)

    @property
    def measurements(self) -> int:
        return len(self.records)

    @property
    def positions(self) -> list:
        return [r.position for r in self.records]

    @property
    def coverages(self) -> list:
        return [r.coverage for r in self.records]

    @property
    def total_bits(self) -> float:
        return math.fsum([r.bits for r in self.records] + [self.terminal_bits])

    def replay(self, proc) -> None:
        """Check every record against the model; raise ConsistencyError on a mismatch."""
        for rec, nxt in zip(self.records, self.records[1:] + [None]):
            x1 = proc.transition(rec.k, rec.state, rec.measurement, rec.outcome)
            p = proc.outcome_distribution(rec.k, rec.state, rec.measurement).probability(rec.outcome)
            if abs(information_content(p) - rec.bits) > TIE_TOL:
                raise ConsistencyError(f"stage {rec.k}: recorded bits disagree with the model")
            want_x = self.final_state if nxt is None else nxt.state
            if x1 != want_x:
                raise ConsistencyError(f"stage {rec.k}: state {want_x!r} != transition {x1!r}")
            if rec.move is None:
                if nxt is not None:
                    raise ConsistencyError(f"stage {rec.k}: missing move before a later stage")
                continue
            want_p = self.final_position if nxt is None else nxt.position
            dist = proc.disturbance_distribution(rec.k, rec.position, rec.move)
            reached = {proc.dynamics(rec.k, rec.position, rec.move, w) for w, _ in dist.support()}
            if want_p not in reached:
                raise ConsistencyError(f"stage {rec.k}: position {want_p!r} not reachable")


# generic rollout ------------------------------------------------------------


class _Sampler:
    """Draws from outcome distributions, remembering whether chance was used."""

    def __init__(self, rng):
        self.rng = rng
        self.drew = False

    def draw(self, dist: OutcomeDistribution):
        support = list(dist.support())
        if len(support) == 1:
            return support[0][0]
        self.drew = True
        r = self.rng.random()
        acc = 0.0
        for label, p in support:
            acc += p
            if r < acc:
                return label
        return support[-1][0]


def _realize(proc, k, x, u, sampler, outcome_rule):
    dist = proc.outcome_distribution(k, x, u)
    m = outcome_rule(k, x, u, dist) if outcome_rule else sampler.draw(dist)
    p = dist.probability(m)
    if p <= 0.0:
        raise ModelError(f"outcome rule chose {m!r}, which has probability 0")
    return m, information_content(p)


def _order(pairs, tie_break):
    if tie_break == "first-in-enumeration":
        return list(pairs)
    try:
        return sorted(pairs)
    except TypeError:
        return sorted(pairs, key=repr)


def candidate_pairs(proc, k, xp, x, tie_break="first-in-enumeration") -> list:
    """Admissible (agent control, measurement) pairs in tie-break order."""
    ups = proc.control_set(k, xp)
    us = proc.measurement_set(k, xp, x)
    if not ups or not us:
        raise ModelError(f"no admissible controls at stage {k} from {(xp, x)!r}")
    return _order(itertools.product(ups, us), tie_break)


def _first_best(scored):
    best = max(v for _, v in scored)
    for c, v in scored:
        if v >= best - TIE_TOL:
            return c, v


def generate_base_policy(
    proc,
    k: int,
    xp,
    x,
    rng,
    outcome_rule: OutcomeRule | None = None,
    tie_break: str = "first-in-enumeration",
):
    """Pick (u', u) by a two-stage lookahead on single sampled outcomes.

    For each candidate pair one disturbance and one outcome are drawn, then
    the best next measurement is added on its own sampled outcome, together
    with the terminal entropy of the state it leads to. The next-stage
    measurement itself is discarded.
    """
    sampler = rng if isinstance(rng, _Sampler) else _Sampler(rng)
    scored = []
    for up, u in candidate_pairs(proc, k, xp, x, tie_break):
        m, h0 = _realize(proc, k, x, u, sampler, outcome_rule)
        x1 = proc.transition(k, x, u, m)
        xp1 = proc.dynamics(k, xp, up, sampler.draw(proc.disturbance_distribution(k, xp, up)))
        best1 = -math.inf
        for u1 in proc.measurement_set(k + 1, xp1, x1):
            m1, h1 = _realize(proc, k + 1, x1, u1, sampler, outcome_rule)
            x2 = proc.transition(k + 1, x1, u1, m1)
            best1 = max(best1, h1 + proc.terminal_entropy(xp1, x2))
        if best1 == -math.inf:
            best1 = proc.terminal_entropy(xp1, x1)
        scored.append(((up, u), h0 + best1))
    return _first_best(scored)[0]


def _continue(proc, k, xp, x, horizon, sampler, stop, outcome_rule, tie_break):
    """Base-policy information from stage *k* until the horizon or the stop rule."""
    total = []
    while k < horizon and not (stop and stop(k, xp, x)):
        up, u = generate_base_policy(proc, k, xp, x, sampler, outcome_rule, tie_break)
        m, h = _realize(proc, k, x, u, sampler, outcome_rule)
        total.append(h)
        x = proc.transition(k, x, u, m)
        xp = proc.dynamics(k, xp, up, sampler.draw(proc.disturbance_distribution(k, xp, up)))
        k += 1
    total.append(proc.terminal_entropy(xp, x))
    return math.fsum(total)


def estimate_q(
    proc,
    k: int,
    xp,
    x,
    up,
    u,
    config: RolloutConfig,
    rng,
    stop: StopRule | None = None,
    outcome_rule: OutcomeRule | None = None,
) -> float:
    """Estimated information of applying (u', u) now and the base policy afterwards.

    The first stage is averaged exactly over its disturbance and outcome
    distributions (or uses *outcome_rule*); each continuation is averaged
    over ``samples_per_control`` simulations, or evaluated once when it
    turns out to involve no chance.
    """
    if k >= config.step_cap:
        raise ResourceError(f"stage {k} is beyond step_cap", cap=config.step_cap)
    dist_m = proc.outcome_distribution(k, x, u)
    if outcome_rule:
        m = outcome_rule(k, x, u, dist_m)
        branches_m = [(m, 1.0, information_content(dist_m.probability(m)))]
    else:
        branches_m = [(m, p, information_content(p)) for m, p in dist_m.support()]
    terms = []
    sampler = _Sampler(rng)
    for w, pw in proc.disturbance_distribution(k, xp, up).support():
        xp1 = proc.dynamics(k, xp, up, w)
        for m, pm, h in branches_m:
            x1 = proc.transition(k, x, u, m)
            runs = []
            for _ in range(config.samples_per_control):
                sampler.drew = False
                runs.append(
                    _continue(proc, k + 1, xp1, x1, config.horizon, sampler, stop,
                              outcome_rule, config.tie_break)
                )
                if not sampler.drew:
                    break
            terms.append(pw * pm * (h + math.fsum(runs) / len(runs)))
    return math.fsum(terms)


def _stage_rng(config, k, idx):
    return np.random.default_rng([config.rng_seed, k, idx])


def _drive(proc, start, config, stop, outcome_rule, choose):
    xp, x = start
    traj = Trajectory()
    for k in range(config.step_cap + 1):
        done = stop(k, xp, x) if stop else k >= config.horizon
        if done or k == config.step_cap:
            traj.final_position, traj.final_state = xp, x
            traj.completed = done
            traj.reason = "stop rule met" if done else "step cap reached"
            traj.terminal_bits = proc.terminal_entropy(xp, x)
            return traj
        up, u = choose(k, xp, x)
        sampler = _Sampler(_stage_rng(config, k, 2**31 - 1))
        m, h = _realize(proc, k, x, u, sampler, outcome_rule)
        cover = proc.coverage(xp, x, u) if hasattr(proc, "coverage") else None
        traj.records.append(StageRecord(k, xp, x, up, u, m, h, cover))
        x = proc.transition(k, x, u, m)
        xp = proc.dynamics(k, xp, up, sampler.draw(proc.disturbance_distribution(k, xp, up)))
    raise AssertionError("unreachable")


def run_rollout(
    proc,
    start: tuple,
    config: RolloutConfig,
    stop: StopRule | None = None,
    outcome_rule: OutcomeRule | None = None,
) -> Trajectory:
    """Rollout policy from ``start = (x'_0, x_0)``.

    Without *stop* the run ends at the horizon. A run that hits
    ``config.step_cap`` first returns with ``completed = False``.
    """

    def choose(k, xp, x):
        scored = []
        for idx, (up, u) in enumerate(candidate_pairs(proc, k, xp, x, config.tie_break)):
            q = estimate_q(proc, k, xp, x, up, u, config, _stage_rng(config, k, idx), stop, outcome_rule)
            scored.append(((up, u), q))
        return _first_best(scored)[0]

    return _drive(proc, start, config, stop, outcome_rule, choose)


def run_base_policy(
    proc,
    start: tuple,
    config: RolloutConfig,
    stop: StopRule | None = None,
    outcome_rule: OutcomeRule | None = None,
) -> Trajectory:
    """Let the base policy act directly, with no rollout layer."""

    def choose(k, xp, x):
        return generate_base_policy(proc, k, xp, x, _stage_rng(config, k, 0), outcome_rule, config.tie_break)

    return _drive(proc, start, config, stop, outcome_rule, choose)


# submarine search -----------------------------------------------------------


def base_policy_scores(grid: Grid, ship: int, mask: int) -> list[tuple[int, int]]:
    """``u_k + u_{k+1}`` for every admissible move, in the grid's move order."""
    here = (grid.sonar_bits[ship] & ~mask).bit_count()
    after = mask | grid.sonar_bits[ship]
    return [(d, here + (grid.sonar_bits[ship + d] & ~after).bit_count()) for d in grid.moves[ship]]


def base_policy_submarine(grid: Grid, k: int, ship: int, mask: int) -> int:
    """Move maximizing the coverage of this sweep plus the next one; first wins ties."""
    scores = base_policy_scores(grid, ship, mask)
    if not scores:
        raise ModelError(f"no admissible moves from cell {ship}")
    best = max(s for _, s in scores)
    return next(d for d, s in scores if s == best)


def search_target(grid: Grid) -> int:
    """Cells to search before the submarine's location is guaranteed."""
    return grid.n_cells - 1


def _tables(grid):
    cached = getattr(grid, "_packed", None)
    if cached is None:
        cached = kernels.pack_tables(grid)
        grid._packed = cached
    return cached


def _trajectory(grid, positions, covs, completed, reason):
    proc = submarine_process(grid)
    traj = Trajectory(completed=completed, reason=reason)
    mask = 0
    for k, (p, u) in enumerate(zip(positions, covs)):
        ship = p + 1
        dist = proc.outcome_distribution(k, mask, ship)
        m = proc.not_found(k, mask, ship, dist)
        move = positions[k + 1] - p if k + 1 < len(positions) else None
        traj.records.append(
            StageRecord(k, ship, mask, move, ship, m, information_content(dist.probability(m)), u)
        )
        mask = proc.transition(k, mask, ship, m)
    traj.final_state = mask
    traj.final_position = positions[-1] + 1 if positions else None
    traj.terminal_bits = proc.terminal_entropy(traj.final_position, mask)
    return traj


def greedy_search(grid: Grid, start: int, step_cap: int | None = None) -> Trajectory:
    """Base policy alone from cell *start* until n - 1 cells are searched.

    Defaults to ``step_cap = 2 * cells``; running out of steps is reported
    through ``completed = False``, not raised.
    """
    grid.coords(start)
    cap = 2 * grid.n_cells if step_cap is None else step_cap
    sonar, moves = _tables(grid)
    pos, covs, ok = kernels.greedy_run(sonar, moves, start - 1, cap, search_target(grid))
    return _trajectory(grid, pos, covs, ok, "stop rule met" if ok else "step cap reached")


def rollout_search(grid: Grid, start: int, horizon: int) -> Trajectory:
    """Rollout with base-policy continuations to *horizon* from cell *start*."""
    grid.coords(start)
    if horizon < 1:
        raise ModelError(f"horizon must be >= 1, got {horizon}")
    sonar, moves = _tables(grid)
    pos, covs, ok = kernels.rollout_run(sonar, moves, start - 1, horizon, search_target(grid))
    return _trajectory(grid, pos, covs, ok, "stop rule met" if ok else "horizon reached")


def min_rollout_measurements(
    grid: Grid, start: int, max_horizon: int | None = None
) -> tuple[int | None, Trajectory]:
    """Smallest horizon for which rollout from *start* finishes the search.

    Horizons are tried upward from the five-cells-per-sweep lower bound to
    *max_horizon* (default ``2 * cells``). Returns ``(None, last attempt)``
    when none succeeds.
    """
    target = search_target(grid)
    hi = 2 * grid.n_cells if max_horizon is None else max_horizon
    traj = None
    for n in range(max(1, -(-target // 5)), hi + 1):
        traj = rollout_search(grid, start, n)
        if traj.completed:
            return n, traj
    return None, traj


@dataclass
class GridSummary:
    """One grid's search result: per-start counts and the best start."""

    width: int
    height: int
    per_start: dict
    best_start: int | None
    measurements: int | None

    @property
    def cells(self) -> int:
        return self.width * self.height

    @property
    def percentage(self) -> float | None:
        """Measurements per searched cell (all but the last), in percent."""
        if self.measurements is None:
            return None
        return 100.0 * self.measurements / (self.cells - 1)

    @property
    def failed_starts(self) -> list:
        return [s for s, n in self.per_start.items() if n is None]


def summarize_grid(
    grid: Grid, policy: str = "rollout", starts: Sequence[int] | None = None
) -> GridSummary:
    """Measurement counts per start; the best is the lowest cell id reaching the minimum."""
    per_start = {}
    for s in grid.cells() if starts is None else starts:
        if policy == "rollout":
            per_start[s] = min_rollout_measurements(grid, s)[0]
        elif policy == "greedy":
            t = greedy_search(grid, s)
            per_start[s] = t.measurements if t.completed else None
        else:
            raise ModelError(f"unknown policy {policy!r}")
    done = {s: n for s, n in per_start.items() if n is not None}
    best = min(done, key=lambda s: (done[s], s)) if done else None
    return GridSummary(grid.width, grid.height, per_start, best, done.get(best))


def local_maxima(series: Sequence[float]) -> list[int]:
    """Interior indices where the series rises into a peak (plateaus count once)."""
    peaks = []
    i, n = 1, len(series)
    while i < n - 1:
        if series[i] > series[i - 1]:
            j = i
            while j + 1 < n and series[j + 1] == series[i]:
                j += 1
            if j + 1 < n and series[j + 1] < series[i]:
                peaks.append(i)
            i = j + 1
        else:
            i += 1
    return peaks


__all__ = [
    "GridSummary",
    "RolloutConfig",
    "StageRecord",
    "Trajectory",
    "base_policy_scores",
    "base_policy_submarine",
    "candidate_pairs",
    "estimate_q",
    "generate_base_policy",
    "greedy_search",
    "local_maxima",
    "min_rollout_measurements",
    "rollout_search",
    "run_base_policy",
    "run_rollout",
    "search_target",
    "summarize_grid",
]
