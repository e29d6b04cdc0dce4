"""Entropy-driven transect planning over Gaussian random fields.

A squared-exponential GP is conditioned incrementally: the Cholesky factor
of the Gram matrix over visited locations is extended one row per sample,
and each extension returns a new posterior object. Predictive variance (and
so entropy) depends only on where samples were taken, never on the values
observed, which lets the planner work on location histories alone.

Stage entropy is the differential entropy of the next noisy observation,
``gaussian_entropy(latent variance + noise variance)``. With this choice the
stage entropies along a path add up exactly to the joint entropy of the
noisy observations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from .dp import TIE_TOL
from .entropy import gaussian_entropy
from .errors import ModelError, NumericalError
from .rollout import RolloutConfig

VAR_CLAMP = 1e-9
LOG2_2PIE = math.log2(2.0 * math.pi * math.e)
MODES = ("deterministic", "stochastic", "multi-field")
LOOKAHEADS = ("rollout", "exhaustive")


def _points(locs) -> np.ndarray:
    a = np.asarray(locs, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1)
    return a


def _point(loc) -> np.ndarray:
    """One location as a (1, d) array; scalars are 1-D points."""
    return np.atleast_1d(np.asarray(loc, dtype=float)).reshape(1, -1)


@dataclass(frozen=True)
class SEKernel:
    """Squared-exponential covariance with additive observation noise."""

    length_scale: float
    signal_variance: float = 1.0
    noise_variance: float = 0.0

    def __post_init__(self):
        if not self.length_scale > 0 or not self.signal_variance > 0:
            raise ModelError("length_scale and signal_variance must be positive")
        if not self.noise_variance >= 0:
            raise ModelError("noise_variance must be non-negative")

    def __call__(self, a, b) -> np.ndarray:
        a, b = _points(a), _points(b)
        d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
        return self.signal_variance * np.exp(-0.5 * d2 / self.length_scale**2)

    @property
    def kappa(self) -> float:
        return self.signal_variance

    def gram(self, locs) -> np.ndarray:
        pts = _points(locs)
        return self(pts, pts) + self.noise_variance * np.eye(len(pts))


class GPPosterior:
    """Posterior over a field given sample locations; extend() returns a new object.

    With *window* set, a query is conditioned only on the locations within
    that distance of it.
    """

    def __init__(self, kernel: SEKernel, locations=(), window: float | None = None):
        self.kernel = kernel
        self.window = window
        self.locations = _points(locations) if len(locations) else np.zeros((0, 0))
        self._chol = np.zeros((0, 0))
        if len(self.locations):
            self._chol = self._factor(self.locations)

    @classmethod
    def _from_parts(cls, kernel, locations, chol, window):
        gp = cls.__new__(cls)
        gp.kernel, gp.locations, gp._chol, gp.window = kernel, locations, chol, window
        return gp

    def __len__(self):
        return len(self.locations)

    def _factor(self, pts):
        gp = GPPosterior(self.kernel, window=self.window)
        for p in pts:
            gp = gp.extend(p)
        return gp._chol

    def extend(self, location) -> "GPPosterior":
        """Posterior with one more sample location (rank-one Cholesky append)."""
        x = _point(location)
        if len(self.locations) and x.shape[1] != self.locations.shape[1]:
            raise ModelError("location dimension does not match history")
        c = float(self.kernel.gram(x)[0, 0])
        n = len(self.locations)
        if n == 0:
            locs = x
            l = np.zeros(0)
        else:
            p = self.kernel(self.locations, x)[:, 0]
            l = solve_triangular(self._chol, p, lower=True, check_finite=False)
            locs = np.vstack([self.locations, x])
        d2 = c - l @ l
        if not d2 > 1e-12 * c:
            j = int(np.argmin(((self.locations - x) ** 2).sum(axis=1))) if n else 0
            raise NumericalError(
                f"Gram matrix not positive definite: location {tuple(x[0])} "
                f"duplicates location {j} {tuple(self.locations[j]) if n else ()}"
            )
        chol = np.zeros((n + 1, n + 1))
        chol[:n, :n] = self._chol
        chol[n, :n] = l
        chol[n, n] = math.sqrt(d2)
        return GPPosterior._from_parts(self.kernel, locs, chol, self.window)

    def _conditioning(self, q):
        if self.window is None or not len(self.locations):
            return self.locations, self._chol
        keep = np.sqrt(((self.locations - q) ** 2).sum(axis=1)) <= self.window
        if keep.all():
            return self.locations, self._chol
        sub = self.locations[keep]
        if not len(sub):
            return sub, np.zeros((0, 0))
        return sub, GPPosterior(self.kernel, sub)._chol

    def _solve(self, q):
        locs, chol = self._conditioning(q)
        if not len(locs):
            return locs, chol, np.zeros(0)
        p = self.kernel(locs, q)[:, 0]
        return locs, chol, solve_triangular(chol, p, lower=True, check_finite=False)

    def variance(self, query) -> float:
        """Latent predictive variance at *query*, clamped at zero."""
        q = _point(query)
        _, _, v = self._solve(q)
        var = self.kernel.kappa - v @ v
        if var < -VAR_CLAMP:
            raise NumericalError(f"negative predictive variance {var:.3e}")
        return max(var, 0.0)

    def predict(self, outcomes: Sequence[float], query) -> tuple[float, float]:
        q = _point(query)
        y = np.asarray(outcomes, dtype=float)
        if y.shape != (len(self.locations),):
            raise ModelError(f"expected {len(self.locations)} outcomes, got {y.shape}")
        locs, chol, v = self._solve(q)
        var = self.kernel.kappa - v @ v
        if var < -VAR_CLAMP:
            raise NumericalError(f"negative predictive variance {var:.3e}")
        if not len(locs):
            return 0.0, max(var, 0.0)
        if len(locs) != len(self.locations):
            keep = np.sqrt(((self.locations - q) ** 2).sum(axis=1)) <= self.window
            y = y[keep]
        alpha = solve_triangular(chol, y, lower=True, check_finite=False)
        return float(v @ alpha), max(var, 0.0)


def posterior(gp: GPPosterior, outcomes: Sequence[float], query) -> tuple[float, float]:
    """Predictive mean and latent variance at *query*."""
    return gp.predict(outcomes, query)


def stage_entropy(gp: GPPosterior, query) -> float:
    """Differential entropy (bits) of a noisy observation at *query*."""
    var = gp.variance(query) + gp.kernel.noise_variance
    if var <= 0.0:
        raise NumericalError(f"predictive variance vanished at {query!r}")
    return gaussian_entropy(var)


def joint_path_entropy(kernel: SEKernel, path) -> float:
    """Joint differential entropy of noisy observations along *path*, via log-det."""
    pts = _points(path)
    if not len(pts):
        raise ModelError("path must be non-empty")
    try:
        L = np.linalg.cholesky(kernel.gram(pts))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Gram matrix over path not positive definite: {exc}") from None
    logdet2 = 2.0 * np.log2(np.diag(L)).sum()
    return float(0.5 * (len(pts) * LOG2_2PIE + logdet2))


# planning ------------------------------------------------------------------


def exactly_one(n_fields: int) -> tuple[tuple[int, ...], ...]:
    """Selection set allowing one sensor per stage."""
    return tuple(tuple(int(i == j) for i in range(n_fields)) for j in range(n_fields))


@dataclass
class TransectProblem:
    """Candidate waypoints, agent moves and the fields to be sensed.

    Parameters
    ----------
    lattice : sequence of positions
        Candidate waypoints (scalars for 1-D, tuples otherwise).
    moves : sequence of displacements
        Agent controls; only those landing on a waypoint are admissible.
    fields : sequence of SEKernel
        One kernel per random field.
    horizon : int
        Number of samples N to plan.
    mode : str
        ``"deterministic"``, ``"stochastic"`` (moves slip with probability
        *slip* to another admissible waypoint, uniformly) or ``"multi-field"``.
    selections : sequence of 0/1 tuples, optional
        Allowed sensor selections per stage in multi-field mode; defaults to
        all sensors on.
    history : sequence of positions
        Locations already sampled before planning starts.
    window : float, optional
        Conditioning radius passed to every posterior.
    """

    lattice: Sequence
    moves: Sequence
    fields: Sequence[SEKernel]
    horizon: int
    mode: str = "deterministic"
    slip: float = 0.0
    selections: Sequence[tuple[int, ...]] | None = None
    history: Sequence = ()
    window: float | None = None
    _pts: np.ndarray = field(init=False, repr=False)
    _succ: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ModelError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.horizon < 1:
            raise ModelError("horizon must be >= 1")
        if isinstance(self.fields, SEKernel):
            self.fields = (self.fields,)
        self.fields = tuple(self.fields)
        if not self.fields:
            raise ModelError("at least one field kernel is required")
        if self.mode != "multi-field" and len(self.fields) != 1:
            raise ModelError(f"{self.mode} mode takes exactly one field")
        if not 0.0 <= self.slip < 1.0:
            raise ModelError("slip must be in [0, 1)")
        if self.mode != "stochastic" and self.slip:
            raise ModelError("slip is only meaningful in stochastic mode")
        nf = len(self.fields)
        sels = self.selections or ((1,) * nf,)
        for s in sels:
            if len(s) != nf or any(v not in (0, 1) for v in s) or not any(s):
                raise ModelError(f"invalid sensor selection {s!r}")
        self.selections = tuple(tuple(s) for s in sels)
        self._pts = _points(self.lattice)
        if len(np.unique(self._pts, axis=0)) != len(self._pts):
            raise ModelError("lattice waypoints must be distinct")
        moves = _points(self.moves)
        if moves.shape[1] != self._pts.shape[1]:
            raise ModelError("move dimension does not match lattice")
        index = {tuple(np.round(p, 9)): i for i, p in enumerate(self._pts)}
        self._succ = [
            [index[key] for d in moves if (key := tuple(np.round(p + d, 9))) in index]
            for p in self._pts
        ]

    @classmethod
    def line(cls, n: int, spacing: float = 1.0, max_step: int = 1, **kw) -> "TransectProblem":
        """Evenly spaced 1-D lattice; moves of up to *max_step* waypoints either way."""
        steps = [s * spacing for s in range(-max_step, max_step + 1) if s]
        return cls(lattice=[i * spacing for i in range(n)], moves=steps, **kw)

    @property
    def n_waypoints(self) -> int:
        return len(self._pts)

    def position(self, i: int) -> tuple:
        return tuple(float(v) for v in self._pts[i])

    def index_of(self, position) -> int:
        q = _point(position)[0]
        hits = np.flatnonzero(np.all(np.isclose(self._pts, q, atol=1e-9), axis=1))
        if not len(hits):
            raise ModelError(f"{position!r} is not a lattice waypoint")
        return int(hits[0])

    @property
    def forbids_revisits(self) -> bool:
        return any(f.noise_variance == 0.0 for f in self.fields)

    def successors(self, i: int, visited: frozenset = frozenset()) -> list[int]:
        """Admissible next waypoints from *i* (in move order)."""
        out = self._succ[i]
        if self.forbids_revisits:
            out = [j for j in out if j not in visited]
        return out

    def landing(self, i: int, j: int, visited: frozenset) -> list[tuple[int, float]]:
        """Distribution of the waypoint actually reached when aiming for *j*."""
        if self.mode != "stochastic" or self.slip == 0.0:
            return [(j, 1.0)]
        others = [s for s in self.successors(i, visited) if s != j]
        if not others:
            return [(j, 1.0)]
        return [(j, 1.0 - self.slip)] + [(s, self.slip / len(others)) for s in others]

    def priors(self) -> tuple[GPPosterior, ...]:
        gps = []
        for f in self.fields:
            gp = GPPosterior(f, window=self.window)
            for h in self.history:
                gp = gp.extend(h)
            gps.append(gp)
        return tuple(gps)


@dataclass
class GPTrajectory:
    """Planned sample locations with per-stage entropies.

    ``joint_bits`` is the log-det cross-check of ``total_bits`` for
    single-field problems (None in multi-field mode).
    """

    start: tuple
    path: list
    selections: list
    stage_bits: list
    joint_bits: float | None = None

    @property
    def total_bits(self) -> float:
        return math.fsum(self.stage_bits)


def _stage_value(problem, gps, j):
    """Best selection and its weighted entropy for sampling waypoint *j*."""
    q = problem._pts[j]
    hs = [stage_entropy(gp, q) for gp in gps]
    best = None
    for s in problem.selections:
        v = math.fsum(h for h, on in zip(hs, s) if on)
        if best is None or v > best[1] + TIE_TOL:
            best = (s, v)
    return best


def _extend_all(gps, problem, j):
    q = problem._pts[j]
    return tuple(gp.extend(q) for gp in gps)


def _has_path(problem, i, visited, steps):
    """Whether *steps* more admissible moves exist from *i*."""
    if steps == 0:
        return True
    return any(_has_path(problem, j, visited | {j}, steps - 1) for j in problem.successors(i, visited))


def _greedy_next(problem, gps, i, visited, steps=1):
    """Highest-entropy successor that still leaves a path of *steps* - 1 moves."""
    best = None
    for j in problem.successors(i, visited):
        if not _has_path(problem, j, visited | {j}, steps - 1):
            continue
        v = _stage_value(problem, gps, j)[1]
        if best is None or v > best[1] + TIE_TOL:
            best = (j, v)
    return None if best is None else best[0]


def _draw(outcomes, rng):
    if len(outcomes) == 1:
        return outcomes[0][0], False
    r, acc = rng.random(), 0.0
    for j, p in outcomes:
        acc += p
        if r < acc:
            return j, True
    return outcomes[-1][0], True


def _rollout_tail(problem, gps, i, visited, steps, rng):
    total, drew = [], False
    for left in range(steps, 0, -1):
        j = _greedy_next(problem, gps, i, visited, left)
        if j is None:
            return -math.inf, drew
        j, d = _draw(problem.landing(i, j, visited), rng)
        drew |= d
        total.append(_stage_value(problem, gps, j)[1])
        gps, i, visited = _extend_all(gps, problem, j), j, visited | {j}
    return math.fsum(total), drew


def _optimal_tail(problem, gps, i, visited, steps):
    """Exact value-to-go by enumerating the remaining decisions."""
    if steps == 0:
        return 0.0
    best = None
    for j in problem.successors(i, visited):
        v = math.fsum(
            p * (_stage_value(problem, gps, s)[1]
                 + _optimal_tail(problem, _extend_all(gps, problem, s), s, visited | {s}, steps - 1))
            for s, p in problem.landing(i, j, visited)
        )
        if best is None or v > best:
            best = v
    return -math.inf if best is None else best


def plan_transect(
    problem: TransectProblem,
    start,
    config: RolloutConfig | None = None,
    lookahead: str = "rollout",
) -> GPTrajectory:
    """Plan ``problem.horizon`` sample locations from *start*.

    Each stage scores every admissible waypoint by its stage entropy plus a
    value-to-go: a greedy base policy simulated to the horizon (``"rollout"``,
    slips sampled ``samples_per_control`` times) or the exact optimum
    (``"exhaustive"``). The start itself is not sampled.
    """
    if lookahead not in LOOKAHEADS:
        raise ModelError(f"unknown lookahead {lookahead!r}")
    config = config or RolloutConfig(horizon=problem.horizon)
    if config.horizon != problem.horizon:
        raise ModelError("config.horizon must equal problem.horizon")
    i = problem.index_of(start)
    gps = problem.priors()
    visited = frozenset(problem.index_of(h) for h in problem.history)
    traj = GPTrajectory(problem.position(i), [], [], [])
    for k in range(problem.horizon):
        if k >= config.step_cap:
            break
        cands = problem.successors(i, visited)
        if not cands:
            raise ModelError(f"no admissible waypoint from {problem.position(i)} at stage {k}")
        scored = []
        for idx, j in enumerate(cands):
            rng = np.random.default_rng([config.rng_seed, k, idx])
            terms = []
            for s, p in problem.landing(i, j, visited):
                g1, v1 = _extend_all(gps, problem, s), visited | {s}
                now = _stage_value(problem, gps, s)[1]
                rest = problem.horizon - k - 1
                if lookahead == "exhaustive":
                    tail = _optimal_tail(problem, g1, s, v1, rest)
                else:
                    runs = []
                    for _ in range(config.samples_per_control):
                        val, drew = _rollout_tail(problem, g1, s, v1, rest, rng)
                        runs.append(val)
                        if not drew:
                            break
                    tail = math.fsum(runs) / len(runs)
                terms.append(p * (now + tail))
            scored.append((j, math.fsum(terms)))
        best = max(v for _, v in scored)
        if best == -math.inf:
            raise ModelError(f"no admissible path of length {problem.horizon} from {traj.start}")
        if config.tie_break == "lowest-control-id":
            scored.sort(key=lambda t: t[0])
        aim = next(j for j, v in scored if v >= best - TIE_TOL)  # first maximiser
        j, _ = _draw(problem.landing(i, aim, visited), np.random.default_rng([config.rng_seed, k, 2**31 - 1]))
        sel, val = _stage_value(problem, gps, j)
        traj.path.append(problem.position(j))
        traj.selections.append(sel)
        traj.stage_bits.append(val)
        gps, i, visited = _extend_all(gps, problem, j), j, visited | {j}
    if problem.mode != "multi-field":
        kern = problem.fields[0]
        hist = [problem._pts[problem.index_of(h)] for h in problem.history]
        joint = joint_path_entropy(kern, hist + [problem._pts[problem.index_of(p)] for p in traj.path])
        traj.joint_bits = joint - (joint_path_entropy(kern, hist) if hist else 0.0)
    return traj


def brute_force_transect(problem: TransectProblem, start) -> tuple[float, list]:
    """Best total entropy over all admissible paths and the paths attaining it.

    Deterministic single-field problems only; each path is scored with
    :func:`joint_path_entropy`, independently of the sequential posterior.
    """
    if problem.mode != "deterministic":
        raise ModelError("the path oracle covers deterministic mode only")
    kern = problem.fields[0]
    i0 = problem.index_of(start)
    hist = [problem._pts[problem.index_of(h)] for h in problem.history]
    base = joint_path_entropy(kern, hist) if hist else 0.0
    visited0 = frozenset(problem.index_of(h) for h in problem.history)
    scored = []

    def walk(i, path, visited):
        if len(path) == problem.horizon:
            pts = hist + [problem._pts[j] for j in path]
            scored.append((tuple(problem.position(j) for j in path), joint_path_entropy(kern, pts) - base))
            return
        for j in problem.successors(i, visited):
            walk(j, path + [j], visited | {j})

    walk(i0, [], visited0)
    if not scored:
        raise ModelError("no admissible path of the requested length")
    best = max(v for _, v in scored)
    return best, [p for p, v in scored if v >= best - TIE_TOL]


__all__ = [
    "GPPosterior",
    "GPTrajectory",
    "SEKernel",
    "TransectProblem",
    "brute_force_transect",
    "exactly_one",
    "joint_path_entropy",
    "plan_transect",
    "posterior",
    "stage_entropy",
]
