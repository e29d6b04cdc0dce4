"""Pure-Python submarine search loops, mirroring the compiled kernel."""
from __future__ import annotations

SONAR = 5
MOVES = 8


def _sweep(sonar, s, p):
    k = 0
    for c in sonar[p * SONAR:(p + 1) * SONAR]:
        if c < 0:
            break
        if not s[c]:
            s[c] = 1
            k += 1
    return k


def coverage(sonar, searched, p):
    k = 0
    for c in sonar[p * SONAR:(p + 1) * SONAR]:
        if c < 0:
            break
        if not searched[c]:
            k += 1
    return k


def base_move(sonar, moves, searched, p):
    best, bd = -1, -1
    for d in moves[p * MOVES:(p + 1) * MOVES]:
        if d < 0:
            break
        v = coverage(sonar, searched, d)
        if v > best:
            best, bd = v, d
    return bd


def _simulate(sonar, moves, s, p, steps, cnt, target):
    for i in range(steps):
        cnt += _sweep(sonar, s, p)
        if cnt >= target:
            return target
        if i < steps - 1:
            p = base_move(sonar, moves, s, p)
    return min(cnt, target)


def simulate(sonar, moves, searched, p, steps, cnt, target):
    """Cells searched after *steps* base-policy sweeps from *p*, capped at *target*."""
    return _simulate(sonar, moves, bytearray(searched), p, steps, cnt, target)


def greedy_run(sonar, moves, start, max_steps, target):
    """Drive the base policy from *start*; returns (positions, coverages, completed)."""
    s = bytearray(len(sonar) // SONAR)
    p, cnt = start, 0
    positions, covs = [], []
    for _ in range(max_steps):
        u = _sweep(sonar, s, p)
        cnt += u
        positions.append(p)
        covs.append(u)
        if cnt >= target:
            return positions, covs, True
        p = base_move(sonar, moves, s, p)
    return positions, covs, False


def rollout_run(sonar, moves, start, horizon, target):
    """One-step lookahead with base-policy continuation to *horizon*."""
    s = bytearray(len(sonar) // SONAR)
    p, cnt = start, 0
    positions, covs = [], []
    for k in range(horizon):
        u = _sweep(sonar, s, p)
        cnt += u
        positions.append(p)
        covs.append(u)
        if cnt >= target:
            return positions, covs, True
        if k == horizon - 1:
            break
        best, bd = -1, -1
        for d in moves[p * MOVES:(p + 1) * MOVES]:
            if d < 0:
                break
            v = _simulate(sonar, moves, bytearray(s), d, horizon - 1 - k, cnt, target)
            if v > best:
                best, bd = v, d
        p = bd
    return positions, covs, False
