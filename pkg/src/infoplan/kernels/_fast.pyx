# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled submarine search loops.

Tables are flat ``int`` buffers: ``sonar`` has stride 5 and ``moves`` stride
8, both padded with -1. Cells are zero-based here. Semantics match
``_pure`` exactly; the test-suite checks the two against each other.
"""
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset

DEF SONAR = 5
DEF MOVES = 8


cdef inline int _coverage(const int[:] sonar, const unsigned char* s, int p) nogil:
    cdef int j, c, k = 0
    for j in range(SONAR):
        c = sonar[p * SONAR + j]
        if c < 0:
            break
        if not s[c]:
            k += 1
    return k


cdef inline int _sweep(const int[:] sonar, unsigned char* s, int p) nogil:
    cdef int j, c, k = 0
    for j in range(SONAR):
        c = sonar[p * SONAR + j]
        if c < 0:
            break
        if not s[c]:
            s[c] = 1
            k += 1
    return k


cdef inline int _base(const int[:] sonar, const int[:] moves, const unsigned char* s, int p) nogil:
    cdef int j, d, v, best = -1, bd = -1
    for j in range(MOVES):
        d = moves[p * MOVES + j]
        if d < 0:
            break
        v = _coverage(sonar, s, d)
        if v > best:
            best = v
            bd = d
    return bd


cdef int _simulate(const int[:] sonar, const int[:] moves, unsigned char* s,
                   int p, int steps, int cnt, int target) nogil:
    cdef int i
    for i in range(steps):
        cnt += _sweep(sonar, s, p)
        if cnt >= target:
            return target
        if i < steps - 1:
            p = _base(sonar, moves, s, p)
    return cnt if cnt < target else target


def coverage(const int[:] sonar, const unsigned char[:] searched, int p):
    cdef int j, c, k = 0
    for j in range(SONAR):
        c = sonar[p * SONAR + j]
        if c < 0:
            break
        if not searched[c]:
            k += 1
    return k


def base_move(const int[:] sonar, const int[:] moves, const unsigned char[:] searched, int p):
    return _base(sonar, moves, &searched[0], p)


def simulate(const int[:] sonar, const int[:] moves, const unsigned char[:] searched,
             int p, int steps, int cnt, int target):
    """Cells searched after *steps* base-policy sweeps from *p*, capped at *target*."""
    cdef int n = searched.shape[0]
    cdef unsigned char* s = <unsigned char*> malloc(n)
    try:
        memcpy(s, &searched[0], n)
        return _simulate(sonar, moves, s, p, steps, cnt, target)
    finally:
        free(s)


def greedy_run(const int[:] sonar, const int[:] moves, int start, int max_steps, int target):
    """Drive the base policy from *start*; returns (positions, coverages, completed)."""
    cdef int n = sonar.shape[0] // SONAR
    cdef int k, u, p = start, cnt = 0
    cdef unsigned char* s = <unsigned char*> malloc(n)
    positions, covs = [], []
    try:
        memset(s, 0, n)
        for k in range(max_steps):
            u = _sweep(sonar, s, p)
            cnt += u
            positions.append(p)
            covs.append(u)
            if cnt >= target:
                return positions, covs, True
            p = _base(sonar, moves, s, p)
        return positions, covs, False
    finally:
        free(s)


def rollout_run(const int[:] sonar, const int[:] moves, int start, int horizon, int target):
    """One-step lookahead with base-policy continuation to *horizon*.

    Each candidate destination is scored by the number of cells searched
    (capped at *target*) when the base policy runs from it until the
    horizon; the first maximiser in move order wins.
    """
    cdef int n = sonar.shape[0] // SONAR
    cdef int k, j, d, v, u, best, bd, p = start, cnt = 0
    cdef unsigned char* s = <unsigned char*> malloc(n)
    cdef unsigned char* t = <unsigned char*> malloc(n)
    positions, covs = [], []
    try:
        memset(s, 0, n)
        for k in range(horizon):
            u = _sweep(sonar, s, p)
            cnt += u
            positions.append(p)
            covs.append(u)
            if cnt >= target:
                return positions, covs, True
            if k == horizon - 1:
                break
            best = -1
            bd = -1
            with nogil:
                for j in range(MOVES):
                    d = moves[p * MOVES + j]
                    if d < 0:
                        break
                    memcpy(t, s, n)
                    v = _simulate(sonar, moves, t, d, horizon - 1 - k, cnt, target)
                    if v > best:
                        best = v
                        bd = d
            p = bd
        return positions, covs, False
    finally:
        free(s)
        free(t)
