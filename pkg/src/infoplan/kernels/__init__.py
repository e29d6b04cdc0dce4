"""Hot loops for the submarine search, compiled when available.

The compiled extension is used unless it failed to build or the
``INFOPLAN_PURE`` environment variable is set to a non-empty value other
than ``0``. ``BACKEND`` names the active implementation.
"""
from __future__ import annotations

import os
from array import array

from . import _pure

if os.environ.get("INFOPLAN_PURE", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _fast as _impl
    except ImportError:  # extension not built
        _impl = _pure

BACKEND = "cython" if _impl is not _pure else "python"

coverage = _impl.coverage
base_move = _impl.base_move
simulate = _impl.simulate
greedy_run = _impl.greedy_run
rollout_run = _impl.rollout_run


def pack_tables(grid):
    """Flatten a grid's sonar footprints and move destinations (zero-based)."""
    sonar = array("i", [-1] * (grid.n_cells * _pure.SONAR))
    moves = array("i", [-1] * (grid.n_cells * _pure.MOVES))
    for cell in grid.cells():
        i = cell - 1
        for j, c in enumerate(grid.sonar_cells[cell]):
            sonar[i * _pure.SONAR + j] = c - 1
        for j, d in enumerate(grid.moves[cell]):
            moves[i * _pure.MOVES + j] = cell + d - 1
    return sonar, moves


__all__ = [
    "BACKEND",
    "base_move",
    "coverage",
    "greedy_run",
    "pack_tables",
    "rollout_run",
    "simulate",
]
