"""Find the submarine: a ship sweeps a plus-shaped sonar over a grid.

Cells are numbered ``1..width*height`` row-major from the top-left, so an
agent control written as ``destination - source`` matches the cell
arithmetic directly. The measurement state is the bitmask of searched cells
(bit ``id - 1``); once the submarine is detected the state becomes
:class:`Found`, which carries the ``log2(cells)`` bits still owed for
pinpointing which swept cell it was in.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

from ..entropy import OutcomeDistribution
from ..errors import ModelError

# Cartesian by two, then diagonal by one
NOMINAL_MOVES = ((-2, 0), (2, 0), (0, -2), (0, 2), (-1, -1), (-1, 1), (1, -1), (1, 1))
SONAR_OFFSETS = ((0, 0), (-1, 0), (1, 0), (0, -1), (0, 1))
TIE_BREAKS = ("first-in-enumeration", "lowest-control-id")
YES, NO = "yes", "no"


class Found(NamedTuple):
    """Absorbing state after a detection; *cells* is the size of the detecting sweep."""

    cells: int


class Grid:
    """Rectangular search grid with precomputed sonar footprints and moves.

    *tie_break* fixes the order in which agent controls are enumerated:
    ``"first-in-enumeration"`` uses *move_order* (default
    :data:`NOMINAL_MOVES`), ``"lowest-control-id"`` sorts controls by their
    cell-id delta.
    """

    def __init__(
        self,
        width: int,
        height: int | None = None,
        tie_break: str = "first-in-enumeration",
        move_order: Sequence[tuple[int, int]] | None = None,
    ):
        height = width if height is None else height
        if width < 2 or height < 2:
            raise ModelError(f"grid must be at least 2x2, got {width}x{height}")
        if tie_break not in TIE_BREAKS:
            raise ModelError(f"unknown tie_break {tie_break!r}; expected one of {TIE_BREAKS}")
        order = tuple(tuple(m) for m in (move_order or NOMINAL_MOVES))
        if sorted(order) != sorted(NOMINAL_MOVES):
            raise ModelError(f"move_order must be a permutation of {NOMINAL_MOVES}")
        if tie_break == "lowest-control-id":
            order = tuple(sorted(order, key=lambda d: d[0] * width + d[1]))
        self.width, self.height = width, height
        self.tie_break = tie_break
        self.move_order = order
        self.n_cells = width * height
        self.full_mask = (1 << self.n_cells) - 1
        self.sonar_cells = {}
        self.sonar_bits = {}
        self.moves = {}
        for cell in self.cells():
            r, c = self.coords(cell)
            swept = tuple(
                self.cell(r + dr, c + dc) for dr, dc in SONAR_OFFSETS if self.on_grid(r + dr, c + dc)
            )
            self.sonar_cells[cell] = swept
            self.sonar_bits[cell] = sum(1 << (s - 1) for s in swept)
            self.moves[cell] = tuple(
                dr * width + dc for dr, dc in order if self.on_grid(r + dr, c + dc)
            )

    def __repr__(self):
        return f"Grid({self.width}x{self.height}, tie_break={self.tie_break!r})"

    def cells(self) -> range:
        return range(1, self.n_cells + 1)

    def coords(self, cell: int) -> tuple[int, int]:
        if not 1 <= cell <= self.n_cells:
            raise ModelError(f"cell {cell!r} outside {self.width}x{self.height} grid")
        return divmod(cell - 1, self.width)

    def cell(self, row: int, col: int) -> int:
        return row * self.width + col + 1

    def on_grid(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width

    def remaining(self, mask: int) -> int:
        return self.n_cells - mask.bit_count()

    def mask_of(self, cells) -> int:
        return sum(1 << (c - 1) for c in set(cells))

    def cells_of(self, mask: int) -> tuple[int, ...]:
        return tuple(c for c in self.cells() if mask >> (c - 1) & 1)

    def parity_classes(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Cells split by ``(row + col) % 2``; moves never leave a class."""
        even = tuple(c for c in self.cells() if sum(self.coords(c)) % 2 == 0)
        odd = tuple(c for c in self.cells() if sum(self.coords(c)) % 2 == 1)
        return even, odd

    def symmetries(self):
        """Cell permutations (as dicts) for the grid's dihedral symmetries."""
        w, h = self.width, self.height
        maps = [lambda r, c: (r, c), lambda r, c: (h - 1 - r, c),
                lambda r, c: (r, w - 1 - c), lambda r, c: (h - 1 - r, w - 1 - c)]
        if w == h:
            maps += [lambda r, c: (c, r), lambda r, c: (w - 1 - c, r),
                     lambda r, c: (c, h - 1 - r), lambda r, c: (w - 1 - c, h - 1 - r)]
        return [{cell: self.cell(*f(*self.coords(cell))) for cell in self.cells()} for f in maps]


def sonar_coverage(grid: Grid, ship: int, searched: int = 0) -> tuple[int, tuple[int, ...]]:
    """Number and identity of not-yet-searched cells the sonar sweeps from *ship*."""
    grid.coords(ship)
    new = tuple(c for c in grid.sonar_cells[ship] if not searched >> (c - 1) & 1)
    return len(new), new


def admissible_moves(grid: Grid, ship: int) -> tuple[int, ...]:
    """Controls (cell-id deltas) keeping the ship on the grid, in tie-break order."""
    grid.coords(ship)
    return grid.moves[ship]


def destinations(grid: Grid, ship: int) -> tuple[int, ...]:
    return tuple(ship + d for d in admissible_moves(grid, ship))


def _coverage_count(grid, ship, mask):
    return (grid.sonar_bits[ship] & ~mask).bit_count()


class SubmarineProcess:
    """The search as a coupled agent/measurement process.

    The only measurement at each stage is the sweep centred on the ship, so
    ``measurement_set`` returns the ship's own cell. Detection moves to
    :class:`Found`; a miss adds the sweep to the searched mask.
    """

    def __init__(self, grid: Grid, positions: Sequence[int] | None = None):
        self.grid = grid
        self.initial_positions = tuple(grid.cells() if positions is None else positions)
        for p in self.initial_positions:
            grid.coords(p)
        self.initial_state = 0

    def __repr__(self):
        return f"SubmarineProcess({self.grid!r})"

    def control_set(self, k, xp):
        return admissible_moves(self.grid, xp)

    def disturbance_distribution(self, k, xp, up):
        return OutcomeDistribution.point_mass(None)

    def dynamics(self, k, xp, up, w):
        if up not in self.grid.moves[xp]:
            raise ModelError(f"control {up!r} not admissible from cell {xp!r}")
        return xp + up

    def measurement_set(self, k, xp, x):
        return (xp,)

    def coverage(self, xp, x, u):
        if isinstance(x, Found):
            return 0
        return _coverage_count(self.grid, u, x)

    def outcome_distribution(self, k, x, u):
        if isinstance(x, Found):
            return OutcomeDistribution.point_mass(YES)
        left = self.grid.remaining(x)
        if left < 1:
            raise ModelError(f"mask {x:#x} leaves no candidate cells")
        new = _coverage_count(self.grid, u, x)
        return OutcomeDistribution([(YES, new / left), (NO, (left - new) / left)])

    def transition(self, k, x, u, m):
        if isinstance(x, Found):
            return x
        if m == YES:
            return Found(_coverage_count(self.grid, u, x))
        if m == NO:
            return x | self.grid.sonar_bits[u]
        raise ModelError(f"unknown sonar outcome {m!r}")

    def terminal_entropy(self, xp, x):
        if isinstance(x, Found):
            return math.log2(x.cells)
        return 0.0

    # helpers for on-line planning

    def not_found(self, k, x, u, dist):
        """Outcome rule for the guaranteed-find search: the sweep misses unless it cannot."""
        return NO if dist.probability(NO) > 0.0 else YES

    def search_complete(self, k, xp, x) -> bool:
        """Stop rule: every cell but one searched (or the submarine already found)."""
        return isinstance(x, Found) or self.grid.remaining(x) <= 1


def submarine_process(grid: Grid, positions: Sequence[int] | None = None) -> SubmarineProcess:
    return SubmarineProcess(grid, positions)


def stranded_configuration() -> tuple[Grid, int, int]:
    """A 7x7 search where every move from the ship ties at zero new coverage.

    Only cells 4, 6, 8 and 10 remain unsearched and the ship sits at cell 42,
    out of reach of all of them, so the next move is decided purely by the
    order in which controls are enumerated.
    """
    grid = Grid(7)
    unsearched = {4, 6, 8, 10}
    return grid, 42, grid.mask_of(c for c in grid.cells() if c not in unsearched)
