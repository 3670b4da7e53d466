"""Simplified match-3 game on a level layout.

Rules implemented:
- four tile colors; the objective is clearing 60 RED tiles within a move cap
- a move swaps two orthogonally adjacent PLAYFIELD tiles and is legal only if
  it creates a run of 3+ same-colored tiles
- matched runs clear simultaneously, tiles fall straight down (through GAP
  cells, stopped by BLOCK, the board bottom or other tiles), refills spawn at
  the top of each column segment, and resolution repeats until stable
- a board with no legal move is a dead loss (no reshuffle)

Columns are split by BLOCK cells into independent fall segments. Each segment
containing at least one PLAYFIELD cell has exactly one spawn spot at its
topmost PLAYFIELD cell. Tiles never leave their segment; within a segment
they stack onto the lowest PLAYFIELD cells (GAP cells hold nothing).

Determinism: all randomness comes from one SplitMix64 stream owned by the
board. Refill draws colors column by column left to right, segments top to
bottom, empty cells bottom to top. The initial fill draws every cell in that
order, then re-rolls match-completing cells in row-major order (at most 100
attempts per cell), so identical (layout, seed, moves) replay identically.

Internally tiles live in a flat list indexed ``y * 9 + x`` because bot search
sweeps thousands of candidate swaps per game; -1 marks "no tile".
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterable, NamedTuple

import numpy as np

from .grid import BOARD_HEIGHT, BOARD_WIDTH, CellKind, check_grid
from .rng import SplitMix64

WIN_RED_COUNT = 60
N_COLORS = 4


class TileColor(IntEnum):
    RED = 0
    GREEN = 1
    BLUE = 2
    ORANGE = 3


class GameStatus(Enum):
    WON = "won"
    LOST = "lost"
    ONGOING = "ongoing"


class SwapMove(NamedTuple):
    """Swap of two orthogonally adjacent PLAYFIELD cells, coordinates (x, y)."""

    a: tuple[int, int]
    b: tuple[int, int]


class IllegalMoveError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutInfo:
    """Precomputed per-layout geometry, shared by all games on one level."""

    playfield: tuple[int, ...]  # flat indices of PLAYFIELD cells
    is_playfield: tuple[bool, ...]  # length 99 lookup
    segments: tuple[tuple[int, ...], ...]  # PLAYFIELD indices per fall segment, top-down
    spawn_spots: frozenset[tuple[int, int]]  # (x, y), one per playable segment
    adjacent_pairs: tuple[tuple[int, int], ...]  # candidate swaps in canonical order


def _flat(x: int, y: int) -> int:
    return y * BOARD_WIDTH + x


def analyze_layout(layout: np.ndarray) -> LayoutInfo:
    layout = check_grid(layout)
    is_pf = [False] * (BOARD_WIDTH * BOARD_HEIGHT)
    playfield = []
    for y in range(BOARD_HEIGHT):
        for x in range(BOARD_WIDTH):
            if layout[y, x] == CellKind.PLAYFIELD:
                idx = _flat(x, y)
                is_pf[idx] = True
                playfield.append(idx)
    if not playfield:
        raise IllegalMoveError("layout has no PLAYFIELD cell")

    # Column segments: maximal vertical runs of non-BLOCK cells. GAP cells
    # belong to a segment but never hold tiles, so only PLAYFIELD indices are
    # stored. Segments without PLAYFIELD cells are dropped.
    segments: list[tuple[int, ...]] = []
    spots: list[tuple[int, int]] = []
    for x in range(BOARD_WIDTH):
        current: list[int] = []
        seen_playfield_xy: tuple[int, int] | None = None
        for y in range(BOARD_HEIGHT + 1):
            blocked = y == BOARD_HEIGHT or layout[y, x] == CellKind.BLOCK
            if blocked:
                if current:
                    segments.append(tuple(current))
                    spots.append(seen_playfield_xy)
                current = []
                seen_playfield_xy = None
            elif layout[y, x] == CellKind.PLAYFIELD:
                if seen_playfield_xy is None:
                    seen_playfield_xy = (x, y)
                current.append(_flat(x, y))

    # Candidate swaps in canonical order: cells scanned row-major, each paired
    # with its right and then its down neighbor. Bot tie-breaking relies on
    # this order.
    pairs: list[tuple[int, int]] = []
    for y in range(BOARD_HEIGHT):
        for x in range(BOARD_WIDTH):
            idx = _flat(x, y)
            if not is_pf[idx]:
                continue
            if x + 1 < BOARD_WIDTH and is_pf[idx + 1]:
                pairs.append((idx, idx + 1))
            if y + 1 < BOARD_HEIGHT and is_pf[idx + BOARD_WIDTH]:
                pairs.append((idx, idx + BOARD_WIDTH))

    return LayoutInfo(
        playfield=tuple(playfield),
        is_playfield=tuple(is_pf),
        segments=tuple(segments),
        spawn_spots=frozenset(spots),
        adjacent_pairs=tuple(pairs),
    )


def derive_spawn_spots(layout: np.ndarray) -> frozenset[tuple[int, int]]:
    """Spawn spots of a layout: the topmost PLAYFIELD cell of every column
    segment reachable only through GAP cells or the board top."""
    return analyze_layout(layout).spawn_spots


class BoardState:
    """Live game state. Mutated in place by :meth:`apply_move`."""

    __slots__ = ("layout", "info", "tiles", "red_cleared", "moves_used", "rng")

    def __init__(
        self,
        layout: np.ndarray,
        seed: int,
        info: LayoutInfo | None = None,
        fill: bool = True,
    ):
        self.layout = check_grid(layout)
        self.info = info if info is not None else analyze_layout(self.layout)
        self.tiles: list[int] = [-1] * (BOARD_WIDTH * BOARD_HEIGHT)
        self.red_cleared = 0
        self.moves_used = 0
        self.rng = SplitMix64(seed)
        if fill:
            self._initial_fill()

    # -- tile access -------------------------------------------------------

    def tile_at(self, x: int, y: int) -> TileColor | None:
        v = self.tiles[_flat(x, y)]
        return TileColor(v) if v >= 0 else None

    def set_tiles(self, tiles: dict[tuple[int, int], TileColor]) -> None:
        """Place an explicit tile configuration (test/fixture hook)."""
        self.tiles = [-1] * (BOARD_WIDTH * BOARD_HEIGHT)
        for (x, y), color in tiles.items():
            idx = _flat(x, y)
            if not self.info.is_playfield[idx]:
                raise IllegalMoveError(f"cell ({x},{y}) is not PLAYFIELD")
            self.tiles[idx] = int(color)

    # -- filling -----------------------------------------------------------

    def _refill(self) -> None:
        tiles = self.tiles
        rng = self.rng
        for seg in self.info.segments:
            for idx in reversed(seg):
                if tiles[idx] < 0:
                    tiles[idx] = rng.randrange(N_COLORS)

    def _initial_fill(self) -> None:
        self._refill()
        tiles = self.tiles
        for y in range(BOARD_HEIGHT):
            for x in range(BOARD_WIDTH):
                idx = _flat(x, y)
                if tiles[idx] < 0:
                    continue
                attempts = 0
                while attempts < 100 and self._in_run(idx):
                    tiles[idx] = self.rng.randrange(N_COLORS)
                    attempts += 1

    # -- matching ----------------------------------------------------------

    def _run_lengths(self, idx: int) -> tuple[int, int]:
        """(horizontal, vertical) run length of same-color tiles through idx."""
        tiles = self.tiles
        color = tiles[idx]
        x = idx % BOARD_WIDTH
        y = idx // BOARD_WIDTH
        h = 1
        i = idx - 1
        while i >= idx - x and tiles[i] == color:
            h += 1
            i -= 1
        i = idx + 1
        while i < idx - x + BOARD_WIDTH and tiles[i] == color:
            h += 1
            i += 1
        v = 1
        i = idx - BOARD_WIDTH
        while i >= 0 and tiles[i] == color:
            v += 1
            i -= BOARD_WIDTH
        i = idx + BOARD_WIDTH
        while i < BOARD_WIDTH * BOARD_HEIGHT and tiles[i] == color:
            v += 1
            i += BOARD_WIDTH
        return h, v

    def _in_run(self, idx: int) -> bool:
        if self.tiles[idx] < 0:
            return False
        h, v = self._run_lengths(idx)
        return h >= 3 or v >= 3

    def _match_cells_through(self, idx: int) -> set[int]:
        """Cells of the 3+ runs passing through idx (empty set if none)."""
        tiles = self.tiles
        color = tiles[idx]
        cells: set[int] = set()
        x = idx % BOARD_WIDTH
        left = idx
        while left - 1 >= idx - x and tiles[left - 1] == color:
            left -= 1
        right = idx
        while right + 1 < idx - x + BOARD_WIDTH and tiles[right + 1] == color:
            right += 1
        if right - left + 1 >= 3:
            cells.update(range(left, right + 1))
        top = idx
        while top - BOARD_WIDTH >= 0 and tiles[top - BOARD_WIDTH] == color:
            top -= BOARD_WIDTH
        bottom = idx
        while (
            bottom + BOARD_WIDTH < BOARD_WIDTH * BOARD_HEIGHT
            and tiles[bottom + BOARD_WIDTH] == color
        ):
            bottom += BOARD_WIDTH
        if (bottom - top) // BOARD_WIDTH + 1 >= 3:
            cells.update(range(top, bottom + 1, BOARD_WIDTH))
        return cells

    def find_matches(self) -> set[tuple[int, int]]:
        """All cells in maximal horizontal/vertical runs of 3+ same-color tiles."""
        matched: set[int] = set()
        tiles = self.tiles
        for y in range(BOARD_HEIGHT):
            base = y * BOARD_WIDTH
            run_start = 0
            x = 1
            while x <= BOARD_WIDTH:
                same = (
                    x < BOARD_WIDTH
                    and tiles[base + x] >= 0
                    and tiles[base + x] == tiles[base + run_start]
                )
                if not same:
                    if tiles[base + run_start] >= 0 and x - run_start >= 3:
                        matched.update(range(base + run_start, base + x))
                    run_start = x
                x += 1
        for x in range(BOARD_WIDTH):
            run_start = 0
            y = 1
            while y <= BOARD_HEIGHT:
                same = (
                    y < BOARD_HEIGHT
                    and tiles[y * BOARD_WIDTH + x] >= 0
                    and tiles[y * BOARD_WIDTH + x] == tiles[run_start * BOARD_WIDTH + x]
                )
                if not same:
                    if tiles[run_start * BOARD_WIDTH + x] >= 0 and y - run_start >= 3:
                        matched.update(r * BOARD_WIDTH + x for r in range(run_start, y))
                    run_start = y
                y += 1
        return {(i % BOARD_WIDTH, i // BOARD_WIDTH) for i in matched}

    # -- moves -------------------------------------------------------------

    def _pair_move(self, ia: int, ib: int) -> SwapMove:
        return SwapMove(
            (ia % BOARD_WIDTH, ia // BOARD_WIDTH), (ib % BOARD_WIDTH, ib // BOARD_WIDTH)
        )

    def legal_moves(self) -> list[SwapMove]:
        """Adjacent PLAYFIELD swaps that create at least one match."""
        return [self._pair_move(ia, ib) for ia, ib, _ in self._scored_moves()]

    def _scored_moves(self) -> list[tuple[int, int, int]]:
        """(ia, ib, score) per legal swap, in canonical order.

        The score is 10x the number of RED tiles in the immediate match set
        plus the total number of matched tiles, before any cascade.
        """
        tiles = self.tiles
        out: list[tuple[int, int, int]] = []
        for ia, ib in self.info.adjacent_pairs:
            ca = tiles[ia]
            cb = tiles[ib]
            if ca == cb or ca < 0 or cb < 0:
                continue
            tiles[ia] = cb
            tiles[ib] = ca
            cells = self._match_cells_through(ia)
            cells |= self._match_cells_through(ib)
            if cells:
                reds = sum(1 for i in cells if tiles[i] == TileColor.RED)
                out.append((ia, ib, 10 * reds + len(cells)))
            tiles[ia] = ca
            tiles[ib] = cb
        return out

    def _settle(self) -> None:
        """Gravity pass: per segment, tiles stack onto the lowest PLAYFIELD
        cells preserving top-to-bottom order."""
        tiles = self.tiles
        for seg in self.info.segments:
            falling = [tiles[i] for i in seg if tiles[i] >= 0]
            n = len(seg) - len(falling)
            for pos, idx in enumerate(seg):
                tiles[idx] = -1 if pos < n else falling[pos - n]

    def _clear(self, matched: Iterable[tuple[int, int]]) -> None:
        tiles = self.tiles
        for x, y in matched:
            idx = _flat(x, y)
            if tiles[idx] == TileColor.RED:
                self.red_cleared += 1
            tiles[idx] = -1

    def apply_move(self, move: SwapMove) -> None:
        """Swap, then clear/settle/refill to fixpoint. Raises on illegal moves."""
        ia = _flat(*move.a)
        ib = _flat(*move.b)
        if not (self.info.is_playfield[ia] and self.info.is_playfield[ib]):
            raise IllegalMoveError("swap cells must be PLAYFIELD")
        if abs(move.a[0] - move.b[0]) + abs(move.a[1] - move.b[1]) != 1:
            raise IllegalMoveError("swap cells must be orthogonally adjacent")
        tiles = self.tiles
        tiles[ia], tiles[ib] = tiles[ib], tiles[ia]
        if not (self._match_cells_through(ia) or self._match_cells_through(ib)):
            tiles[ia], tiles[ib] = tiles[ib], tiles[ia]
            raise IllegalMoveError("no match produced")
        while True:
            matched = self.find_matches()
            if not matched:
                break
            self._clear(matched)
            self._settle()
            self._refill()
        self.moves_used += 1

    def status(self, move_cap: int) -> GameStatus:
        if self.red_cleared >= WIN_RED_COUNT and self.moves_used <= move_cap:
            return GameStatus.WON
        if self.moves_used >= move_cap:
            return GameStatus.LOST
        if not self._scored_moves():
            return GameStatus.LOST
        return GameStatus.ONGOING

    # -- debugging ---------------------------------------------------------

    def render_tiles(self) -> str:
        """ASCII tile dump: R/G/B/O for colors, '.' for empty, '#'/',' for
        BLOCK/GAP layout cells."""
        chars = {0: "R", 1: "G", 2: "B", 3: "O"}
        rows = []
        for y in range(BOARD_HEIGHT):
            row = []
            for x in range(BOARD_WIDTH):
                if self.layout[y, x] == CellKind.BLOCK:
                    row.append("#")
                elif self.layout[y, x] == CellKind.GAP:
                    row.append(",")
                else:
                    v = self.tiles[_flat(x, y)]
                    row.append(chars.get(v, "."))
            rows.append("".join(row))
        return "\n".join(rows)


def game_status(state: BoardState, move_cap: int) -> GameStatus:
    return state.status(move_cap)
