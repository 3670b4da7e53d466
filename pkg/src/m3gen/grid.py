"""Level layouts on the fixed 9x11 board: sizes, symmetry, masks, encodings.

A level is a categorical matrix over three cell kinds. PLAYFIELD cells are
where tiles live and the game is played, BLOCK cells shape the level and stop
tiles, GAP cells look solid but let tiles fall through. The playable area is
a centered W x H rectangle with W in [4, 9] and H in [4, 11]; everything
outside it is canonically BLOCK so that the measured size is unambiguous.

Grids are numpy int8 arrays of shape (11, 9) indexed [y, x] with y = 0 the
top row. Binary masks share that indexing. The tensor encoding used by the
generative model is one-hot with shape (3, 9, 11) indexed [kind, x, y].

Symmetry handling is built around partial generation: a symmetry mask keeps
the non-redundant half (or quadrant) of the play area, and mirror completion
reconstructs the full level from the kept part.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import NamedTuple

import numpy as np

BOARD_WIDTH = 9
BOARD_HEIGHT = 11
WIDTH_RANGE = (4, 9)
HEIGHT_RANGE = (4, 11)

#: Number of admissible (width, height) combinations.
N_SIZES = (WIDTH_RANGE[1] - WIDTH_RANGE[0] + 1) * (HEIGHT_RANGE[1] - HEIGHT_RANGE[0] + 1)


class CellKind(IntEnum):
    """Cell taxonomy with codes pinned for serialization stability."""

    GAP = 0
    BLOCK = 1
    PLAYFIELD = 2


N_CELL_KINDS = 3

_ASCII_OF_KIND = {CellKind.GAP: ".", CellKind.BLOCK: "#", CellKind.PLAYFIELD: "o"}
_KIND_OF_ASCII = {v: k for k, v in _ASCII_OF_KIND.items()}


class SymmetryKind(Enum):
    VERTICAL = "vertical"
    HORIZONTAL = "horizontal"
    QUADRANT = "quadrant"
    UNKNOWN = "unknown"


class LevelSize(NamedTuple):
    width: int
    height: int


@dataclass(frozen=True)
class ConditionSpec:
    """Designer-facing generation conditioners.

    ``target_moves`` is the desired median number of moves to solve and is
    absent for models without the difficulty conditioner.
    """

    size: LevelSize
    symmetry: SymmetryKind
    target_moves: float | None = None


class GridError(ValueError):
    """Raised for malformed grids or invalid grid operations."""


def check_grid(grid: np.ndarray) -> np.ndarray:
    """Validate shape and cell codes, returning an int8 view/copy."""
    arr = np.asarray(grid)
    if arr.shape != (BOARD_HEIGHT, BOARD_WIDTH):
        raise GridError(
            f"grid must have shape ({BOARD_HEIGHT}, {BOARD_WIDTH}), got {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.integer):
        raise GridError("grid values must be integers")
    if arr.min() < 0 or arr.max() > 2:
        raise GridError("grid values must be cell codes 0, 1 or 2")
    return arr.astype(np.int8, copy=False)


def check_size(width: int, height: int) -> LevelSize:
    if not (WIDTH_RANGE[0] <= width <= WIDTH_RANGE[1]):
        raise GridError(f"width must be in [{WIDTH_RANGE[0]},{WIDTH_RANGE[1]}]")
    if not (HEIGHT_RANGE[0] <= height <= HEIGHT_RANGE[1]):
        raise GridError(f"height must be in [{HEIGHT_RANGE[0]},{HEIGHT_RANGE[1]}]")
    return LevelSize(int(width), int(height))


def all_sizes() -> list[LevelSize]:
    """All admissible sizes, widths ascending then heights ascending."""
    return [
        LevelSize(w, h)
        for w in range(WIDTH_RANGE[0], WIDTH_RANGE[1] + 1)
        for h in range(HEIGHT_RANGE[0], HEIGHT_RANGE[1] + 1)
    ]


def play_area_origin(size: LevelSize) -> tuple[int, int]:
    """Top-left (x0, y0) of the centered play area."""
    return (BOARD_WIDTH - size.width) // 2, (BOARD_HEIGHT - size.height) // 2


def _longest_run(values: np.ndarray) -> int:
    best = run = 0
    for v in values:
        if v == CellKind.PLAYFIELD:
            run += 1
            if run > best:
                best = run
        else:
            run = 0
    return best


def measure_size(grid: np.ndarray) -> LevelSize:
    """Measured level size: the longest consecutive PLAYFIELD run over rows
    gives the width, over columns the height."""
    grid = check_grid(grid)
    if not (grid == CellKind.PLAYFIELD).any():
        raise GridError("empty level")
    width = max(_longest_run(grid[y, :]) for y in range(BOARD_HEIGHT))
    height = max(_longest_run(grid[:, x]) for x in range(BOARD_WIDTH))
    return LevelSize(width, height)


def play_area(grid: np.ndarray, size: LevelSize | None = None) -> np.ndarray:
    """View of the centered play-area rectangle."""
    if size is None:
        size = measure_size(grid)
    x0, y0 = play_area_origin(size)
    return grid[y0 : y0 + size.height, x0 : x0 + size.width]


def is_mirror_symmetric(grid: np.ndarray, size: LevelSize, axis: SymmetryKind) -> bool:
    """Mirror predicate on the centered ``size`` play area.

    VERTICAL tests left-right mirroring, HORIZONTAL top-bottom, QUADRANT both.
    UNKNOWN is vacuously true.
    """
    area = play_area(np.asarray(grid), size)
    if axis is SymmetryKind.VERTICAL:
        return bool(np.array_equal(area, area[:, ::-1]))
    if axis is SymmetryKind.HORIZONTAL:
        return bool(np.array_equal(area, area[::-1, :]))
    if axis is SymmetryKind.QUADRANT:
        return bool(
            np.array_equal(area, area[:, ::-1]) and np.array_equal(area, area[::-1, :])
        )
    return True


def detect_symmetry(grid: np.ndarray) -> SymmetryKind:
    """Observed symmetry of the measured play area.

    Priority is QUADRANT over VERTICAL over HORIZONTAL: a quadrant-symmetric
    level is always labeled QUADRANT. Levels without any PLAYFIELD cell have
    no play area and report UNKNOWN.
    """
    grid = check_grid(grid)
    if not (grid == CellKind.PLAYFIELD).any():
        return SymmetryKind.UNKNOWN
    size = measure_size(grid)
    vertical = is_mirror_symmetric(grid, size, SymmetryKind.VERTICAL)
    horizontal = is_mirror_symmetric(grid, size, SymmetryKind.HORIZONTAL)
    if vertical and horizontal:
        return SymmetryKind.QUADRANT
    if vertical:
        return SymmetryKind.VERTICAL
    if horizontal:
        return SymmetryKind.HORIZONTAL
    return SymmetryKind.UNKNOWN


def build_size_mask(size: LevelSize) -> np.ndarray:
    """1 on the centered W x H rectangle, 0 elsewhere."""
    mask = np.zeros((BOARD_HEIGHT, BOARD_WIDTH), dtype=np.uint8)
    x0, y0 = play_area_origin(size)
    mask[y0 : y0 + size.height, x0 : x0 + size.width] = 1
    return mask


def build_symmetry_mask(size: LevelSize, symmetry: SymmetryKind) -> np.ndarray:
    """Mask selecting the non-redundant part of a symmetric level.

    All ones except the redundant half of the play area: VERTICAL zeroes
    local columns j >= ceil(W/2), HORIZONTAL local rows i >= ceil(H/2),
    QUADRANT both. Odd dimensions keep their center line. Cells outside the
    play area are always kept.
    """
    mask = np.ones((BOARD_HEIGHT, BOARD_WIDTH), dtype=np.uint8)
    x0, y0 = play_area_origin(size)
    w, h = size.width, size.height
    if symmetry in (SymmetryKind.VERTICAL, SymmetryKind.QUADRANT):
        keep_cols = (w + 1) // 2
        mask[y0 : y0 + h, x0 + keep_cols : x0 + w] = 0
    if symmetry in (SymmetryKind.HORIZONTAL, SymmetryKind.QUADRANT):
        keep_rows = (h + 1) // 2
        mask[y0 + keep_rows : y0 + h, x0 : x0 + w] = 0
    return mask


def complete_symmetry(
    partial: np.ndarray, size: LevelSize, symmetry: SymmetryKind
) -> np.ndarray:
    """Mirror-complete the kept region into a full level.

    VERTICAL copies local column W-1-j onto column j for j >= ceil(W/2);
    HORIZONTAL does the same over rows; QUADRANT applies the vertical
    completion first, then the horizontal one. UNKNOWN leaves the play area
    untouched. Cells outside the play area are forced to BLOCK either way.
    """
    grid = check_grid(partial).copy()
    x0, y0 = play_area_origin(size)
    w, h = size.width, size.height
    if symmetry in (SymmetryKind.VERTICAL, SymmetryKind.QUADRANT):
        for j in range((w + 1) // 2, w):
            grid[y0 : y0 + h, x0 + j] = grid[y0 : y0 + h, x0 + (w - 1 - j)]
    if symmetry in (SymmetryKind.HORIZONTAL, SymmetryKind.QUADRANT):
        for i in range((h + 1) // 2, h):
            grid[y0 + i, x0 : x0 + w] = grid[y0 + (h - 1 - i), x0 : x0 + w]
    outside = build_size_mask(size) == 0
    grid[outside] = CellKind.BLOCK
    return grid


def apply_mask(grid: np.ndarray, mask: np.ndarray, fill: int = CellKind.GAP) -> np.ndarray:
    """Overwrite masked-out cells with ``fill`` (content there is redundant)."""
    out = check_grid(grid).copy()
    out[np.asarray(mask) == 0] = fill
    return out


def one_hot_encode(grid: np.ndarray) -> np.ndarray:
    """One-hot tensor of shape (3, 9, 11) indexed [kind, x, y]."""
    grid = check_grid(grid)
    tensor = np.zeros((N_CELL_KINDS, BOARD_WIDTH, BOARD_HEIGHT), dtype=np.float32)
    for k in range(N_CELL_KINDS):
        tensor[k] = (grid == k).T
    return tensor


def one_hot_decode(tensor: np.ndarray) -> np.ndarray:
    """Grid from a (3, 9, 11) score tensor via per-cell argmax."""
    tensor = np.asarray(tensor)
    if tensor.shape != (N_CELL_KINDS, BOARD_WIDTH, BOARD_HEIGHT):
        raise GridError(
            f"tensor must have shape (3, {BOARD_WIDTH}, {BOARD_HEIGHT}), got {tensor.shape}"
        )
    return tensor.argmax(axis=0).T.astype(np.int8)


def render_ascii(grid: np.ndarray) -> str:
    """11 lines of 9 characters, top row first: '.'=GAP, '#'=BLOCK, 'o'=PLAYFIELD."""
    grid = check_grid(grid)
    return "\n".join(
        "".join(_ASCII_OF_KIND[CellKind(v)] for v in row) for row in grid
    )


def parse_ascii(text: str) -> np.ndarray:
    lines = [line for line in (s.strip() for s in text.splitlines()) if line]
    if len(lines) != BOARD_HEIGHT:
        raise GridError(f"expected {BOARD_HEIGHT} rows, got {len(lines)}")
    grid = np.zeros((BOARD_HEIGHT, BOARD_WIDTH), dtype=np.int8)
    for y, line in enumerate(lines):
        if len(line) != BOARD_WIDTH:
            raise GridError(f"row {y} must have {BOARD_WIDTH} characters, got {len(line)}")
        for x, ch in enumerate(line):
            if ch not in _KIND_OF_ASCII:
                raise GridError(f"unknown cell character {ch!r} at ({x},{y})")
            grid[y, x] = _KIND_OF_ASCII[ch]
    return grid


def full_board() -> np.ndarray:
    """Maximal 9x11 all-PLAYFIELD level."""
    return np.full((BOARD_HEIGHT, BOARD_WIDTH), CellKind.PLAYFIELD, dtype=np.int8)


def validate_level(grid: np.ndarray) -> LevelSize:
    """Check well-formedness: size in range, centered, all-BLOCK outside.

    Returns the measured size. Raises GridError otherwise.
    """
    grid = check_grid(grid)
    size = measure_size(grid)
    check_size(size.width, size.height)
    outside = build_size_mask(size) == 0
    if not (grid[outside] == CellKind.BLOCK).all():
        raise GridError("cells outside the centered play area must be BLOCK")
    return size
