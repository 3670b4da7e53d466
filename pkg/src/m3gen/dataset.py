"""Procedural datasets, bot annotation, difficulty normalization, persistence.

Two level styles are generated:

- main: per level, a size is drawn uniformly from the 48 admissible
  combinations and a symmetry from {vertical 30%, horizontal 20%, quadrant
  20%, unknown 30%}; BLOCK cells are scattered over the kept (non-redundant)
  part of the play area with density uniform in [5%, 25%] and GAP cells with
  density uniform in [0%, 8%], then the level is mirror-completed. Samples
  with fewer than 12 PLAYFIELD cells, an all-blocked play-area column, or a
  measured size different from the drawn one are rejected and redrawn.
- stylized: all-PLAYFIELD play area except exactly one 2x2 BLOCK square
  placed uniformly at random fully inside it; no GAP cells.

Annotation runs the scripted bot on every level and stores median/std moves.
The difficulty conditioner is that median min-max normalized against the
training split, clamped to [0, 1].

Manifests persist as UTF-8 JSON (schema in save_manifest's docstring).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import grid as G
from .bot import BotConfig, PlaythroughStats, evaluate_levels
from .grid import CellKind, LevelSize, SymmetryKind
from .rng import SplitMix64

MIN_PLAYFIELD_CELLS = 12
MAX_GENERATOR_ATTEMPTS = 1000
SPLIT_WEIGHTS = (170, 15, 13)  # train / val / test proportions

_SYMMETRY_WEIGHTS = (
    (SymmetryKind.VERTICAL, 0.30),
    (SymmetryKind.HORIZONTAL, 0.20),
    (SymmetryKind.QUADRANT, 0.20),
    (SymmetryKind.UNKNOWN, 0.30),
)


class Split(Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


class DatasetError(ValueError):
    pass


@dataclass
class AnnotatedLevel:
    grid: np.ndarray
    symmetry: SymmetryKind
    size: LevelSize
    median_moves: float
    std_moves: float
    split: Split

    @property
    def annotated(self) -> bool:
        return self.median_moves > 0.0


@dataclass
class DatasetManifest:
    levels: list[AnnotatedLevel]
    m_min: float
    m_max: float
    style: str  # "main" | "stylized"
    generator_seed: int
    stats: list[PlaythroughStats] | None = field(default=None, repr=False)

    @property
    def annotated(self) -> bool:
        return bool(self.levels) and all(lv.annotated for lv in self.levels)

    def split_levels(self, split: Split) -> list[AnnotatedLevel]:
        return [lv for lv in self.levels if lv.split is split]

    def train_levels(self) -> list[AnnotatedLevel]:
        return self.split_levels(Split.TRAIN)


def _scatter_main_level(rng: SplitMix64) -> np.ndarray | None:
    width = rng.randrange(G.WIDTH_RANGE[1] - G.WIDTH_RANGE[0] + 1) + G.WIDTH_RANGE[0]
    height = rng.randrange(G.HEIGHT_RANGE[1] - G.HEIGHT_RANGE[0] + 1) + G.HEIGHT_RANGE[0]
    size = LevelSize(width, height)
    u = rng.uniform()
    acc = 0.0
    symmetry = SymmetryKind.UNKNOWN
    for kind, w in _SYMMETRY_WEIGHTS:
        acc += w
        if u < acc:
            symmetry = kind
            break
    block_density = rng.uniform_in(0.05, 0.25)
    gap_density = rng.uniform_in(0.0, 0.08)

    level = np.full((G.BOARD_HEIGHT, G.BOARD_WIDTH), CellKind.BLOCK, dtype=np.int8)
    keep = (G.build_symmetry_mask(size, symmetry) == 1) & (G.build_size_mask(size) == 1)
    for y, x in np.argwhere(keep):
        r = rng.uniform()
        if r < block_density:
            level[y, x] = CellKind.BLOCK
        elif r < block_density + gap_density:
            level[y, x] = CellKind.GAP
        else:
            level[y, x] = CellKind.PLAYFIELD
    level = G.complete_symmetry(level, size, symmetry)

    if int((level == CellKind.PLAYFIELD).sum()) < MIN_PLAYFIELD_CELLS:
        return None
    area = G.play_area(level, size)
    if not ((area == CellKind.PLAYFIELD).any(axis=0)).all():
        return None  # a play-area column with no PLAYFIELD cell
    try:
        if G.measure_size(level) != size:
            return None  # scatter broke the full-width/height runs
    except G.GridError:
        return None
    return level


def generate_main_style(count: int, seed: int) -> list[np.ndarray]:
    """Rule-based levels mixing BLOCK (mostly) and GAP (sparsely) obstacles."""
    if count < 1:
        raise DatasetError("count must be >= 1")
    rng = SplitMix64(seed)
    levels = []
    for _ in range(count):
        for attempt in range(MAX_GENERATOR_ATTEMPTS):
            level = _scatter_main_level(rng)
            if level is not None:
                levels.append(level)
                break
        else:
            raise DatasetError("generator starved")
    return levels


def generate_stylized(count: int, seed: int) -> list[np.ndarray]:
    """Levels carrying one 2x2 BLOCK square inside an otherwise open area."""
    if count < 1:
        raise DatasetError("count must be >= 1")
    rng = SplitMix64(seed)
    levels = []
    for _ in range(count):
        width = rng.randrange(G.WIDTH_RANGE[1] - G.WIDTH_RANGE[0] + 1) + G.WIDTH_RANGE[0]
        height = rng.randrange(G.HEIGHT_RANGE[1] - G.HEIGHT_RANGE[0] + 1) + G.HEIGHT_RANGE[0]
        size = LevelSize(width, height)
        level = np.full((G.BOARD_HEIGHT, G.BOARD_WIDTH), CellKind.BLOCK, dtype=np.int8)
        x0, y0 = G.play_area_origin(size)
        level[y0 : y0 + height, x0 : x0 + width] = CellKind.PLAYFIELD
        bx = x0 + rng.randrange(width - 1)
        by = y0 + rng.randrange(height - 1)
        level[by : by + 2, bx : bx + 2] = CellKind.BLOCK
        levels.append(level)
    return levels


def assign_splits(count: int, seed: int) -> list[Split]:
    """Deterministic shuffled split in 170/15/13 proportions scaled to count."""
    n_train = round(count * SPLIT_WEIGHTS[0] / sum(SPLIT_WEIGHTS))
    n_val = round(count * SPLIT_WEIGHTS[1] / sum(SPLIT_WEIGHTS))
    n_train = min(n_train, count)
    n_val = min(n_val, count - n_train)
    order = list(range(count))
    SplitMix64(seed ^ 0x57117).shuffle(order)
    splits = [Split.TEST] * count
    for rank, idx in enumerate(order):
        if rank < n_train:
            splits[idx] = Split.TRAIN
        elif rank < n_train + n_val:
            splits[idx] = Split.VAL
    return splits


def annotate(
    levels: list[np.ndarray],
    config: BotConfig = BotConfig(),
    style: str = "main",
    generator_seed: int = 0,
    n_jobs: int = 1,
) -> DatasetManifest:
    """Run the bot over every level and assemble an annotated manifest."""
    if not levels:
        raise DatasetError("no levels to annotate")
    stats = evaluate_levels(levels, config, n_jobs=n_jobs)
    splits = assign_splits(len(levels), generator_seed)
    annotated = []
    for level, st, split in zip(levels, stats, splits):
        size = G.measure_size(level)
        annotated.append(
            AnnotatedLevel(
                grid=level,
                symmetry=G.detect_symmetry(level),
                size=size,
                median_moves=st.median_moves,
                std_moves=st.std_moves,
                split=split,
            )
        )
    train_medians = [lv.median_moves for lv in annotated if lv.split is Split.TRAIN]
    if not train_medians:
        raise DatasetError("no TRAIN levels after split assignment")
    return DatasetManifest(
        levels=annotated,
        m_min=min(train_medians),
        m_max=max(train_medians),
        style=style,
        generator_seed=generator_seed,
        stats=list(stats),
    )


def normalize_difficulty(median_moves: float, manifest: DatasetManifest) -> float:
    """Min-max normalize a move count against the training split, clamped."""
    if manifest.m_max <= manifest.m_min:
        raise DatasetError("degenerate difficulty range")
    d = (median_moves - manifest.m_min) / (manifest.m_max - manifest.m_min)
    return min(1.0, max(0.0, d))


# -- persistence ------------------------------------------------------------


def _level_to_record(level: AnnotatedLevel) -> dict:
    return {
        "grid": level.grid.astype(int).tolist(),
        "symmetry": level.symmetry.value,
        "width": level.size.width,
        "height": level.size.height,
        "median_moves": level.median_moves,
        "std_moves": level.std_moves,
        "split": level.split.value,
    }


def _level_from_record(record: dict, index: int) -> AnnotatedLevel:
    def fail(msg: str):
        raise DatasetError(f"level record {index}: {msg}")

    try:
        grid = np.asarray(record["grid"], dtype=np.int8)
    except (KeyError, TypeError, ValueError):
        fail("missing or non-numeric grid")
    if grid.shape != (G.BOARD_HEIGHT, G.BOARD_WIDTH):
        fail(f"grid must be {G.BOARD_HEIGHT} rows of {G.BOARD_WIDTH} ints, got {grid.shape}")
    try:
        G.check_grid(grid)
    except G.GridError as exc:
        fail(str(exc))
    try:
        symmetry = SymmetryKind(record["symmetry"])
    except (KeyError, ValueError):
        fail(f"unknown symmetry {record.get('symmetry')!r}")
    try:
        split = Split(record["split"])
    except (KeyError, ValueError):
        fail(f"unknown split {record.get('split')!r}")
    size = LevelSize(int(record.get("width", 0)), int(record.get("height", 0)))
    try:
        measured = G.measure_size(grid)
    except G.GridError:
        fail("level has no PLAYFIELD cell")
    if measured != size:
        fail(f"stored size {tuple(size)} != measured {tuple(measured)}")
    if G.detect_symmetry(grid) is not symmetry:
        fail(f"stored symmetry {symmetry.value!r} inconsistent with grid")
    median = float(record.get("median_moves", 0.0))
    std = float(record.get("std_moves", 0.0))
    if median and not (1.0 <= median <= 40.0):
        fail(f"median_moves {median} outside [1, 40]")
    return AnnotatedLevel(grid, symmetry, size, median, std, split)


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write the dataset JSON file.

    Schema: ``{"style", "generator_seed", "m_min", "m_max", "levels": [...]}``
    with each level ``{"grid": 11 rows x 9 ints (codes 0/1/2, top row first),
    "symmetry", "width", "height", "median_moves", "std_moves", "split"}``.
    """
    payload = {
        "style": manifest.style,
        "generator_seed": manifest.generator_seed,
        "m_min": manifest.m_min,
        "m_max": manifest.m_max,
        "levels": [_level_to_record(lv) for lv in manifest.levels],
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"malformed dataset file: {exc}") from exc
    if payload.get("style") not in ("main", "stylized"):
        raise DatasetError(f"unknown style {payload.get('style')!r}")
    levels = [
        _level_from_record(rec, i) for i, rec in enumerate(payload.get("levels", []))
    ]
    if not levels:
        raise DatasetError("dataset has no levels")
    return DatasetManifest(
        levels=levels,
        m_min=float(payload.get("m_min", 0.0)),
        m_max=float(payload.get("m_max", 0.0)),
        style=payload["style"],
        generator_seed=int(payload.get("generator_seed", 0)),
    )


def unannotated_manifest(
    levels: list[np.ndarray], style: str, generator_seed: int
) -> DatasetManifest:
    """Manifest with placeholder statistics, as written by dataset generation
    before the annotation stage fills in bot results."""
    wrapped = [
        AnnotatedLevel(
            grid=level,
            symmetry=G.detect_symmetry(level),
            size=G.measure_size(level),
            median_moves=0.0,
            std_moves=0.0,
            split=Split.TRAIN,
        )
        for level in levels
    ]
    return DatasetManifest(
        levels=wrapped, m_min=0.0, m_max=0.0, style=style, generator_seed=generator_seed
    )
