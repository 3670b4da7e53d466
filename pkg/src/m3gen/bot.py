"""Scripted playtesting bot and per-level playthrough statistics.

The agent is a deterministic one-ply greedy: every legal swap is scored by
its immediate match set as ``10 * red_tiles + total_tiles`` and the best one
is played, ties going to the swap whose first cell (then second) comes
earliest in (y, x) order. It strongly favors the objective color, replays
identically for a given seed, and comfortably beats a random-move baseline.

A level's difficulty statistics are the median and population standard
deviation of moves-to-solve over repeated seeded games. Runs that fail to
reach 60 red tiles within the cap enter the statistics as the sentinel value
``cap + 1``, which keeps the median monotone in difficulty and pushes mostly
unsolvable levels above any validity threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .engine import (
    WIN_RED_COUNT,
    BoardState,
    IllegalMoveError,
    LayoutInfo,
    SwapMove,
    analyze_layout,
)
from .rng import SplitMix64

DEFAULT_RUN_COUNT = 30
VALID_MOVE_LIMIT = 20
#: Bots get 2 * valid_moves - 1 moves so that statistics remain informative
#: well past the validity threshold.
DEFAULT_MOVE_CAP = 2 * VALID_MOVE_LIMIT - 1


@dataclass(frozen=True)
class BotConfig:
    run_count: int = DEFAULT_RUN_COUNT
    move_cap: int = DEFAULT_MOVE_CAP
    base_seed: int = 0x5EED_B07


@dataclass(frozen=True)
class PlaythroughStats:
    median_moves: float
    std_moves: float
    runs: tuple[int, ...] = field(repr=False)
    success_rate: float


def select_move(state: BoardState) -> SwapMove:
    """Greedy red-weighted move choice. Raises on a deadlocked board."""
    scored = state._scored_moves()
    if not scored:
        raise IllegalMoveError("deadlock")
    best = max(scored, key=lambda t: t[2])
    # max() keeps the earliest maximum, and _scored_moves enumerates in
    # canonical (y, x) order, so ties already break correctly.
    return state._pair_move(best[0], best[1])


def play_once(
    layout: np.ndarray,
    seed: int,
    cap: int = DEFAULT_MOVE_CAP,
    info: LayoutInfo | None = None,
) -> int:
    """Play one seeded game; moves used on a win, ``cap + 1`` otherwise."""
    try:
        state = BoardState(layout, seed, info=info)
    except IllegalMoveError:
        return cap + 1
    while True:
        if state.red_cleared >= WIN_RED_COUNT:
            return state.moves_used
        if state.moves_used >= cap:
            return cap + 1
        scored = state._scored_moves()
        if not scored:
            return cap + 1
        best = max(scored, key=lambda t: t[2])
        state.apply_move(state._pair_move(best[0], best[1]))


def play_once_random(
    layout: np.ndarray,
    seed: int,
    cap: int = DEFAULT_MOVE_CAP,
    info: LayoutInfo | None = None,
) -> int:
    """Baseline agent picking uniformly among legal moves."""
    try:
        state = BoardState(layout, seed, info=info)
    except IllegalMoveError:
        return cap + 1
    picker = SplitMix64(seed ^ 0xBA5E11E)
    while True:
        if state.red_cleared >= WIN_RED_COUNT:
            return state.moves_used
        if state.moves_used >= cap:
            return cap + 1
        scored = state._scored_moves()
        if not scored:
            return cap + 1
        ia, ib, _ = scored[picker.randrange(len(scored))]
        state.apply_move(state._pair_move(ia, ib))


def summarize_runs(runs: list[int], cap: int) -> PlaythroughStats:
    values = np.asarray(sorted(runs), dtype=np.float64)
    wins = int((values <= cap).sum())
    return PlaythroughStats(
        median_moves=float(np.median(values)),
        std_moves=float(values.std()),  # population std
        runs=tuple(int(v) for v in sorted(runs)),
        success_rate=wins / len(runs),
    )


def evaluate_level(
    layout: np.ndarray,
    config: BotConfig = BotConfig(),
    player=play_once,
) -> PlaythroughStats:
    """Statistics over ``run_count`` games seeded ``base_seed + i``."""
    try:
        info = analyze_layout(layout)
    except IllegalMoveError:
        # No PLAYFIELD cell at all: unplayable, every run fails.
        runs = [config.move_cap + 1] * config.run_count
        return summarize_runs(runs, config.move_cap)
    runs = [
        player(layout, config.base_seed + i, config.move_cap, info)
        for i in range(config.run_count)
    ]
    return summarize_runs(runs, config.move_cap)


def evaluate_levels(
    layouts,
    config: BotConfig = BotConfig(),
    n_jobs: int = 1,
    player=play_once,
) -> list[PlaythroughStats]:
    """Evaluate many levels, optionally in parallel (runs stay per-level
    deterministic, so the result is independent of n_jobs)."""
    if n_jobs == 1:
        return [evaluate_level(lay, config, player) for lay in layouts]
    return Parallel(n_jobs=n_jobs)(
        delayed(evaluate_level)(lay, config, player) for lay in layouts
    )
