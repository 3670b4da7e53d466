"""Regenerate the golden cascade fixtures under tests/fixtures/.

Run with --verbose to print every resolution step (matched cells, the board
after clearing, after gravity, after refill) for manual re-verification of
the physics before freezing new fixtures.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from m3gen import grid as G
from m3gen.engine import BoardState, SwapMove
from m3gen.grid import CellKind

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def small_board(rows: list[str]) -> np.ndarray:
    h, w = len(rows), len(rows[0])
    grid = np.full((11, 9), CellKind.BLOCK, dtype=np.int8)
    x0, y0 = (9 - w) // 2, (11 - h) // 2
    key = {".": CellKind.GAP, "#": CellKind.BLOCK, "o": CellKind.PLAYFIELD}
    for j, row in enumerate(rows):
        for i, ch in enumerate(row):
            grid[y0 + j, x0 + i] = key[ch]
    return grid


def apply_move_verbose(state: BoardState, move: SwapMove, verbose: bool) -> None:
    """Replay of BoardState.apply_move using the same primitives, printing
    every intermediate board for manual checking."""
    ia = move.a[1] * 9 + move.a[0]
    ib = move.b[1] * 9 + move.b[0]
    state.tiles[ia], state.tiles[ib] = state.tiles[ib], state.tiles[ia]
    if verbose:
        print(f"-- swap {move.a} <-> {move.b}")
        print(state.render_tiles())
    step = 0
    while True:
        matched = state.find_matches()
        if not matched:
            break
        step += 1
        if verbose:
            print(f"-- cascade step {step}: matched {sorted(matched)}")
        state._clear(matched)
        if verbose:
            print("after clear:")
            print(state.render_tiles())
        state._settle()
        if verbose:
            print("after gravity:")
            print(state.render_tiles())
        state._refill()
        if verbose:
            print("after refill:")
            print(state.render_tiles())
    state.moves_used += 1
    if verbose:
        print(f"== move done: red_cleared={state.red_cleared} moves_used={state.moves_used}")


def pick_moves(layout: np.ndarray, seed: int, n: int, prefer_cascade: bool) -> list[SwapMove]:
    """Choose a deterministic move list (greedy, or cascade-rich if asked)."""
    state = BoardState(layout, seed=seed)
    moves = []
    for _ in range(n):
        scored = state._scored_moves()
        if not scored:
            break
        if prefer_cascade:
            # probe each legal move on a copy, prefer the one with most steps
            best = None
            for ia, ib, _ in scored:
                probe = BoardState(layout, seed=seed, fill=False)
                probe.tiles = list(state.tiles)
                probe.rng.state = state.rng.state
                probe.red_cleared = state.red_cleared
                mv = probe._pair_move(ia, ib)
                steps = 0
                probe.tiles[ia], probe.tiles[ib] = probe.tiles[ib], probe.tiles[ia]
                while True:
                    matched = probe.find_matches()
                    if not matched:
                        break
                    steps += 1
                    probe._clear(matched)
                    probe._settle()
                    probe._refill()
                if best is None or steps > best[0]:
                    best = (steps, ia, ib)
            ia, ib = best[1], best[2]
        else:
            ia, ib, _ = max(scored, key=lambda t: t[2])
        move = state._pair_move(ia, ib)
        moves.append(move)
        state.apply_move(move)
    return moves


SCENARIOS = [
    # (name, layout rows or None for full board, seed, n_moves, prefer_cascade)
    ("golden_full_board", None, 42, 2, False),
    ("golden_gap_fallthrough", ["oo.oo", "o.ooo", "ooooo", "oo.oo", "ooooo", "ooooo"], 7, 2, False),
    ("golden_split_column", ["ooooo", "oo#oo", "ooooo", "o#ooo", "ooooo", "ooooo"], 3, 2, False),
    ("golden_small_4x4", ["oooo", "oooo", "oooo", "oooo"], 11, 3, False),
    ("golden_cascade", None, 1234, 2, True),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--only", default=None)
    args = parser.parse_args()
    FIXTURES.mkdir(parents=True, exist_ok=True)

    for name, rows, seed, n_moves, prefer_cascade in SCENARIOS:
        if args.only and args.only != name:
            continue
        layout = G.full_board() if rows is None else small_board(rows)
        moves = pick_moves(layout, seed, n_moves, prefer_cascade)
        state = BoardState(layout, seed=seed)
        initial = state.render_tiles()
        if args.verbose:
            print(f"\n######## {name} (seed {seed}) ########")
            print("layout:")
            print(G.render_ascii(layout))
            print("initial tiles:")
            print(initial)
        for move in moves:
            apply_move_verbose(state, move, args.verbose)
        move_str = ";".join(f"{m.a[0]},{m.a[1]},{m.b[0]},{m.b[1]}" for m in moves)
        fixture = "\n".join(
            [
                f"seed: {seed}",
                f"moves: {move_str}",
                f"red_cleared: {state.red_cleared}",
                f"moves_used: {state.moves_used}",
                "===",
                G.render_ascii(layout),
                "===",
                initial,
                "===",
                state.render_tiles(),
                "",
            ]
        )
        (FIXTURES / f"{name}.txt").write_text(fixture, encoding="utf-8")
        print(f"wrote {name}: {len(moves)} moves, red={state.red_cleared}")


if __name__ == "__main__":
    main()
