/** Grid helpers: sizing, mirror coordinates, (de)serialization. */

import { BLOCK, BOARD_HEIGHT, BOARD_WIDTH, CellKind, LevelRecord, PLAYFIELD, Symmetry } from "./types.js";

export type Grid = number[][];

export function emptyGrid(): Grid {
  return Array.from({ length: BOARD_HEIGHT }, () => Array(BOARD_WIDTH).fill(BLOCK));
}

export function cloneGrid(grid: Grid): Grid {
  return grid.map((row) => row.slice());
}

export function gridsEqual(a: Grid, b: Grid): boolean {
  return a.length === b.length && a.every((row, y) => row.every((v, x) => v === b[y][x]));
}

export function playAreaOrigin(width: number, height: number): [number, number] {
  return [Math.floor((BOARD_WIDTH - width) / 2), Math.floor((BOARD_HEIGHT - height) / 2)];
}

/** Mirror partners of a cell under the given symmetry and play area.
 *  Cells outside the play area (or under "unknown") have none. */
export function mirrorCells(
  x: number,
  y: number,
  width: number,
  height: number,
  symmetry: Symmetry,
): Array<[number, number]> {
  const [x0, y0] = playAreaOrigin(width, height);
  const i = x - x0;
  const j = y - y0;
  if (i < 0 || j < 0 || i >= width || j >= height || symmetry === "unknown") {
    return [];
  }
  const mx = x0 + (width - 1 - i);
  const my = y0 + (height - 1 - j);
  const partners: Array<[number, number]> = [];
  if (symmetry === "vertical" || symmetry === "quadrant") partners.push([mx, y]);
  if (symmetry === "horizontal" || symmetry === "quadrant") partners.push([x, my]);
  if (symmetry === "quadrant") partners.push([mx, my]);
  return partners.filter(([px, py]) => px !== x || py !== y);
}

export function validateGrid(grid: unknown): string | null {
  if (!Array.isArray(grid) || grid.length !== BOARD_HEIGHT) {
    return `grid must have ${BOARD_HEIGHT} rows`;
  }
  for (let y = 0; y < BOARD_HEIGHT; y++) {
    const row = (grid as unknown[])[y];
    if (!Array.isArray(row) || row.length !== BOARD_WIDTH) {
      return `row ${y} must have ${BOARD_WIDTH} cells`;
    }
    for (let x = 0; x < BOARD_WIDTH; x++) {
      const v = row[x];
      if (v !== 0 && v !== 1 && v !== 2) {
        return `cell (${x},${y}) has invalid code ${String(v)}`;
      }
    }
  }
  return null;
}

/** Measured size: longest consecutive PLAYFIELD run over rows and columns. */
export function measureSize(grid: Grid): [number, number] {
  const longest = (cells: number[]): number => {
    let best = 0;
    let run = 0;
    for (const v of cells) {
      run = v === PLAYFIELD ? run + 1 : 0;
      best = Math.max(best, run);
    }
    return best;
  };
  let width = 0;
  for (let y = 0; y < BOARD_HEIGHT; y++) width = Math.max(width, longest(grid[y]));
  let height = 0;
  for (let x = 0; x < BOARD_WIDTH; x++) {
    height = Math.max(height, longest(grid.map((row) => row[x])));
  }
  return [width, height];
}

export function exportRecord(
  grid: Grid,
  symmetry: Symmetry,
  width: number,
  height: number,
  stats?: { median_moves: number; std_moves: number },
): LevelRecord {
  return {
    grid: cloneGrid(grid),
    symmetry,
    width,
    height,
    median_moves: stats?.median_moves ?? 0,
    std_moves: stats?.std_moves ?? 0,
    split: "train",
  };
}

export function importRecord(text: string): LevelRecord {
  const record = JSON.parse(text) as LevelRecord;
  const problem = validateGrid(record.grid);
  if (problem !== null) {
    throw new Error(problem);
  }
  return record;
}

export function cycleKind(kind: number): CellKind {
  return ((kind + 1) % 3) as CellKind;
}
