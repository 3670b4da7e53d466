/** Shared types mirroring the level service's JSON contracts. */

export const GAP = 0;
export const BLOCK = 1;
export const PLAYFIELD = 2;
export type CellKind = typeof GAP | typeof BLOCK | typeof PLAYFIELD;

export const BOARD_WIDTH = 9;
export const BOARD_HEIGHT = 11;

export type Symmetry = "vertical" | "horizontal" | "quadrant" | "unknown";

/** Level record as persisted in dataset files and returned by the service. */
export interface LevelRecord {
  grid: number[][]; // 11 rows of 9 cell codes, top row first
  symmetry: Symmetry;
  width: number;
  height: number;
  median_moves: number;
  std_moves: number;
  split: "train" | "val" | "test";
}

export interface ModelInfo {
  variant: "avalon" | "vanilla";
  epoch: number;
  m_min: number;
  m_max: number;
  width_range: [number, number];
  height_range: [number, number];
  moves_range: [number, number];
  valid_move_limit: number;
  symmetries: Symmetry[];
}

export interface ValidationStats {
  median_moves: number;
  std_moves: number;
  success_rate: number;
  valid: boolean;
  runs: number;
  move_cap: number;
}

export interface GenerateForm {
  width: number;
  height: number;
  symmetry: Symmetry;
  moves: number | null; // null for the variant without difficulty input
  seed: number;
}
