import { describe, expect, it } from "vitest";

import {
  cloneGrid,
  cycleKind,
  emptyGrid,
  exportRecord,
  gridsEqual,
  importRecord,
  measureSize,
  mirrorCells,
  playAreaOrigin,
  validateGrid,
} from "../src/grid.js";
import { BLOCK, GAP, PLAYFIELD } from "../src/types.js";

function openLevel(width: number, height: number) {
  const grid = emptyGrid();
  const [x0, y0] = playAreaOrigin(width, height);
  for (let j = 0; j < height; j++) {
    for (let i = 0; i < width; i++) {
      grid[y0 + j][x0 + i] = PLAYFIELD;
    }
  }
  return grid;
}

describe("grid helpers", () => {
  it("builds an 11x9 all-block grid", () => {
    const grid = emptyGrid();
    expect(grid).toHaveLength(11);
    expect(grid[0]).toHaveLength(9);
    expect(grid.flat().every((v) => v === BLOCK)).toBe(true);
  });

  it("centers the play area like the service does", () => {
    expect(playAreaOrigin(4, 4)).toEqual([2, 3]);
    expect(playAreaOrigin(9, 11)).toEqual([0, 0]);
    expect(playAreaOrigin(5, 6)).toEqual([2, 2]);
  });

  it("measures size from longest playfield runs", () => {
    expect(measureSize(openLevel(5, 6))).toEqual([5, 6]);
    expect(measureSize(openLevel(9, 11))).toEqual([9, 11]);
  });

  it("cycles cell kinds gap -> block -> playfield -> gap", () => {
    expect(cycleKind(GAP)).toBe(BLOCK);
    expect(cycleKind(BLOCK)).toBe(PLAYFIELD);
    expect(cycleKind(PLAYFIELD)).toBe(GAP);
  });

  it("rejects malformed grids with a message", () => {
    expect(validateGrid([])).toMatch(/11 rows/);
    const tenWide = Array.from({ length: 11 }, () => Array(10).fill(0));
    expect(validateGrid(tenWide)).toMatch(/row 0/);
    const bad = emptyGrid();
    bad[3][4] = 7;
    expect(validateGrid(bad)).toMatch(/\(4,3\)/);
    expect(validateGrid(emptyGrid())).toBeNull();
  });

  it("computes mirror partners per symmetry", () => {
    // 5x6 area at origin (2,2): cell (3,2) is local (1,0)
    expect(mirrorCells(3, 2, 5, 6, "vertical")).toEqual([[5, 2]]);
    expect(mirrorCells(3, 2, 5, 6, "horizontal")).toEqual([[3, 7]]);
    expect(new Set(mirrorCells(3, 2, 5, 6, "quadrant"))).toEqual(
      new Set([
        [5, 2],
        [3, 7],
        [5, 7],
      ]),
    );
    expect(mirrorCells(3, 2, 5, 6, "unknown")).toEqual([]);
    // center column of an odd width mirrors onto itself -> no partner
    expect(mirrorCells(4, 2, 5, 6, "vertical")).toEqual([]);
    // outside the play area -> no partners
    expect(mirrorCells(0, 0, 5, 6, "quadrant")).toEqual([]);
  });

  it("round-trips level records through JSON", () => {
    const grid = openLevel(6, 7);
    const record = exportRecord(grid, "vertical", 6, 7, { median_moves: 18, std_moves: 2 });
    const parsed = importRecord(JSON.stringify(record));
    expect(gridsEqual(parsed.grid, grid)).toBe(true);
    expect(parsed.symmetry).toBe("vertical");
    expect(parsed.median_moves).toBe(18);
  });

  it("import rejects wrong-shaped grids", () => {
    const record = exportRecord(openLevel(6, 7), "vertical", 6, 7);
    (record.grid as unknown as number[][]).pop();
    expect(() => importRecord(JSON.stringify(record))).toThrow(/11 rows/);
  });

  it("cloneGrid is deep", () => {
    const grid = openLevel(4, 4);
    const copy = cloneGrid(grid);
    copy[5][4] = GAP;
    expect(grid[5][4]).not.toBe(GAP);
  });
});
