/** DOM view layer: board canvas, conditioner form, stats panel. */

import { Grid } from "./grid.js";
import { EditorState } from "./state.js";
import { BLOCK, BOARD_HEIGHT, BOARD_WIDTH, GAP, PLAYFIELD, ValidationStats } from "./types.js";

// Level image convention: GAP cells black, BLOCK cells red, PLAYFIELD dark red.
const CELL_COLORS: Record<number, string> = {
  [GAP]: "#000000",
  [BLOCK]: "#e03131",
  [PLAYFIELD]: "#7a1212",
};

export function renderBoard(
  container: HTMLElement,
  grid: Grid,
  onCellClick: (x: number, y: number) => void,
): void {
  container.textContent = "";
  const table = document.createElement("div");
  table.className = "board";
  for (let y = 0; y < BOARD_HEIGHT; y++) {
    for (let x = 0; x < BOARD_WIDTH; x++) {
      const cell = document.createElement("button");
      cell.className = "cell";
      cell.style.background = CELL_COLORS[grid[y][x]] ?? "#333";
      cell.title = `(${x},${y})`;
      cell.addEventListener("click", () => onCellClick(x, y));
      table.appendChild(cell);
    }
  }
  container.appendChild(table);
}

export function renderStats(panel: HTMLElement, state: EditorState): void {
  panel.textContent = "";
  const stats: ValidationStats | null = state.stats;
  if (stats === null) {
    panel.append(textEl("p", "No validation yet."));
    return;
  }
  const badge = textEl("span", stats.valid ? "VALID" : "INVALID");
  badge.className = `badge ${stats.valid ? "badge-valid" : "badge-invalid"}`;
  panel.appendChild(badge);
  if (state.statsStale) {
    const stale = textEl("span", "stale - grid edited since validation");
    stale.className = "badge badge-stale";
    panel.appendChild(stale);
  }
  panel.append(
    textEl("p", `median moves: ${stats.median_moves.toFixed(1)} (cap ${stats.move_cap})`),
    textEl("p", `std: ${stats.std_moves.toFixed(2)}  success rate: ${(100 * stats.success_rate).toFixed(0)}%`),
    textEl("p", `${stats.runs} bot runs`),
  );
  if (stats.median_moves > stats.move_cap) {
    panel.append(textEl("p", "bot never solved it"));
  }
}

export function textEl(tag: string, text: string): HTMLElement {
  const el = document.createElement(tag);
  el.textContent = text;
  return el;
}
