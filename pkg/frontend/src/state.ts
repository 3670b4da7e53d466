/** Editor state machine: grid edits with undo, conditioner form bounds,
 *  validation staleness. Pure logic, no DOM, so it is fully unit-testable. */

import {
  Grid,
  cloneGrid,
  cycleKind,
  emptyGrid,
  exportRecord,
  gridsEqual,
  importRecord,
  mirrorCells,
  validateGrid,
} from "./grid.js";
import { GenerateForm, LevelRecord, ModelInfo, Symmetry, ValidationStats } from "./types.js";

export interface FormErrors {
  [field: string]: string;
}

export class EditorState {
  grid: Grid = emptyGrid();
  form: GenerateForm = { width: 6, height: 7, symmetry: "vertical", moves: null, seed: 0 };
  stats: ValidationStats | null = null;
  statsStale = false;
  dirty = false;
  symmetryLock = false;

  private undoStack: Grid[] = [];
  private info: ModelInfo | null = null;

  setModelInfo(info: ModelInfo): void {
    this.info = info;
    if (info.variant === "avalon" && this.form.moves === null) {
      this.form.moves = info.m_min;
    }
    if (info.variant === "vanilla") {
      this.form.moves = null;
    }
  }

  get modelInfo(): ModelInfo | null {
    return this.info;
  }

  /** Whether the difficulty input applies to the loaded model. */
  get supportsDifficulty(): boolean {
    return this.info?.variant === "avalon";
  }

  /** Client-side bounds check against the service-reported ranges. */
  validateForm(form: GenerateForm = this.form): FormErrors {
    const errors: FormErrors = {};
    const wr = this.info?.width_range ?? [4, 9];
    const hr = this.info?.height_range ?? [4, 11];
    if (!Number.isInteger(form.width) || form.width < wr[0] || form.width > wr[1]) {
      errors.width = `width must be in [${wr[0]},${wr[1]}]`;
    }
    if (!Number.isInteger(form.height) || form.height < hr[0] || form.height > hr[1]) {
      errors.height = `height must be in [${hr[0]},${hr[1]}]`;
    }
    if (this.supportsDifficulty) {
      const mr = this.info?.moves_range ?? [1, 39];
      if (form.moves === null || form.moves < mr[0] || form.moves > mr[1]) {
        errors.moves = `target moves must be in [${mr[0]}, ${mr[1]}]`;
      }
    } else if (form.moves !== null) {
      errors.moves = "model has no difficulty conditioner";
    }
    return errors;
  }

  /** Install a freshly generated level. */
  setGeneratedLevel(record: LevelRecord): void {
    const problem = validateGrid(record.grid);
    if (problem !== null) {
      throw new Error(problem);
    }
    this.undoStack = [];
    this.grid = cloneGrid(record.grid);
    this.dirty = false;
    this.stats = null;
    this.statsStale = false;
  }

  /** Paint one cell (cycling when no kind given); mirrors under the lock. */
  editCell(x: number, y: number, kind?: number): void {
    const target = kind ?? cycleKind(this.grid[y][x]);
    this.undoStack.push(cloneGrid(this.grid));
    this.grid[y][x] = target;
    if (this.symmetryLock) {
      for (const [mx, my] of mirrorCells(
        x,
        y,
        this.form.width,
        this.form.height,
        this.form.symmetry,
      )) {
        this.grid[my][mx] = target;
      }
    }
    this.dirty = true;
    if (this.stats !== null) {
      this.statsStale = true;
    }
  }

  undo(): boolean {
    const previous = this.undoStack.pop();
    if (previous === undefined) {
      return false;
    }
    this.grid = previous;
    this.dirty = this.undoStack.length > 0;
    if (this.stats !== null) {
      this.statsStale = true;
    }
    return true;
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  applyValidation(stats: ValidationStats): void {
    this.stats = stats;
    this.statsStale = false;
  }

  /** Level JSON matching the dataset schema, grid identical to the canvas. */
  exportJson(): string {
    const record = exportRecord(
      this.grid,
      this.form.symmetry,
      this.form.width,
      this.form.height,
      this.stats ?? undefined,
    );
    return JSON.stringify(record, null, 2);
  }

  importJson(text: string): void {
    const record = importRecord(text);
    this.undoStack = [];
    this.grid = cloneGrid(record.grid);
    this.form.width = record.width;
    this.form.height = record.height;
    this.form.symmetry = record.symmetry as Symmetry;
    this.dirty = false;
    this.stats = null;
    this.statsStale = false;
  }

  /** True when the on-screen grid equals the given record's grid. */
  matchesRecord(record: LevelRecord): boolean {
    return gridsEqual(this.grid, record.grid);
  }
}
