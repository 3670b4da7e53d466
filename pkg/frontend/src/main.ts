/** Application bootstrap: wires the editor state to the DOM and the service. */

import { ApiClient, ApiError } from "./api.js";
import { renderBoard, renderStats, textEl } from "./render.js";
import { EditorState } from "./state.js";
import { Symmetry } from "./types.js";

const api = new ApiClient("");
const state = new EditorState();

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

let generationCounter = 0; // cancel-and-replace for in-flight generations
let validationInFlight = false;

function readForm(): void {
  state.form.width = Number((<HTMLInputElement>$("width")).value);
  state.form.height = Number((<HTMLInputElement>$("height")).value);
  state.form.symmetry = (<HTMLSelectElement>$("symmetry")).value as Symmetry;
  state.form.seed = Number((<HTMLInputElement>$("seed")).value) || 0;
  if (state.supportsDifficulty) {
    state.form.moves = Number((<HTMLInputElement>$("moves")).value);
  } else {
    state.form.moves = null;
  }
}

function showFormErrors(errors: Record<string, string>): void {
  for (const field of ["width", "height", "moves", "seed"]) {
    const slot = document.getElementById(`err-${field}`);
    if (slot) slot.textContent = errors[field] ?? "";
  }
}

function refreshBoard(): void {
  renderBoard($("board"), state.grid, (x, y) => {
    state.editCell(x, y);
    refreshBoard();
    renderStats($("stats"), state);
    (<HTMLButtonElement>$("undo")).disabled = !state.canUndo;
  });
}

async function doGenerate(): Promise<void> {
  readForm();
  const errors = state.validateForm();
  showFormErrors(errors);
  if (Object.keys(errors).length > 0) return;
  const ticket = ++generationCounter;
  try {
    const record = await api.generate(state.form);
    if (ticket !== generationCounter) return; // superseded
    state.setGeneratedLevel(record);
    $("conditioners").textContent =
      `${record.width}x${record.height} ${record.symmetry}` +
      (state.form.moves !== null ? ` ${state.form.moves} moves` : "");
    refreshBoard();
    renderStats($("stats"), state);
  } catch (err) {
    if (err instanceof ApiError && typeof err.detail === "string") {
      showFormErrors({ width: err.detail });
    } else {
      showFormErrors({ width: String(err) });
    }
  }
}

async function doValidate(runs: number): Promise<void> {
  if (validationInFlight) return; // at most one in flight
  validationInFlight = true;
  $("validate").setAttribute("disabled", "true");
  $("validate-full").setAttribute("disabled", "true");
  try {
    const stats = await api.validate(state.grid, runs);
    state.applyValidation(stats);
    renderStats($("stats"), state);
  } catch (err) {
    const panel = $("stats");
    panel.textContent = "";
    panel.append(textEl("p", `validation failed: ${String(err)} - retry below`));
  } finally {
    validationInFlight = false;
    $("validate").removeAttribute("disabled");
    $("validate-full").removeAttribute("disabled");
  }
}

async function boot(): Promise<void> {
  try {
    const info = await api.modelInfo();
    state.setModelInfo(info);
    $("model-info").textContent =
      `${info.variant} checkpoint, epoch ${info.epoch}, ` +
      `moves ${info.m_min.toFixed(1)}..${info.moves_range[1]}`;
    const movesRow = $("moves-row");
    movesRow.style.display = state.supportsDifficulty ? "" : "none";
    if (state.supportsDifficulty) {
      const moves = <HTMLInputElement>$("moves");
      moves.min = String(info.moves_range[0]);
      moves.max = String(info.moves_range[1]);
      moves.value = String(info.m_min);
    }
  } catch {
    $("model-info").textContent = "service unavailable or still loading";
  }

  $("generate").addEventListener("click", () => void doGenerate());
  $("validate").addEventListener("click", () => void doValidate(10));
  $("validate-full").addEventListener("click", () => void doValidate(30));
  $("undo").addEventListener("click", () => {
    state.undo();
    refreshBoard();
    renderStats($("stats"), state);
    (<HTMLButtonElement>$("undo")).disabled = !state.canUndo;
  });
  $("symmetry-lock").addEventListener("change", (ev) => {
    state.symmetryLock = (<HTMLInputElement>ev.target).checked;
  });
  $("export").addEventListener("click", () => {
    (<HTMLTextAreaElement>$("json")).value = state.exportJson();
  });
  $("import").addEventListener("click", () => {
    try {
      state.importJson((<HTMLTextAreaElement>$("json")).value);
      (<HTMLInputElement>$("width")).value = String(state.form.width);
      (<HTMLInputElement>$("height")).value = String(state.form.height);
      (<HTMLSelectElement>$("symmetry")).value = state.form.symmetry;
      refreshBoard();
      renderStats($("stats"), state);
    } catch (err) {
      $("stats").textContent = `import failed: ${String(err)}`;
    }
  });

  refreshBoard();
  renderStats($("stats"), state);
}

void boot();
