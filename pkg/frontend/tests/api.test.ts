import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { emptyGrid, gridsEqual, playAreaOrigin } from "../src/grid.js";
import { EditorState } from "../src/state.js";
import { BLOCK, LevelRecord, ModelInfo, PLAYFIELD, ValidationStats } from "../src/types.js";

/** Deterministic stand-in for the level service: generation depends only on
 *  the payload, validation only on the grid bytes. */
function fakeService() {
  const info: ModelInfo = {
    variant: "avalon",
    epoch: 2000,
    m_min: 17,
    m_max: 40,
    width_range: [4, 9],
    height_range: [4, 11],
    moves_range: [17, 39],
    valid_move_limit: 20,
    symmetries: ["vertical", "horizontal", "quadrant", "unknown"],
  };

  const generate = (payload: { width: number; height: number; symmetry: string; seed: number }): LevelRecord => {
    const grid = emptyGrid();
    const [x0, y0] = playAreaOrigin(payload.width, payload.height);
    for (let j = 0; j < payload.height; j++) {
      for (let i = 0; i < payload.width; i++) {
        grid[y0 + j][x0 + i] = (i + j + payload.seed) % 3 === 0 ? BLOCK : PLAYFIELD;
      }
    }
    return {
      grid,
      symmetry: payload.symmetry as LevelRecord["symmetry"],
      width: payload.width,
      height: payload.height,
      median_moves: 0,
      std_moves: 0,
      split: "train",
    };
  };

  const validate = (grid: number[][], runs: number): ValidationStats => {
    let checksum = 0;
    for (const row of grid) for (const v of row) checksum = (checksum * 31 + v) % 997;
    const median = 10 + (checksum % 30);
    return {
      median_moves: median,
      std_moves: (checksum % 7) / 2,
      success_rate: median <= 39 ? 1 : 0,
      valid: median <= 20,
      runs,
      move_cap: 39,
    };
  };

  const calls: string[] = [];
  const fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    calls.push(input);
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    const respond = (status: number, payload: unknown) =>
      new Response(JSON.stringify(payload), { status, headers: { "Content-Type": "application/json" } });
    if (input.endsWith("/api/model-info")) return respond(200, info);
    if (input.endsWith("/api/health")) return respond(200, { status: "ok", model_loaded: true });
    if (input.endsWith("/api/generate")) {
      if (body.width < 4 || body.width > 9) return respond(400, { detail: "width must be in [4,9]" });
      return respond(200, generate(body));
    }
    if (input.endsWith("/api/validate")) return respond(200, validate(body.grid, body.runs));
    return respond(404, { detail: "not found" });
  };

  return { info, fetchImpl, validate, calls };
}

describe("ApiClient against the mock service", () => {
  it("fetches model info", async () => {
    const svc = fakeService();
    const client = new ApiClient("", svc.fetchImpl);
    const info = await client.modelInfo();
    expect(info.variant).toBe("avalon");
    expect(info.moves_range).toEqual([17, 39]);
  });

  it("raises ApiError with the service detail on 400", async () => {
    const svc = fakeService();
    const client = new ApiClient("", svc.fetchImpl);
    await expect(
      client.generate({ width: 10, height: 6, symmetry: "vertical", moves: 18, seed: 0 }),
    ).rejects.toThrowError(ApiError);
    await expect(
      client.generate({ width: 10, height: 6, symmetry: "vertical", moves: 18, seed: 0 }),
    ).rejects.toThrow(/width must be in/);
  });

  it("omits moves for the unconditioned variant", async () => {
    const svc = fakeService();
    const seen: unknown[] = [];
    const spying = async (input: string, init?: RequestInit) => {
      if (input.endsWith("/api/generate")) seen.push(JSON.parse(String(init?.body)));
      return svc.fetchImpl(input, init);
    };
    const client = new ApiClient("", spying);
    await client.generate({ width: 5, height: 6, symmetry: "unknown", moves: null, seed: 1 });
    expect(seen[0]).not.toHaveProperty("moves");
  });

  it("same payload twice yields the identical grid (determinism pass-through)", async () => {
    const svc = fakeService();
    const client = new ApiClient("", svc.fetchImpl);
    const form = { width: 6, height: 8, symmetry: "quadrant" as const, moves: 18, seed: 42 };
    const a = await client.generate(form);
    const b = await client.generate(form);
    expect(gridsEqual(a.grid, b.grid)).toBe(true);
  });
});

describe("designer loop: generate -> edit -> validate -> export", () => {
  it("shows stats identical to a direct service call with the same payload", async () => {
    const svc = fakeService();
    const client = new ApiClient("", svc.fetchImpl);
    const state = new EditorState();
    state.setModelInfo(await client.modelInfo());
    state.form = { width: 6, height: 7, symmetry: "vertical", moves: 18, seed: 12 };

    const generated = await client.generate(state.form);
    state.setGeneratedLevel(generated);

    const [x0, y0] = playAreaOrigin(6, 7);
    state.editCell(x0 + 1, y0 + 1, BLOCK);

    const uiStats = await client.validate(state.grid, 10);
    state.applyValidation(uiStats);

    // direct call with the exact same payload must agree field by field
    const direct = svc.validate(state.grid, 10);
    expect(state.stats).toEqual(direct);
    expect(state.statsStale).toBe(false);

    // exported JSON re-imports to an identical grid
    const exported = state.exportJson();
    const fresh = new EditorState();
    fresh.importJson(exported);
    expect(gridsEqual(fresh.grid, state.grid)).toBe(true);
  });
});
