"""HTTP service exposing generation and bot validation to the designer UI.

JSON over HTTP/1.1:

- ``GET  /api/health``      liveness probe
- ``GET  /api/model-info``  variant, epoch, difficulty bounds, size bounds
- ``POST /api/generate``    conditioners -> level record (dataset schema)
- ``POST /api/validate``    grid -> bot statistics and validity verdict

The checkpoint is loaded once and shared read-only; requests never mutate
it. Bot validations are bounded by a worker semaphore so a burst of
validation requests cannot starve generation. Invalid payloads return 400
with field-level messages; requests arriving before the model finished
loading return 503. When a built UI bundle directory is provided it is
served at ``/``.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import grid as G
from .bot import BotConfig, VALID_MOVE_LIMIT, evaluate_level
from .grid import ConditionSpec, GridError, SymmetryKind
from .model import MAX_TARGET_MOVES, ModelError, generate, load_checkpoint
from .rng import SplitMix64

DEFAULT_VALIDATION_RUNS = 30


class GenerateRequest(BaseModel):
    width: int
    height: int
    symmetry: str = "unknown"
    moves: float | None = None
    seed: int = 0


class ValidateRequest(BaseModel):
    grid: list[list[int]]
    runs: int = Field(default=DEFAULT_VALIDATION_RUNS, ge=1, le=200)
    move_cap: int = Field(default=39, ge=1, le=99)


def _level_record(grid: np.ndarray, symmetry: str, width: int, height: int) -> dict:
    return {
        "grid": grid.astype(int).tolist(),
        "symmetry": symmetry,
        "width": width,
        "height": height,
        "median_moves": 0.0,
        "std_moves": 0.0,
        "split": "train",
    }


def create_app(
    checkpoint_path: str | Path | None,
    static_dir: str | Path | None = None,
    max_validation_workers: int = 2,
    defer_load: bool = False,
) -> FastAPI:
    """Build the service app. ``defer_load=True`` starts without a model
    (requests see 503 until ``app.state.load_model()`` runs)."""
    app = FastAPI(title="m3gen level service")
    app.state.checkpoint = None
    validation_slots = threading.Semaphore(max_validation_workers)

    def load_model() -> None:
        if checkpoint_path is not None:
            app.state.checkpoint = load_checkpoint(checkpoint_path)

    app.state.load_model = load_model
    if not defer_load:
        load_model()

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        errors = [
            {"field": ".".join(str(p) for p in e["loc"] if p != "body"), "message": e["msg"]}
            for e in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": errors})

    def model_or_503():
        ckpt = app.state.checkpoint
        if ckpt is None:
            return None, JSONResponse(status_code=503, content={"detail": "model loading"})
        return ckpt, None

    @app.get("/api/health")
    def health():
        return {"status": "ok", "model_loaded": app.state.checkpoint is not None}

    @app.get("/api/model-info")
    def model_info():
        ckpt, err = model_or_503()
        if err:
            return err
        return {
            "variant": ckpt.config.variant,
            "epoch": ckpt.epoch,
            "m_min": ckpt.m_min,
            "m_max": ckpt.m_max,
            "width_range": list(G.WIDTH_RANGE),
            "height_range": list(G.HEIGHT_RANGE),
            "moves_range": [ckpt.m_min, MAX_TARGET_MOVES],
            "valid_move_limit": VALID_MOVE_LIMIT,
            "symmetries": [s.value for s in SymmetryKind],
        }

    @app.post("/api/generate")
    def api_generate(req: GenerateRequest):
        ckpt, err = model_or_503()
        if err:
            return err
        try:
            size = G.check_size(req.width, req.height)
            symmetry = SymmetryKind(req.symmetry)
        except (GridError, ValueError) as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        spec = ConditionSpec(size=size, symmetry=symmetry, target_moves=req.moves)
        try:
            level = generate(ckpt, spec, SplitMix64(req.seed))
        except ModelError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        return _level_record(level, symmetry.value, size.width, size.height)

    @app.post("/api/validate")
    def api_validate(req: ValidateRequest):
        try:
            grid = G.check_grid(np.asarray(req.grid, dtype=np.int64))
        except (GridError, ValueError) as exc:
            return JSONResponse(status_code=400, content={"detail": f"grid: {exc}"})
        config = BotConfig(run_count=req.runs, move_cap=req.move_cap)
        with validation_slots:
            stats = evaluate_level(grid, config)
        return {
            "median_moves": stats.median_moves,
            "std_moves": stats.std_moves,
            "success_rate": stats.success_rate,
            "valid": stats.median_moves <= VALID_MOVE_LIMIT,
            "runs": req.runs,
            "move_cap": req.move_cap,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
