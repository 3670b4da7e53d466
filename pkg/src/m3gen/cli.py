"""Command-line pipeline: dataset generation through evaluation and serving.

Stages hand off through JSON artifacts so each one is independently
resumable: gen-dataset -> annotate -> train -> select -> evaluate, plus
ad-hoc generation, the two-variant ablation and the HTTP service.
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import click

from . import grid as G
from .bot import BotConfig
from .dataset import (
    DatasetError,
    annotate as annotate_levels,
    generate_main_style,
    generate_stylized,
    load_manifest,
    save_manifest,
    unannotated_manifest,
)
from .grid import ConditionSpec, GridError, SymmetryKind
from .model import (
    ModelConfig,
    ModelError,
    generate as model_generate,
    load_checkpoint,
    train as train_model,
)
from .rng import SplitMix64


@click.group()
def main():
    """Difficulty-validated match-3 level generation."""


def _fail(message: str) -> None:
    raise click.ClickException(message)


@main.command("gen-dataset")
@click.option("--style", type=click.Choice(["main", "stylized"]), default="main")
@click.option("--count", type=int, default=198, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def cmd_gen_dataset(style: str, count: int, seed: int, out: str):
    """Generate a procedural level set (statistics unfilled)."""
    try:
        gen = generate_main_style if style == "main" else generate_stylized
        levels = gen(count, seed)
        manifest = unannotated_manifest(levels, style, seed)
        save_manifest(manifest, out)
    except DatasetError as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(levels)} {style} levels to {out}")


@main.command("annotate")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--runs", type=int, default=30, show_default=True)
@click.option("--move-cap", type=int, default=39, show_default=True)
@click.option("--base-seed", type=int, default=BotConfig().base_seed)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def cmd_annotate(in_path: str, runs: int, move_cap: int, base_seed: int, jobs: int, out: str):
    """Bot-validate every level and fill medians, stds and splits."""
    try:
        manifest = load_manifest(in_path)
        config = BotConfig(run_count=runs, move_cap=move_cap, base_seed=base_seed)
        annotated = annotate_levels(
            [lv.grid for lv in manifest.levels],
            config,
            style=manifest.style,
            generator_seed=manifest.generator_seed,
            n_jobs=jobs,
        )
        save_manifest(annotated, out)
    except DatasetError as exc:
        _fail(str(exc))
    medians = [lv.median_moves for lv in annotated.train_levels()]
    click.echo(
        f"annotated {len(annotated.levels)} levels "
        f"(train medians {min(medians):.1f}..{max(medians):.1f}) to {out}"
    )


@main.command("train")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--variant", type=click.Choice(["avalon", "vanilla"]), default="avalon")
@click.option("--epochs", type=int, default=24000, show_default=True)
@click.option("--batch", type=int, default=100, show_default=True)
@click.option("--lr", type=float, default=None, help="Default: 1e-5 avalon, 5e-6 vanilla.")
@click.option("--checkpoint-interval", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@click.option("--progress-every", type=int, default=0, help="Print progress every N epochs.")
def cmd_train(dataset, variant, epochs, batch, lr, checkpoint_interval, seed, out_dir, progress_every):
    """Train one variant; checkpoints land in --out-dir."""
    try:
        manifest = load_manifest(dataset)
        config = ModelConfig(
            variant=variant,
            learning_rate=lr,
            epochs=epochs,
            batch_size=batch,
            checkpoint_interval=checkpoint_interval,
            seed=seed,
        )
        result = train_model(manifest, config, out_dir, progress_every=progress_every)
    except (DatasetError, ModelError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {len(result.checkpoint_paths)} checkpoints to {out_dir}")


@main.command("select")
@click.option("--checkpoint-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seed", type=int, default=0xD1FF)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Copy the winner here.")
def cmd_select(checkpoint_dir, dataset, seed, out):
    """Pick the checkpoint maximizing mean(diversity, size, tile dist)."""
    from .metrics import SweepSpec, select_checkpoint

    manifest = load_manifest(dataset)
    paths = sorted(Path(checkpoint_dir).glob("*.npz"))
    if not paths:
        _fail(f"no checkpoints in {checkpoint_dir}")
    best, score = select_checkpoint(paths, manifest, SweepSpec(seed=seed))
    click.echo(f"best checkpoint: {best} (selection score {score:.2f})")
    if out:
        shutil.copyfile(best, out)
        click.echo(f"copied to {out}")


@main.command("generate")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--width", type=int, required=True)
@click.option("--height", type=int, required=True)
@click.option(
    "--symmetry",
    type=click.Choice([s.value for s in SymmetryKind]),
    default="unknown",
    show_default=True,
)
@click.option("--moves", type=float, default=None, help="Difficulty target (avalon only).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "ascii"]), default="ascii")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_generate(model_path, width, height, symmetry, moves, seed, count, fmt, out):
    """Generate levels from a checkpoint."""
    try:
        size = G.check_size(width, height)
    except GridError as exc:
        _fail(str(exc))
    checkpoint = load_checkpoint(model_path)
    if moves is None and checkpoint.config.conditions_on_difficulty:
        _fail(
            "this model conditions on difficulty: pass --moves in "
            f"[{checkpoint.m_min:.1f}, 39]"
        )
    rng = SplitMix64(seed)
    spec = ConditionSpec(size=size, symmetry=SymmetryKind(symmetry), target_moves=moves)
    try:
        levels = [model_generate(checkpoint, spec, rng) for _ in range(count)]
    except ModelError as exc:
        _fail(str(exc))
    if fmt == "ascii":
        text = "\n\n".join(G.render_ascii(lv) for lv in levels) + "\n"
    else:
        records = [
            {
                "grid": lv.astype(int).tolist(),
                "symmetry": symmetry,
                "width": width,
                "height": height,
                "median_moves": 0.0,
                "std_moves": 0.0,
                "split": "train",
            }
            for lv in levels
        ]
        text = json.dumps(records if count > 1 else records[0], indent=2) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {count} level(s) to {out}")
    else:
        click.echo(text, nl=False)


@main.command("evaluate")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seed", type=int, default=0xD1FF)
@click.option("--runs", type=int, default=30, show_default=True, help="Bot runs per level.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--details-csv", type=click.Path(dir_okay=False), default=None)
def cmd_evaluate(model_path, dataset, seed, runs, jobs, out, details_csv):
    """Run the 144-level sweep and the full metric suite."""
    from .metrics import SweepSpec, compute_report

    manifest = load_manifest(dataset)
    checkpoint = load_checkpoint(model_path)
    report = compute_report(
        checkpoint,
        manifest,
        SweepSpec(seed=seed),
        BotConfig(run_count=runs),
        n_jobs=jobs,
    )
    report.save(out, details_csv)
    click.echo(json.dumps(report.to_dict(), indent=2))


@main.command("ablation")
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--epochs", type=int, default=24000, show_default=True)
@click.option("--checkpoint-interval", type=int, default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--sweep-seed", type=int, default=0xD1FF)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def cmd_ablation(dataset, epochs, checkpoint_interval, seed, sweep_seed, jobs, out_dir):
    """Train both variants on identical data and compare Table-style metrics."""
    from .metrics import run_ablation

    manifest = load_manifest(dataset)
    kwargs = dict(epochs=epochs, checkpoint_interval=checkpoint_interval, seed=seed)
    result = run_ablation(
        manifest,
        ModelConfig(variant="avalon", **kwargs),
        ModelConfig(variant="vanilla", **kwargs),
        out_dir,
        sweep_seed=sweep_seed,
        n_jobs=jobs,
    )
    out_path = Path(out_dir) / "ablation_report.json"
    out_path.write_text(json.dumps(result.to_dict(), indent=2), encoding="utf-8")
    click.echo(json.dumps(result.to_dict(), indent=2))
    click.echo(f"report written to {out_path}")


@main.command("serve")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8420, show_default=True)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None)
@click.option("--validate-workers", type=int, default=2, show_default=True)
def cmd_serve(model_path, host, port, static_dir, validate_workers):
    """Serve generation/validation over HTTP (plus the designer UI if built)."""
    import uvicorn

    from .service import create_app

    app = create_app(model_path, static_dir=static_dir, max_validation_workers=validate_workers)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
