"""Inference sweep, metric suite, checkpoint selection and the ablation runner.

All metrics operate on one deterministic sweep: every admissible size (48)
crossed with the three mirror symmetries, 144 generated levels total. The
difficulty-conditioned variant draws its per-level move target uniformly
between the training minimum and the 20-move validity threshold.

Metrics:
- size accuracy: generated level measures exactly the conditioned size
- symmetry accuracy: the requested play area equals its requested mirror(s);
  structural postprocessing makes this 100% by construction
- diversity accuracy: fraction of unordered level pairs that differ anywhere
- difficulty accuracy: bot-validated median within one validated standard
  deviation of the conditioned target, plus the distance statistics
- plagiarism score: exact full-grid matches against the training split
- valid level percentage: bot-validated median at most 20 moves
- tile distribution accuracy: per (cell kind x board size) bucket with at
  least 3 training levels, the median per-level inference count of that kind
  inside the play area must fall within [Q1, Q3] (linear-interpolation
  quartiles) of the training counts

Checkpoint selection maximizes the unweighted mean of diversity, size and
tile distribution accuracy over a fixed-seed sweep; difficulty accuracy is
deliberately excluded (bot validation of every sweep is too costly to run
per checkpoint).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import grid as G
from .bot import BotConfig, PlaythroughStats, VALID_MOVE_LIMIT, evaluate_levels
from .dataset import DatasetManifest, Split
from .grid import ConditionSpec, LevelSize, SymmetryKind
from .model import ModelCheckpoint, ModelConfig, generate, load_checkpoint, train
from .rng import SplitMix64

SWEEP_SYMMETRIES = (SymmetryKind.VERTICAL, SymmetryKind.HORIZONTAL, SymmetryKind.QUADRANT)


@dataclass(frozen=True)
class SweepSpec:
    sizes: tuple[LevelSize, ...] = tuple(G.all_sizes())
    symmetries: tuple[SymmetryKind, ...] = SWEEP_SYMMETRIES
    difficulty_max: float = float(VALID_MOVE_LIMIT)
    seed: int = 0xD1FF

    @property
    def total_levels(self) -> int:
        return len(self.sizes) * len(self.symmetries)


@dataclass
class GeneratedLevel:
    condition: ConditionSpec
    grid: np.ndarray
    stats: PlaythroughStats | None = None  # filled by validate_results


@dataclass
class MetricsReport:
    variant: str
    epoch: int
    size_accuracy: float
    diversity_accuracy: float
    plagiarism_score: float
    symmetry_accuracy: float
    valid_level_pct: float
    tile_distribution_accuracy: float
    difficulty_accuracy: float | None = None
    difficulty_distance_mean: float | None = None
    difficulty_distance_std: float | None = None
    details: list[dict] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "epoch": self.epoch,
            "size_accuracy": self.size_accuracy,
            "diversity_accuracy": self.diversity_accuracy,
            "plagiarism_score": self.plagiarism_score,
            "symmetry_accuracy": self.symmetry_accuracy,
            "difficulty_accuracy": self.difficulty_accuracy,
            "difficulty_distance_mean": self.difficulty_distance_mean,
            "difficulty_distance_std": self.difficulty_distance_std,
            "valid_levels": self.valid_level_pct,
            "tile_distribution_accuracy": self.tile_distribution_accuracy,
        }

    def save(self, path: str | Path, details_csv: str | Path | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")
        if details_csv and self.details:
            with Path(details_csv).open("w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(self.details[0]))
                writer.writeheader()
                writer.writerows(self.details)


# -- sweep -------------------------------------------------------------------


def inference_sweep(
    checkpoint: ModelCheckpoint, manifest: DatasetManifest, spec: SweepSpec = SweepSpec()
) -> list[GeneratedLevel]:
    """Generate one level per (size, symmetry) pair, deterministically."""
    rng = SplitMix64(spec.seed)
    conditioned = checkpoint.config.conditions_on_difficulty
    out: list[GeneratedLevel] = []
    for size in spec.sizes:
        for symmetry in spec.symmetries:
            target = None
            if conditioned:
                lo = min(manifest.m_min, spec.difficulty_max)
                target = rng.uniform_in(lo, spec.difficulty_max)
            cond = ConditionSpec(size=size, symmetry=symmetry, target_moves=target)
            out.append(GeneratedLevel(condition=cond, grid=generate(checkpoint, cond, rng)))
    return out


def validate_results(
    results: list[GeneratedLevel], bot_config: BotConfig = BotConfig(), n_jobs: int = 1
) -> None:
    """Bot-validate every generated level in place (same protocol as dataset
    annotation)."""
    stats = evaluate_levels([r.grid for r in results], bot_config, n_jobs=n_jobs)
    for r, st in zip(results, stats):
        r.stats = st


# -- individual metrics ------------------------------------------------------


def size_accuracy(results: list[GeneratedLevel]) -> float:
    hits = 0
    for r in results:
        try:
            hits += G.measure_size(r.grid) == r.condition.size
        except G.GridError:
            pass  # no PLAYFIELD at all counts as a miss
    return 100.0 * hits / len(results)


def symmetry_accuracy(results: list[GeneratedLevel]) -> float:
    """Requested mirror predicate on the requested play area."""
    hits = sum(
        G.is_mirror_symmetric(r.grid, r.condition.size, r.condition.symmetry) for r in results
    )
    return 100.0 * hits / len(results)


def diversity_accuracy(results: list[GeneratedLevel]) -> float:
    """Fraction of unordered pairs whose grids differ in at least one cell."""
    if len(results) < 2:
        raise ValueError("diversity needs at least two levels")
    keys = [r.grid.tobytes() for r in results]
    n = len(keys)
    duplicate_pairs = 0
    counts: dict[bytes, int] = {}
    for k in keys:
        duplicate_pairs += counts.get(k, 0)
        counts[k] = counts.get(k, 0) + 1
    total_pairs = n * (n - 1) // 2
    return 100.0 * (total_pairs - duplicate_pairs) / total_pairs


def difficulty_accuracy(
    results: list[GeneratedLevel],
) -> tuple[float, float, float]:
    """(accuracy %, distance mean, distance std) against validated medians.

    A level counts as accurate when the conditioned move target lies within
    one validated standard deviation of the validated median (inclusive).
    Results must have been bot-validated first.
    """
    targets = []
    medians = []
    stds = []
    for r in results:
        if r.condition.target_moves is None:
            raise ValueError("difficulty accuracy needs difficulty-conditioned results")
        if r.stats is None:
            raise ValueError("results must be validated first")
        targets.append(r.condition.target_moves)
        medians.append(r.stats.median_moves)
        stds.append(r.stats.std_moves)
    targets = np.asarray(targets)
    medians = np.asarray(medians)
    stds = np.asarray(stds)
    distances = np.abs(targets - medians)
    accurate = distances <= stds
    return (
        100.0 * float(accurate.mean()),
        float(distances.mean()),
        float(distances.std()),
    )


def plagiarism_score(results: list[GeneratedLevel], manifest: DatasetManifest) -> float:
    """Percent of generated grids exactly equal to some training grid."""
    train_keys = {lv.grid.tobytes() for lv in manifest.train_levels()}
    hits = sum(r.grid.tobytes() in train_keys for r in results)
    return 100.0 * hits / len(results)


def valid_level_pct(results: list[GeneratedLevel]) -> float:
    """Percent of levels whose validated median is at most 20 moves."""
    for r in results:
        if r.stats is None:
            raise ValueError("results must be validated first")
    return 100.0 * float(
        np.mean([r.stats.median_moves <= VALID_MOVE_LIMIT for r in results])
    )


def dataset_valid_pct(manifest: DatasetManifest, split: Split = Split.TRAIN) -> float:
    levels = manifest.split_levels(split)
    return 100.0 * float(np.mean([lv.median_moves <= VALID_MOVE_LIMIT for lv in levels]))


def _kind_counts(grid: np.ndarray, size: LevelSize) -> dict[int, int]:
    area = G.play_area(grid, size)
    return {int(k): int((area == k).sum()) for k in range(G.N_CELL_KINDS)}


def tile_distribution_accuracy(
    results: list[GeneratedLevel],
    manifest: DatasetManifest,
    min_bucket: int = 3,
) -> float:
    """Quartile containment of per-size, per-kind play-area cell counts.

    Buckets are (cell kind x board size) for sizes with at least
    ``min_bucket`` training levels. A bucket is accurate when the median of
    the inference counts lies within [Q1, Q3] of the training counts,
    inclusive, with linear-interpolation quartiles.
    """
    train_by_size: dict[LevelSize, list[dict[int, int]]] = {}
    for lv in manifest.train_levels():
        train_by_size.setdefault(lv.size, []).append(_kind_counts(lv.grid, lv.size))
    infer_by_size: dict[LevelSize, list[dict[int, int]]] = {}
    for r in results:
        size = r.condition.size
        infer_by_size.setdefault(size, []).append(_kind_counts(r.grid, size))

    accurate = 0
    total = 0
    for size, train_counts in sorted(train_by_size.items()):
        if len(train_counts) < min_bucket or size not in infer_by_size:
            continue
        for kind in range(G.N_CELL_KINDS):
            train_vals = np.array([c[kind] for c in train_counts], dtype=float)
            infer_vals = np.array([c[kind] for c in infer_by_size[size]], dtype=float)
            q1, q3 = np.percentile(train_vals, [25.0, 75.0])
            total += 1
            if q1 <= float(np.median(infer_vals)) <= q3:
                accurate += 1
    if total == 0:
        raise ValueError("insufficient training coverage")
    return 100.0 * accurate / total


# -- assembled report --------------------------------------------------------


def compute_report(
    checkpoint: ModelCheckpoint,
    manifest: DatasetManifest,
    spec: SweepSpec = SweepSpec(),
    bot_config: BotConfig = BotConfig(),
    n_jobs: int = 1,
    results: list[GeneratedLevel] | None = None,
) -> MetricsReport:
    """Full metric suite for one checkpoint (includes bot validation)."""
    if results is None:
        results = inference_sweep(checkpoint, manifest, spec)
    if any(r.stats is None for r in results):
        validate_results(results, bot_config, n_jobs=n_jobs)
    conditioned = checkpoint.config.conditions_on_difficulty
    diff_acc = diff_mean = diff_std = None
    if conditioned:
        diff_acc, diff_mean, diff_std = difficulty_accuracy(results)
    details = []
    for r in results:
        detail = {
            "width": r.condition.size.width,
            "height": r.condition.size.height,
            "symmetry": r.condition.symmetry.value,
            "target_moves": r.condition.target_moves,
            "median_moves": r.stats.median_moves,
            "std_moves": r.stats.std_moves,
            "success_rate": r.stats.success_rate,
            "valid": r.stats.median_moves <= VALID_MOVE_LIMIT,
        }
        details.append(detail)
    return MetricsReport(
        variant=checkpoint.config.variant,
        epoch=checkpoint.epoch,
        size_accuracy=size_accuracy(results),
        diversity_accuracy=diversity_accuracy(results),
        plagiarism_score=plagiarism_score(results, manifest),
        symmetry_accuracy=symmetry_accuracy(results),
        valid_level_pct=valid_level_pct(results),
        tile_distribution_accuracy=tile_distribution_accuracy(results, manifest),
        difficulty_accuracy=diff_acc,
        difficulty_distance_mean=diff_mean,
        difficulty_distance_std=diff_std,
        details=details,
    )


# -- checkpoint selection ----------------------------------------------------


def selection_score(
    checkpoint: ModelCheckpoint, manifest: DatasetManifest, spec: SweepSpec
) -> float:
    """Unweighted mean of diversity, size and tile distribution accuracy."""
    results = inference_sweep(checkpoint, manifest, spec)
    return (
        diversity_accuracy(results)
        + size_accuracy(results)
        + tile_distribution_accuracy(results, manifest)
    ) / 3.0


def select_checkpoint(
    checkpoint_paths: list[str | Path],
    manifest: DatasetManifest,
    spec: SweepSpec = SweepSpec(),
) -> tuple[Path, float]:
    """Best checkpoint by selection score; ties break to the later epoch.

    Every candidate is swept with the same seed so rankings compare like
    with like.
    """
    if not checkpoint_paths:
        raise ValueError("no checkpoints to select from")
    best: tuple[float, int, Path] | None = None
    for path in checkpoint_paths:
        ckpt = load_checkpoint(path)
        score = selection_score(ckpt, manifest, spec)
        key = (score, ckpt.epoch, Path(path))
        if best is None or key[:2] > best[:2]:
            best = key
    return best[2], best[0]


# -- ablation ----------------------------------------------------------------


@dataclass
class AblationResult:
    avalon: MetricsReport
    vanilla: MetricsReport
    dataset_valid_pct: float

    def to_dict(self) -> dict:
        return {
            "avalon": self.avalon.to_dict(),
            "vanilla": self.vanilla.to_dict(),
            "dataset_valid_pct": self.dataset_valid_pct,
        }


def run_ablation(
    manifest: DatasetManifest,
    config_avalon: ModelConfig,
    config_vanilla: ModelConfig,
    out_dir: str | Path,
    sweep_seed: int = 0xD1FF,
    bot_config: BotConfig = BotConfig(),
    n_jobs: int = 1,
) -> AblationResult:
    """Train both variants on identical data, select each best checkpoint by
    the selection score, and produce the paired metric reports."""
    out_dir = Path(out_dir)
    spec = SweepSpec(seed=sweep_seed)
    reports = {}
    for config in (config_avalon, config_vanilla):
        result = train(manifest, config, out_dir / config.variant)
        best_path, _ = select_checkpoint(result.checkpoint_paths, manifest, spec)
        ckpt = load_checkpoint(best_path)
        reports[config.variant] = compute_report(
            ckpt, manifest, spec, bot_config, n_jobs=n_jobs
        )
    return AblationResult(
        avalon=reports["avalon"],
        vanilla=reports["vanilla"],
        dataset_valid_pct=dataset_valid_pct(manifest),
    )
