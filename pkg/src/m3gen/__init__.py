"""m3gen: difficulty-validated conditional generation of match-3 level layouts."""

from .grid import (
    CellKind,
    ConditionSpec,
    LevelSize,
    SymmetryKind,
    build_size_mask,
    build_symmetry_mask,
    complete_symmetry,
    detect_symmetry,
    measure_size,
    one_hot_decode,
    one_hot_encode,
    parse_ascii,
    render_ascii,
)
from .engine import BoardState, GameStatus, SwapMove, TileColor, derive_spawn_spots
from .bot import BotConfig, PlaythroughStats, evaluate_level, play_once, select_move
from .dataset import (
    AnnotatedLevel,
    DatasetManifest,
    Split,
    annotate,
    generate_main_style,
    generate_stylized,
    load_manifest,
    normalize_difficulty,
    save_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "CellKind",
    "ConditionSpec",
    "LevelSize",
    "SymmetryKind",
    "build_size_mask",
    "build_symmetry_mask",
    "complete_symmetry",
    "detect_symmetry",
    "measure_size",
    "one_hot_decode",
    "one_hot_encode",
    "parse_ascii",
    "render_ascii",
    "BoardState",
    "GameStatus",
    "SwapMove",
    "TileColor",
    "derive_spawn_spots",
    "BotConfig",
    "PlaythroughStats",
    "evaluate_level",
    "play_once",
    "select_move",
    "AnnotatedLevel",
    "DatasetManifest",
    "Split",
    "annotate",
    "generate_main_style",
    "generate_stylized",
    "load_manifest",
    "normalize_difficulty",
    "save_manifest",
    "ConditionedLevelVAE",
]


def __getattr__(name):
    # Heavy model imports stay lazy so grid/engine users do not pay for them.
    if name == "ConditionedLevelVAE":
        from .estimator import ConditionedLevelVAE

        return ConditionedLevelVAE
    raise AttributeError(f"module 'm3gen' has no attribute {name!r}")
