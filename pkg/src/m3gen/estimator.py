"""Scikit-learn style estimator facade over the level generator.

Wraps dataset-conditional training and sampling behind the familiar
``fit`` / ``sample`` / ``score`` surface (cf. mixture models and kernel
density estimators in scikit-learn), so the generator composes with
``clone``, ``get_params`` grids and pipeline-style tooling.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from . import model as M
from .dataset import DatasetManifest, load_manifest
from .grid import ConditionSpec, SymmetryKind, check_size
from .rng import SplitMix64


class NotFittedError(RuntimeError):
    pass


class ConditionedLevelVAE(BaseEstimator):
    """Conditional VAE generating 9x11 match-3 layouts.

    Parameters mirror :class:`m3gen.model.ModelConfig`; ``variant`` selects
    between the difficulty-conditioned generator ("avalon") and its ablation
    without the difficulty input ("vanilla"). ``learning_rate=None`` picks
    the per-variant default (1e-5 avalon, 5e-6 vanilla).

    Fitted attributes: ``model_`` (the trained network), ``m_min_`` /
    ``m_max_`` (difficulty normalization bounds), ``history_`` (per-epoch
    loss records) and ``checkpoint_paths_``.
    """

    def __init__(
        self,
        variant: str = "avalon",
        latent_dim: int = 5,
        encoder_filters: tuple[int, ...] = (16, 32, 64),
        decoder_filters: tuple[int, ...] = (32, 16, 3),
        learning_rate: float | None = None,
        epochs: int = 24000,
        batch_size: int = 100,
        checkpoint_interval: int = 500,
        seed: int = 0,
        checkpoint_dir: str | None = None,
    ):
        self.variant = variant
        self.latent_dim = latent_dim
        self.encoder_filters = encoder_filters
        self.decoder_filters = decoder_filters
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.checkpoint_interval = checkpoint_interval
        self.seed = seed
        self.checkpoint_dir = checkpoint_dir

    def _config(self) -> M.ModelConfig:
        return M.ModelConfig(
            variant=self.variant,
            latent_dim=self.latent_dim,
            encoder_filters=tuple(self.encoder_filters),
            decoder_filters=tuple(self.decoder_filters),
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            checkpoint_interval=self.checkpoint_interval,
            seed=self.seed,
        )

    def fit(self, X: DatasetManifest | str | Path, y=None) -> "ConditionedLevelVAE":
        """Train on an annotated manifest (object or JSON path)."""
        manifest = load_manifest(X) if isinstance(X, (str, Path)) else X
        if not manifest.annotated:
            raise ValueError("manifest must be bot-annotated before fitting")
        import tempfile

        out_dir = self.checkpoint_dir or tempfile.mkdtemp(prefix="m3gen_ckpt_")
        result = M.train(manifest, self._config(), out_dir)
        self.model_ = result.model
        self.history_ = result.history
        self.checkpoint_paths_ = result.checkpoint_paths
        self.m_min_ = manifest.m_min
        self.m_max_ = manifest.m_max
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError("estimator is not fitted; call fit() or load()")

    def sample(
        self,
        width: int,
        height: int,
        symmetry: str | SymmetryKind = "unknown",
        moves: float | None = None,
        n_samples: int = 1,
        seed: int = 0,
    ) -> list[np.ndarray]:
        """Generate levels for the given conditioners, deterministically."""
        self._check_fitted()
        size = check_size(width, height)
        sym = SymmetryKind(symmetry) if isinstance(symmetry, str) else symmetry
        spec = ConditionSpec(size=size, symmetry=sym, target_moves=moves)
        rng = SplitMix64(seed)
        return [
            M.generate(self.model_, spec, rng, m_min=self.m_min_, m_max=self.m_max_)
            for _ in range(n_samples)
        ]

    def score(self, X: DatasetManifest | str | Path, y=None) -> float:
        """Masked cell-reconstruction accuracy on the manifest's TRAIN split."""
        self._check_fitted()
        manifest = load_manifest(X) if isinstance(X, (str, Path)) else X
        return M.reconstruction_accuracy(self.model_, manifest)

    def save(self, path: str | Path) -> None:
        self._check_fitted()
        M.save_checkpoint(path, self.model_, None, self.epochs, self.m_min_, self.m_max_)

    @classmethod
    def load(cls, path: str | Path) -> "ConditionedLevelVAE":
        ckpt = M.load_checkpoint(path)
        cfg = ckpt.config
        est = cls(
            variant=cfg.variant,
            latent_dim=cfg.latent_dim,
            encoder_filters=cfg.encoder_filters,
            decoder_filters=cfg.decoder_filters,
            learning_rate=cfg.learning_rate,
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            checkpoint_interval=cfg.checkpoint_interval,
            seed=cfg.seed,
        )
        est.model_ = ckpt.model()
        est.m_min_ = ckpt.m_min
        est.m_max_ = ckpt.m_max
        est.history_ = []
        est.checkpoint_paths_ = []
        return est
