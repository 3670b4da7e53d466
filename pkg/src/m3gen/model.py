"""Conditional VAE over level layouts, in two variants.

The "avalon" variant conditions on size, symmetry (via input masking plus
mirror postprocessing) and difficulty; the "vanilla" ablation is identical
except that every trace of the difficulty conditioner is removed and the
default learning rate is halved.

Encoder input is a channel stack over the 9x11 board: the one-hot level
masked by its symmetry mask (3 channels), the size mask (1), and for avalon a
difficulty map holding the normalized move count in every cell (1). The
encoder is conv(16)-ReLU-conv(32)-ReLU-conv(64)-ReLU, flattened into two
independent dense heads producing the 5-dimensional posterior mean and
log-variance. The decoder consumes the sampled latent concatenated with a
6-way width one-hot, an 8-way height one-hot and (avalon) the difficulty
scalar; a dense layer maps that to 64 feature maps which three transposed
convolutions (32, 16, 3 filters) turn into per-cell class logits, ReLU
between layers and none after the last.

The loss is masked per-cell cross-entropy plus the analytic KL against
N(0, I), averaged per batch. Training runs seeded shuffled mini-batches with
Adam and writes periodic checkpoints; identical seed and data reproduce
checkpoints bit for bit.

Generation draws z from N(0, I), decodes with the requested conditioners,
takes the per-cell argmax (softmax is monotone, so this equals picking the
class with maximal probability), forces cells outside the requested play area
to BLOCK and mirror-completes the requested symmetry, which makes the
symmetry guarantee structural.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import grid as G
from . import neural as N
from .dataset import DatasetManifest, Split, normalize_difficulty
from .grid import BOARD_HEIGHT, BOARD_WIDTH, CellKind, ConditionSpec, LevelSize, SymmetryKind
from .rng import SplitMix64

VARIANTS = ("avalon", "vanilla")
DEFAULT_LEARNING_RATES = {"avalon": 1e-5, "vanilla": 5e-6}
MAX_TARGET_MOVES = 39.0
N_CELLS = BOARD_WIDTH * BOARD_HEIGHT

CHECKPOINT_FORMAT_VERSION = 1


class ModelError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "avalon"
    latent_dim: int = 5
    encoder_filters: tuple[int, ...] = (16, 32, 64)
    decoder_filters: tuple[int, ...] = (32, 16, 3)
    kernel_size: int = 3
    learning_rate: float | None = None
    epochs: int = 24000
    batch_size: int = 100
    checkpoint_interval: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ModelError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.decoder_filters[-1] != G.N_CELL_KINDS:
            raise ModelError("decoder must end with one filter per cell class")
        if self.kernel_size != 3:
            raise ModelError("only 3x3 kernels are supported")

    @property
    def conditions_on_difficulty(self) -> bool:
        return self.variant == "avalon"

    @property
    def lr(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return DEFAULT_LEARNING_RATES[self.variant]

    @property
    def encoder_channels(self) -> int:
        # masked one-hot level (3) + size mask (1) + difficulty map (avalon)
        return G.N_CELL_KINDS + 1 + (1 if self.conditions_on_difficulty else 0)

    @property
    def condition_dim(self) -> int:
        n_widths = G.WIDTH_RANGE[1] - G.WIDTH_RANGE[0] + 1
        n_heights = G.HEIGHT_RANGE[1] - G.HEIGHT_RANGE[0] + 1
        return n_widths + n_heights + (1 if self.conditions_on_difficulty else 0)

    @property
    def decoder_input_dim(self) -> int:
        return self.latent_dim + self.condition_dim

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "latent_dim": self.latent_dim,
            "encoder_filters": list(self.encoder_filters),
            "decoder_filters": list(self.decoder_filters),
            "kernel_size": self.kernel_size,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "checkpoint_interval": self.checkpoint_interval,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["encoder_filters"] = tuple(d["encoder_filters"])
        d["decoder_filters"] = tuple(d["decoder_filters"])
        return cls(**d)


# -- condition encoding ------------------------------------------------------


def size_onehot(size: LevelSize) -> np.ndarray:
    """[h_W | h_H]: 6-way one-hot over widths 4..9, 8-way over heights 4..11."""
    n_w = G.WIDTH_RANGE[1] - G.WIDTH_RANGE[0] + 1
    n_h = G.HEIGHT_RANGE[1] - G.HEIGHT_RANGE[0] + 1
    v = np.zeros(n_w + n_h, dtype=np.float32)
    v[size.width - G.WIDTH_RANGE[0]] = 1.0
    v[n_w + size.height - G.HEIGHT_RANGE[0]] = 1.0
    return v


def build_condition(config: ModelConfig, size: LevelSize, d: float | None) -> np.ndarray:
    parts = [size_onehot(size)]
    if config.conditions_on_difficulty:
        if d is None:
            raise ModelError("difficulty value required for the avalon variant")
        parts.append(np.array([d], dtype=np.float32))
    elif d is not None:
        raise ModelError("model has no difficulty conditioner")
    return np.concatenate(parts)


def build_encoder_input(
    config: ModelConfig,
    grid: np.ndarray,
    symmetry: SymmetryKind,
    size: LevelSize,
    d: float | None,
) -> np.ndarray:
    """Channel stack (C, 9, 11): masked one-hot level, size mask, difficulty map."""
    onehot = G.one_hot_encode(grid)
    sym_mask = G.build_symmetry_mask(size, symmetry).T.astype(np.float32)
    size_mask = G.build_size_mask(size).T.astype(np.float32)
    channels = [onehot * sym_mask[None, :, :], size_mask[None, :, :]]
    if config.conditions_on_difficulty:
        if d is None:
            raise ModelError("difficulty value required for the avalon variant")
        channels.append(np.full((1, BOARD_WIDTH, BOARD_HEIGHT), d, dtype=np.float32))
    return np.concatenate(channels, axis=0)


# -- the network -------------------------------------------------------------


def init_params(config: ModelConfig, dtype=np.float32) -> N.ParamStore:
    """Glorot-uniform weights, zero biases, seeded from config.seed."""
    rng = SplitMix64(config.seed ^ 0x1417)
    store = N.ParamStore()
    k2 = config.kernel_size**2

    c_in = config.encoder_channels
    for i, c_out in enumerate(config.encoder_filters):
        store.add(
            f"enc.conv{i}.w",
            N.glorot_uniform((c_out, c_in, 3, 3), c_in * k2, c_out * k2, rng, dtype),
        )
        store.add(f"enc.conv{i}.b", np.zeros(c_out, dtype=dtype))
        c_in = c_out
    flat = config.encoder_filters[-1] * N_CELLS
    for head in ("mu", "logvar"):
        store.add(
            f"enc.fc_{head}.w",
            N.glorot_uniform((config.latent_dim, flat), flat, config.latent_dim, rng, dtype),
        )
        store.add(f"enc.fc_{head}.b", np.zeros(config.latent_dim, dtype=dtype))

    store.add(
        "dec.fc.w",
        N.glorot_uniform((flat, config.decoder_input_dim), config.decoder_input_dim, flat, rng, dtype),
    )
    store.add("dec.fc.b", np.zeros(flat, dtype=dtype))
    c_in = config.encoder_filters[-1]
    for i, c_out in enumerate(config.decoder_filters):
        store.add(
            f"dec.tconv{i}.w",
            N.glorot_uniform((c_in, c_out, 3, 3), c_in * k2, c_out * k2, rng, dtype),
        )
        store.add(f"dec.tconv{i}.b", np.zeros(c_out, dtype=dtype))
        c_in = c_out
    return store


def _to_dense(a: np.ndarray) -> np.ndarray:
    """(C, B, H, W) -> (B, C*H*W) feature vectors (one copy)."""
    C, B, H, W = a.shape
    return a.reshape(C, B, H * W).transpose(1, 0, 2).reshape(B, C * H * W)


def _from_dense(f: np.ndarray, C: int) -> np.ndarray:
    """(B, C*H*W) -> contiguous (C, B, H, W)."""
    B = f.shape[0]
    a = np.ascontiguousarray(f.reshape(B, C, BOARD_WIDTH * BOARD_HEIGHT).transpose(1, 0, 2))
    return a.reshape(C, B, BOARD_WIDTH, BOARD_HEIGHT)


class LevelVAE:
    """Network weights plus forward/backward passes for one config.

    Spatial activations use the kernel layout (C, B, 9, 11); a reusable
    workspace keeps the large scratch buffers alive across training steps.
    """

    def __init__(self, config: ModelConfig, params: N.ParamStore | None = None, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        self.params = params if params is not None else init_params(config, dtype)
        self.ws = N.Workspace()

    # -- forward -----------------------------------------------------------

    def encode(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
        """x: (C, B, 9, 11) -> posterior (mu, logvar), plus backward cache."""
        p = self.params
        B = x.shape[1]
        cache: dict = {}
        a = x
        for i in range(len(self.config.encoder_filters)):
            key = f"enc{i}[{B}]"
            cols = N._im2col(a, self.ws, key)
            pre = N.conv2d_forward(
                a, p[f"enc.conv{i}.w"].value, p[f"enc.conv{i}.b"].value, self.ws, key, cols
            )
            cache[f"enc{i}_in"] = a
            cache[f"enc{i}_cols"] = cols
            cache[f"enc{i}_pre"] = pre
            a = N.relu(pre)
        flat = _to_dense(a)
        cache["enc_flat"] = flat
        mu = N.linear_forward(flat, p["enc.fc_mu.w"].value, p["enc.fc_mu.b"].value)
        logvar = N.linear_forward(flat, p["enc.fc_logvar.w"].value, p["enc.fc_logvar.b"].value)
        return mu, logvar, cache

    def decode(self, zhat: np.ndarray) -> tuple[np.ndarray, dict]:
        """zhat: (B, decoder_input_dim) -> logits (3, B, 9, 11), plus cache."""
        p = self.params
        if zhat.shape[1] != self.config.decoder_input_dim:
            raise ModelError(
                f"decoder input must have length {self.config.decoder_input_dim}, got {zhat.shape[1]}"
            )
        B = zhat.shape[0]
        cache: dict = {"zhat": zhat}
        f = N.linear_forward(zhat, p["dec.fc.w"].value, p["dec.fc.b"].value)
        a = _from_dense(f, self.config.encoder_filters[-1])
        n_layers = len(self.config.decoder_filters)
        for i in range(n_layers):
            cache[f"dec{i}_in"] = a
            pre = N.transposed_conv2d_forward(
                a, p[f"dec.tconv{i}.w"].value, p[f"dec.tconv{i}.b"].value, self.ws, f"dec{i}[{B}]"
            )
            cache[f"dec{i}_pre"] = pre
            a = N.relu(pre) if i < n_layers - 1 else pre
        return a, cache

    # -- backward ----------------------------------------------------------

    def _accumulate(self, name: str, g: np.ndarray) -> None:
        self.params[name].grad += g

    def backward_decoder(self, cache: dict, g_logits: np.ndarray) -> np.ndarray:
        """Backprop dec logits gradient; returns gradient w.r.t. zhat."""
        p = self.params
        n_layers = len(self.config.decoder_filters)
        B = g_logits.shape[1]
        g = g_logits
        for i in reversed(range(n_layers)):
            if i < n_layers - 1:
                g = N.relu_backward(cache[f"dec{i}_pre"], g)
            g_in, g_w, g_b = N.transposed_conv2d_backward(
                cache[f"dec{i}_in"], p[f"dec.tconv{i}.w"].value, g, ws=self.ws, key=f"dec{i}[{B}]"
            )
            self._accumulate(f"dec.tconv{i}.w", g_w)
            self._accumulate(f"dec.tconv{i}.b", g_b)
            g = g_in
        g_flat = _to_dense(g)
        g_zhat, g_w, g_b = N.linear_backward(cache["zhat"], p["dec.fc.w"].value, g_flat)
        self._accumulate("dec.fc.w", g_w)
        self._accumulate("dec.fc.b", g_b)
        return g_zhat

    def backward_encoder(self, cache: dict, g_mu: np.ndarray, g_logvar: np.ndarray) -> None:
        p = self.params
        g_flat_mu, g_w, g_b = N.linear_backward(cache["enc_flat"], p["enc.fc_mu.w"].value, g_mu)
        self._accumulate("enc.fc_mu.w", g_w)
        self._accumulate("enc.fc_mu.b", g_b)
        g_flat_lv, g_w, g_b = N.linear_backward(cache["enc_flat"], p["enc.fc_logvar.w"].value, g_logvar)
        self._accumulate("enc.fc_logvar.w", g_w)
        self._accumulate("enc.fc_logvar.b", g_b)
        g = _from_dense(g_flat_mu + g_flat_lv, self.config.encoder_filters[-1])
        B = g.shape[1]
        for i in reversed(range(len(self.config.encoder_filters))):
            g = N.relu_backward(cache[f"enc{i}_pre"], g)
            g_in, g_w, g_b = N.conv2d_backward(
                cache[f"enc{i}_in"],
                p[f"enc.conv{i}.w"].value,
                g,
                cols=cache[f"enc{i}_cols"],
                need_gx=i > 0,
                ws=self.ws,
                key=f"enc{i}[{B}]",
            )
            self._accumulate(f"enc.conv{i}.w", g_w)
            self._accumulate(f"enc.conv{i}.b", g_b)
            g = g_in

    # -- losses ------------------------------------------------------------

    def loss_batch(
        self,
        x: np.ndarray,
        cond: np.ndarray,
        targets: np.ndarray,
        masks: np.ndarray,
        rng: SplitMix64,
    ) -> tuple[float, float]:
        """Forward + full backward on one batch; returns (ce, kl).

        x: (C, B, 9, 11); cond: (B, condition_dim); targets/masks: (B, 9, 11).
        Gradients accumulate into the parameter store (callers zero them via
        the optimizer step).
        """
        mu, logvar, enc_cache = self.encode(x)
        z, eps = N.reparameterize(mu, logvar, rng)
        zhat = np.concatenate([z, cond], axis=1)
        logits, dec_cache = self.decode(zhat)
        ce, g_logits = N.masked_cross_entropy(logits, targets, masks)
        kl, g_mu_kl, g_lv_kl = N.kl_standard_normal(mu, logvar)
        g_zhat = self.backward_decoder(dec_cache, g_logits)
        g_z = g_zhat[:, : self.config.latent_dim]
        g_mu_r, g_lv_r = N.reparameterize_backward(logvar, eps, g_z)
        self.backward_encoder(enc_cache, g_mu_r + g_mu_kl, g_lv_r + g_lv_kl)
        return ce, kl

    def loss_total(
        self,
        level,
        manifest: DatasetManifest | None,
        rng: SplitMix64,
    ) -> tuple[float, float, float]:
        """Single-level loss with full backward; returns (total, ce, kl).

        ``level`` is an AnnotatedLevel; difficulty is its annotated median
        normalized against the manifest training bounds (avalon only).
        """
        d = None
        if self.config.conditions_on_difficulty:
            if manifest is None:
                raise ModelError("manifest required to normalize difficulty")
            d = normalize_difficulty(level.median_moves, manifest)
        x = build_encoder_input(self.config, level.grid, level.symmetry, level.size, d)[:, None].astype(self.dtype)
        cond = build_condition(self.config, level.size, d)[None].astype(self.dtype)
        targets = level.grid.T[None].astype(np.int64)
        masks = G.build_symmetry_mask(level.size, level.symmetry).T[None].astype(self.dtype)
        ce, kl = self.loss_batch(x, cond, targets, masks, rng)
        return ce + kl, ce, kl

    # -- inference ---------------------------------------------------------

    def decode_logits(self, z: np.ndarray, cond: np.ndarray) -> np.ndarray:
        """Logits for a latent + condition batch, safe to hold across calls.

        decode()/encode() return views into reused workspace buffers that the
        next forward pass overwrites; this public entry point copies.
        """
        zhat = np.concatenate([z, cond], axis=1).astype(self.dtype)
        logits, _ = self.decode(zhat)
        return logits.copy()

    def reconstruct(self, x: np.ndarray, cond: np.ndarray) -> np.ndarray:
        """Deterministic reconstruction logits using the posterior mean."""
        mu, _, _ = self.encode(x)
        return self.decode_logits(mu, cond)


# -- training ----------------------------------------------------------------


@dataclass
class TrainingCache:
    """Pre-encoded training tensors, index-aligned with the level list."""

    x: np.ndarray
    cond: np.ndarray
    targets: np.ndarray
    masks: np.ndarray

    @classmethod
    def build(cls, config: ModelConfig, manifest: DatasetManifest, levels) -> "TrainingCache":
        xs, conds, targets, masks = [], [], [], []
        for lv in levels:
            d = normalize_difficulty(lv.median_moves, manifest) if config.conditions_on_difficulty else None
            xs.append(build_encoder_input(config, lv.grid, lv.symmetry, lv.size, d))
            conds.append(build_condition(config, lv.size, d))
            targets.append(lv.grid.T)
            masks.append(G.build_symmetry_mask(lv.size, lv.symmetry).T)
        return cls(
            x=np.stack(xs, axis=1).astype(np.float32),  # channel-major: (C, N, 9, 11)
            cond=np.stack(conds).astype(np.float32),
            targets=np.stack(targets).astype(np.int64),
            masks=np.stack(masks).astype(np.float32),
        )


@dataclass
class TrainResult:
    checkpoint_paths: list[Path]
    history: list[dict] = field(repr=False)
    model: LevelVAE | None = None


def train(
    manifest: DatasetManifest,
    config: ModelConfig,
    out_dir: str | Path,
    log_name: str = "train_log.jsonl",
    progress_every: int = 0,
) -> TrainResult:
    """Train one variant on the manifest's TRAIN split.

    Writes checkpoints every ``checkpoint_interval`` epochs (and at the final
    epoch) plus a line-delimited JSON training log with per-epoch mean CE and
    KL. Deterministic for a fixed (manifest, config).
    """
    levels = manifest.train_levels()
    if not levels:
        raise ModelError("manifest has no TRAIN levels")
    if manifest.m_max <= manifest.m_min:
        raise ModelError("degenerate difficulty range")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model = LevelVAE(config)
    optimizer = N.Adam(model.params, lr=config.lr)
    cache = TrainingCache.build(config, manifest, levels)
    val_levels = manifest.split_levels(Split.VAL)
    val_cache = TrainingCache.build(config, manifest, val_levels) if val_levels else None

    shuffle_rng = SplitMix64(config.seed ^ 0x5F00D)
    sample_rng = SplitMix64(config.seed ^ 0xE75)
    n = len(levels)
    order = list(range(n))
    history: list[dict] = []
    paths: list[Path] = []
    log_path = out_dir / log_name

    with log_path.open("w", encoding="utf-8") as log:
        for epoch in range(1, config.epochs + 1):
            shuffle_rng.shuffle(order)
            ce_sum = 0.0
            kl_sum = 0.0
            for start in range(0, n, config.batch_size):
                idx = order[start : start + config.batch_size]
                ce, kl = model.loss_batch(
                    cache.x[:, idx], cache.cond[idx], cache.targets[idx], cache.masks[idx], sample_rng
                )
                if not (np.isfinite(ce) and np.isfinite(kl)):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch} (ce={ce}, kl={kl})"
                    )
                optimizer.step()
                ce_sum += ce * len(idx)
                kl_sum += kl * len(idx)
            entry = {
                "epoch": epoch,
                "ce": ce_sum / n,
                "kl": kl_sum / n,
                "lr": config.lr,
            }
            at_checkpoint = epoch % config.checkpoint_interval == 0 or epoch == config.epochs
            if at_checkpoint and val_cache is not None:
                entry["val_ce"] = _validation_ce(model, val_cache)
            history.append(entry)
            log.write(json.dumps(entry) + "\n")
            if at_checkpoint:
                path = out_dir / f"{config.variant}_{epoch:06d}.npz"
                if not paths or paths[-1] != path:
                    save_checkpoint(path, model, optimizer, epoch, manifest.m_min, manifest.m_max)
                    paths.append(path)
            if progress_every and epoch % progress_every == 0:
                print(f"epoch {epoch}/{config.epochs} ce={entry['ce']:.4f} kl={entry['kl']:.4f}")
    return TrainResult(checkpoint_paths=paths, history=history, model=model)


def _validation_ce(model: LevelVAE, cache: TrainingCache) -> float:
    """Monitoring-only CE on the validation split, via the posterior mean."""
    logits = model.reconstruct(cache.x, cache.cond)
    ce, _ = N.masked_cross_entropy(logits, cache.targets, cache.masks)
    return ce


# -- checkpointing -----------------------------------------------------------


@dataclass
class ModelCheckpoint:
    config: ModelConfig
    params: N.ParamStore
    adam_m: dict[str, np.ndarray]
    adam_v: dict[str, np.ndarray]
    adam_t: int
    epoch: int
    m_min: float
    m_max: float

    def model(self) -> LevelVAE:
        return LevelVAE(self.config, self.params)


def save_checkpoint(
    path: str | Path,
    model: LevelVAE,
    optimizer: N.Adam | None,
    epoch: int,
    m_min: float,
    m_max: float,
) -> None:
    meta = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config": model.config.to_dict(),
        "epoch": epoch,
        "adam_t": optimizer.t if optimizer is not None else 0,
        "m_min": m_min,
        "m_max": m_max,
    }
    arrays = {f"param/{name}": p.value for name, p in model.params.items()}
    if optimizer is not None:
        arrays.update(optimizer.state_arrays())
    np.savez(path, meta=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path: str | Path) -> ModelCheckpoint:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("format_version") != CHECKPOINT_FORMAT_VERSION:
            raise ModelError(f"unsupported checkpoint version {meta.get('format_version')}")
        config = ModelConfig.from_dict(meta["config"])
        params = N.ParamStore()
        adam_m: dict[str, np.ndarray] = {}
        adam_v: dict[str, np.ndarray] = {}
        for key in data.files:
            if key.startswith("param/"):
                params.add(key[len("param/") :], data[key].copy())
            elif key.startswith("adam_m/"):
                adam_m[key[len("adam_m/") :]] = data[key].copy()
            elif key.startswith("adam_v/"):
                adam_v[key[len("adam_v/") :]] = data[key].copy()
    return ModelCheckpoint(
        config=config,
        params=params,
        adam_m=adam_m,
        adam_v=adam_v,
        adam_t=int(meta["adam_t"]),
        epoch=int(meta["epoch"]),
        m_min=float(meta["m_min"]),
        m_max=float(meta["m_max"]),
    )


# -- generation --------------------------------------------------------------


def generate(
    checkpoint: ModelCheckpoint | LevelVAE,
    spec: ConditionSpec,
    rng: SplitMix64,
    m_min: float | None = None,
    m_max: float | None = None,
) -> np.ndarray:
    """Generate one level for the requested conditioners.

    Draws z ~ N(0, I), decodes, argmaxes the per-cell class scores, forces
    everything outside the requested play area to BLOCK and mirror-completes
    the requested symmetry.
    """
    if isinstance(checkpoint, ModelCheckpoint):
        model = checkpoint.model()
        m_min = checkpoint.m_min if m_min is None else m_min
        m_max = checkpoint.m_max if m_max is None else m_max
    else:
        model = checkpoint
    config = model.config
    size = G.check_size(*spec.size)

    d = None
    if config.conditions_on_difficulty:
        if spec.target_moves is None:
            raise ModelError("difficulty target required for the avalon variant")
        if m_min is None or m_max is None:
            raise ModelError("normalization bounds required for difficulty conditioning")
        if not (m_min <= spec.target_moves <= MAX_TARGET_MOVES):
            raise ModelError("difficulty out of range")
        span = m_max - m_min
        if span <= 0:
            raise ModelError("degenerate difficulty range")
        d = min(1.0, max(0.0, (spec.target_moves - m_min) / span))
    elif spec.target_moves is not None:
        raise ModelError("model has no difficulty conditioner")

    z = np.array(rng.normals(config.latent_dim), dtype=np.float32)[None]
    cond = build_condition(config, size, d)[None]
    logits = model.decode_logits(z, cond)
    level = G.one_hot_decode(logits[:, 0])
    level[G.build_size_mask(size) == 0] = CellKind.BLOCK
    return G.complete_symmetry(level, size, spec.symmetry)


def reconstruction_accuracy(model: LevelVAE, manifest: DatasetManifest, levels=None) -> float:
    """Mean fraction of masked-in cells reconstructed exactly (posterior mean
    path, no sampling)."""
    if levels is None:
        levels = manifest.train_levels()
    cache = TrainingCache.build(model.config, manifest, levels)
    logits = model.reconstruct(cache.x, cache.cond)
    pred = logits.argmax(axis=0)
    hits = (pred == cache.targets) * cache.masks
    per_level = hits.reshape(len(levels), -1).sum(axis=1) / cache.masks.reshape(len(levels), -1).sum(axis=1)
    return float(per_level.mean())
