"""Minimal differentiable kernel for the level generator.

Implements exactly the operations the architecture needs, each with a
hand-derived backward pass:

- 3x3 stride-1 zero-padding-1 convolution and its transpose (adjoint)
- fully connected layers and ReLU
- masked per-cell softmax cross-entropy over the 3 cell classes
- the closed-form KL divergence of a diagonal Gaussian against N(0, I)
- the reparameterization draw
- bias-corrected Adam

Convolutions run as one GEMM over an im2col matrix. Spatial tensors use a
channel-major batch layout ``(C, B, H, W)`` so that the im2col matrix
``(C*9, B*H*W)`` and every GEMM operand come out contiguous without any
transposes; a single sample is just ``B == 1``. Dense layers keep the usual
``(B, features)`` layout, with one explicit repack at the conv/dense
boundary. An optional :class:`Workspace` recycles the large scratch buffers
between training steps, which on CPU saves more time than the GEMMs cost.

The transposed convolution is the literal adjoint of the convolution
(col2im of W^T g), so <conv(x), y> == <x, tconv(y)> holds to rounding for
shared weights, and every backward is validated against central finite
differences in the test suite.

Everything is deterministic: no unordered reductions, gradient accumulation
in fixed parameter order, all randomness from an explicit SplitMix64 stream.
Training uses float32; gradient checking runs the same code in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64


class ShapeError(ValueError):
    pass


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ShapeError(msg)


class Workspace:
    """Named scratch-buffer pool reused across calls (shape/dtype checked)."""

    def __init__(self):
        self._bufs: dict[str, np.ndarray] = {}

    def buf(self, key: str, shape: tuple[int, ...], dtype) -> np.ndarray:
        b = self._bufs.get(key)
        if b is None or b.shape != shape or b.dtype != np.dtype(dtype):
            b = np.empty(shape, dtype=dtype)
            self._bufs[key] = b
        return b


def _scratch(ws: Workspace | None, key: str, shape: tuple[int, ...], dtype) -> np.ndarray:
    if ws is None:
        return np.empty(shape, dtype=dtype)
    return ws.buf(key, shape, dtype)


# -- im2col plumbing ---------------------------------------------------------


def _im2col(x: np.ndarray, ws: Workspace | None = None, key: str = "") -> np.ndarray:
    """(C, B, H, W) -> (C*9, B*H*W) patch matrix for a 3x3 kernel, zero pad 1."""
    C, B, H, W = x.shape
    xp = _scratch(ws, key + ".pad", (C, B, H + 2, W + 2), x.dtype)
    xp[...] = 0
    xp[:, :, 1:-1, 1:-1] = x
    cols = _scratch(ws, key + ".cols", (C, 9, B, H * W), x.dtype)
    k = 0
    for di in range(3):
        for dj in range(3):
            cols[:, k] = xp[:, :, di : di + H, dj : dj + W].reshape(C, B, H * W)
            k += 1
    return cols.reshape(C * 9, B * H * W)


def _col2im(
    cols: np.ndarray, C: int, B: int, H: int, W: int, ws: Workspace | None = None, key: str = ""
) -> np.ndarray:
    """Adjoint of :func:`_im2col`: scatter-add patches back to (C, B, H, W)."""
    cols = cols.reshape(C, 9, B, H, W)
    xp = _scratch(ws, key + ".pad", (C, B, H + 2, W + 2), cols.dtype)
    xp[...] = 0
    k = 0
    for di in range(3):
        for dj in range(3):
            xp[:, :, di : di + H, dj : dj + W] += cols[:, k]
            k += 1
    out = _scratch(ws, key + ".img", (C, B, H, W), cols.dtype)
    out[...] = xp[:, :, 1:-1, 1:-1]
    return out


# -- convolution -------------------------------------------------------------


def conv2d_forward(
    x: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    ws: Workspace | None = None,
    key: str = "conv",
    cols: np.ndarray | None = None,
) -> np.ndarray:
    """Cross-correlation, 3x3 kernel, stride 1, zero padding 1.

    x: (C_in, B, H, W); w: (C_out, C_in, 3, 3); b: (C_out,).
    """
    C_in, B, H, W = x.shape
    C_out = w.shape[0]
    _check(w.shape == (C_out, C_in, 3, 3), f"conv weight shape {w.shape} mismatches input {x.shape}")
    _check(b.shape == (C_out,), "conv bias shape mismatch")
    if cols is None:
        cols = _im2col(x, ws, key)
    out = _scratch(ws, key + ".out", (C_out, B * H * W), x.dtype)
    np.matmul(w.reshape(C_out, C_in * 9), cols, out=out)
    out = out.reshape(C_out, B, H, W)
    out += b[:, None, None, None]
    return out


def conv2d_backward(
    x: np.ndarray,
    w: np.ndarray,
    g_out: np.ndarray,
    cols: np.ndarray | None = None,
    need_gx: bool = True,
    ws: Workspace | None = None,
    key: str = "conv",
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients (g_x, g_w, g_b) of conv2d given the output gradient."""
    C_in, B, H, W = x.shape
    C_out = w.shape[0]
    _check(g_out.shape == (C_out, B, H, W), "conv output-gradient shape mismatch")
    if cols is None:
        cols = _im2col(x, ws, key)
    g_flat = g_out.reshape(C_out, B * H * W)
    g_w = (g_flat @ cols.T).reshape(w.shape)
    g_b = g_out.sum(axis=(1, 2, 3))
    g_x = None
    if need_gx:
        g_cols = _scratch(ws, key + ".gcols", (C_in * 9, B * H * W), x.dtype)
        np.matmul(w.reshape(C_out, C_in * 9).T, g_flat, out=g_cols)
        g_x = _col2im(g_cols, C_in, B, H, W, ws, key + ".gx")
    return g_x, g_w, g_b


def transposed_conv2d_forward(
    x: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    ws: Workspace | None = None,
    key: str = "tconv",
) -> np.ndarray:
    """Transposed convolution: the adjoint of conv2d under the same weights.

    x: (C_in, B, H, W); w: (C_in, C_out, 3, 3); b: (C_out,). Stride 1 and
    padding 1 preserve the spatial size.
    """
    C_in, B, H, W = x.shape
    _check(
        w.shape[0] == C_in and w.shape[2:] == (3, 3),
        f"tconv weight shape {w.shape} mismatches input {x.shape}",
    )
    C_out = w.shape[1]
    _check(b.shape == (C_out,), "tconv bias shape mismatch")
    cols = _scratch(ws, key + ".cols", (C_out * 9, B * H * W), x.dtype)
    np.matmul(w.reshape(C_in, C_out * 9).T, x.reshape(C_in, B * H * W), out=cols)
    out = _col2im(cols, C_out, B, H, W, ws, key + ".out")
    out += b[:, None, None, None]
    return out


def transposed_conv2d_backward(
    x: np.ndarray,
    w: np.ndarray,
    g_out: np.ndarray,
    need_gx: bool = True,
    ws: Workspace | None = None,
    key: str = "tconv",
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients (g_x, g_w, g_b) of transposed_conv2d."""
    C_in, B, H, W = x.shape
    C_out = w.shape[1]
    _check(g_out.shape == (C_out, B, H, W), "tconv output-gradient shape mismatch")
    g_cols = _im2col(g_out, ws, key + ".g")
    x_flat = x.reshape(C_in, B * H * W)
    g_w = (x_flat @ g_cols.T).reshape(w.shape)
    g_b = g_out.sum(axis=(1, 2, 3))
    g_x = None
    if need_gx:
        g_x = _scratch(ws, key + ".gx", (C_in, B * H * W), x.dtype)
        np.matmul(w.reshape(C_in, C_out * 9), g_cols, out=g_x)
        g_x = g_x.reshape(C_in, B, H, W)
    return g_x, g_w, g_b


# -- dense / activation ------------------------------------------------------


def linear_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map. x: (B, n_in); w: (n_out, n_in); b: (n_out,)."""
    _check(x.shape[1] == w.shape[1], f"linear input dim {x.shape[1]} != weight dim {w.shape[1]}")
    _check(b.shape == (w.shape[0],), "linear bias shape mismatch")
    return x @ w.T + b


def linear_backward(
    x: np.ndarray, w: np.ndarray, g_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    g_w = g_out.T @ x
    g_b = g_out.sum(axis=0)
    g_x = g_out @ w
    return g_x, g_w, g_b


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, g_out: np.ndarray) -> np.ndarray:
    """Subgradient 0 at exactly 0."""
    return g_out * (x > 0)


# -- losses ------------------------------------------------------------------


def softmax(logits: np.ndarray, axis: int = 0) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def masked_cross_entropy(
    logits: np.ndarray, targets: np.ndarray, masks: np.ndarray
) -> tuple[float, np.ndarray]:
    """Per-cell softmax cross-entropy averaged over masked-in cells.

    logits: (K, B, H, W); targets: (B, H, W) integer classes; masks:
    (B, H, W) in {0, 1}. Each sample normalizes by its own masked-in cell
    count and the result is the batch mean, so masked-out cells contribute
    nothing to the loss and receive exactly zero gradient.
    """
    K, B, H, W = logits.shape
    _check(targets.shape == (B, H, W), "target shape mismatch")
    _check(masks.shape == (B, H, W), "mask shape mismatch")
    counts = masks.reshape(B, -1).sum(axis=1)
    if (counts == 0).any():
        raise ShapeError("empty mask")
    shifted = logits - logits.max(axis=0, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=0, keepdims=True))
    onehot = np.zeros_like(logits)
    bi, yi, xi = np.indices(targets.shape)
    onehot[targets, bi, yi, xi] = 1.0
    picked = (log_probs * onehot).sum(axis=0)
    per_sample = -(picked * masks).reshape(B, -1).sum(axis=1) / counts
    loss = float(per_sample.mean())
    scale = (masks / counts[:, None, None])[None, :, :, :] / B
    grad = (np.exp(log_probs) - onehot) * scale
    return loss, grad.astype(logits.dtype)


def kl_standard_normal(
    mu: np.ndarray, logvar: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """KL(N(mu, diag(exp(logvar))) || N(0, I)), batch mean, with gradients.

    mu, logvar: (B, Z). Per-sample loss is
    -0.5 * sum(1 + logvar - mu^2 - exp(logvar)).
    """
    _check(mu.shape == logvar.shape, "mu/logvar shape mismatch")
    B = mu.shape[0]
    ev = np.exp(logvar)
    per_sample = -0.5 * (1.0 + logvar - mu * mu - ev).sum(axis=1)
    loss = float(per_sample.mean())
    g_mu = mu / B
    g_logvar = 0.5 * (ev - 1.0) / B
    return loss, g_mu.astype(mu.dtype), g_logvar.astype(mu.dtype)


def reparameterize(
    mu: np.ndarray, logvar: np.ndarray, rng: SplitMix64
) -> tuple[np.ndarray, np.ndarray]:
    """z = mu + exp(logvar/2) * eps with eps ~ N(0, I). Returns (z, eps)."""
    eps = np.array(rng.normals(mu.size), dtype=mu.dtype).reshape(mu.shape)
    z = mu + np.exp(0.5 * logvar) * eps
    return z, eps


def reparameterize_backward(
    logvar: np.ndarray, eps: np.ndarray, g_z: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(g_mu, g_logvar) contributions of the sampling path."""
    g_mu = g_z
    g_logvar = g_z * eps * 0.5 * np.exp(0.5 * logvar)
    return g_mu, g_logvar


# -- parameters and optimizer ------------------------------------------------


@dataclass
class Parameter:
    value: np.ndarray
    grad: np.ndarray = field(init=False)

    def __post_init__(self):
        self.grad = np.zeros_like(self.value)


class ParamStore:
    """Ordered, named parameter tensors with paired gradients."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}

    def add(self, name: str, value: np.ndarray) -> Parameter:
        if name in self._params:
            raise KeyError(f"duplicate parameter {name!r}")
        p = Parameter(value)
        self._params[name] = p
        return p

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params)

    def items(self):
        return self._params.items()

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.grad[...] = 0

    def astype(self, dtype) -> "ParamStore":
        out = ParamStore()
        for name, p in self._params.items():
            out.add(name, p.value.astype(dtype))
        return out

    def n_values(self) -> int:
        return sum(p.value.size for p in self._params.values())


def glorot_uniform(
    shape: tuple[int, ...], fan_in: int, fan_out: int, rng: SplitMix64, dtype=np.float32
) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    n = int(np.prod(shape))
    vals = np.array([rng.uniform_in(-limit, limit) for _ in range(n)], dtype=dtype)
    return vals.reshape(shape)


class Adam:
    """Bias-corrected Adam over a ParamStore; grads are zeroed after a step."""

    def __init__(
        self,
        store: ParamStore,
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {name: np.zeros_like(p.value) for name, p in store.items()}
        self.v = {name: np.zeros_like(p.value) for name, p in store.items()}

    def step(self) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for name, p in self.store.items():
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.value -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
        self.store.zero_grads()

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {}
        for name in self.store.names():
            out[f"adam_m/{name}"] = self.m[name]
            out[f"adam_v/{name}"] = self.v[name]
        return out

    def load_state(self, arrays: dict[str, np.ndarray], t: int) -> None:
        self.t = t
        for name in self.store.names():
            self.m[name] = arrays[f"adam_m/{name}"].copy()
            self.v[name] = arrays[f"adam_v/{name}"].copy()
