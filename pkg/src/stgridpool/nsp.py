"""Norm-based spatial pooling.

Each output token is a softmax-weighted sum of the tokens in its sliding
window, with logits beta * ||token||_p. Window semantics are valid-only:
no padding, output dim = floor((size - kernel) / stride) + 1, and a frame
smaller than the kernel is an error rather than a padded window.

The vectorized kernel and the plain average-pooling baseline both
accumulate in float64 over window elements in m-major (row) order, so a
loop-based reference using the same scalar primitives reproduces the
float32 results bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensors import FrameTokens, TokenGrid, check_norm_order, norm_map_array

__all__ = [
    "PoolConfig",
    "window_weights",
    "pool_frame",
    "apply_nsp",
    "average_pool_reference",
    "pooled_dims",
]


@dataclass(frozen=True)
class PoolConfig:
    """Spatial pooling parameters: kernel, stride, temperature, norm order."""

    kernel_h: int = 2
    kernel_w: int = 2
    stride_h: int = 2
    stride_w: int = 2
    beta: float = 1.0
    norm_order: float = 2.0

    def __post_init__(self):
        for name in ("kernel_h", "kernel_w", "stride_h", "stride_w"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        check_norm_order(self.norm_order)


def pooled_dims(h: int, w: int, config: PoolConfig) -> tuple[int, int]:
    """Valid-window output dims; errors when the frame is smaller than the kernel."""
    if h < config.kernel_h or w < config.kernel_w:
        raise ValueError(
            f"frame smaller than kernel: frame ({h}, {w}), "
            f"kernel ({config.kernel_h}, {config.kernel_w})"
        )
    return (
        (h - config.kernel_h) // config.stride_h + 1,
        (w - config.kernel_w) // config.stride_w + 1,
    )


def _softmax_last_axis(scaled: np.ndarray) -> np.ndarray:
    # Max-subtracted softmax; mathematically the plain form, numerically
    # stable for large beta * norm.
    shifted = scaled - np.max(scaled, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def window_weights(window, beta: float, p: float) -> np.ndarray:
    """Softmax weights over one window's beta-scaled Lp norms.

    `window` is a sequence of k_H * k_W channel vectors in row-major window
    order. Weights are positive and sum to 1.
    """
    p = check_norm_order(p)
    vecs = np.asarray(window, dtype=np.float64)
    if vecs.ndim != 2 or vecs.shape[0] < 1:
        raise ValueError("window must be a non-empty list of channel vectors")
    if not np.isfinite(vecs).all():
        raise ValueError("non-finite input in window")
    scaled = float(beta) * norm_map_array(vecs, p)
    if not np.isfinite(scaled).all():
        raise ValueError("non-finite norm products in window")
    return _softmax_last_axis(scaled)


def _gather_windows(frame: np.ndarray, config: PoolConfig) -> np.ndarray:
    """Strided windows of an (H, W, d) frame as (H', W', kH*kW, d) float64.

    The window axis is flattened m-major (row, then column) so downstream
    reductions and accumulation visit elements in the reference order.
    """
    view = sliding_window_view(frame, (config.kernel_h, config.kernel_w), axis=(0, 1))
    view = view[:: config.stride_h, :: config.stride_w]  # (H', W', d, kH, kW)
    win = np.transpose(view, (0, 1, 3, 4, 2))  # (H', W', kH, kW, d)
    hh, ww = win.shape[0], win.shape[1]
    k = config.kernel_h * config.kernel_w
    return win.reshape(hh, ww, k, frame.shape[2]).astype(np.float64)


def _pool_array(frame: np.ndarray, config: PoolConfig) -> np.ndarray:
    pooled_dims(frame.shape[0], frame.shape[1], config)
    win = _gather_windows(frame, config)  # (H', W', K, d) float64
    scaled = config.beta * norm_map_array(win, config.norm_order)  # (H', W', K)
    alpha = _softmax_last_axis(scaled)
    assert np.abs(np.sum(alpha, axis=-1) - 1.0).max() < 1e-6

    acc = np.zeros(win.shape[:2] + win.shape[3:], dtype=np.float64)
    for k in range(win.shape[2]):  # fixed order keeps float64 sums reproducible
        acc += alpha[:, :, k, None] * win[:, :, k, :]
    return acc.astype(np.float32)


def _average_pool_array(frame: np.ndarray, config: PoolConfig) -> np.ndarray:
    pooled_dims(frame.shape[0], frame.shape[1], config)
    win = _gather_windows(frame, config)
    acc = np.zeros(win.shape[:2] + win.shape[3:], dtype=np.float64)
    for k in range(win.shape[2]):
        acc += win[:, :, k, :]
    return (acc / win.shape[2]).astype(np.float32)


def pool_frame(frame: TokenGrid, config: PoolConfig) -> TokenGrid:
    """Norm-weighted pooling of one frame."""
    return TokenGrid(_pool_array(frame.data, config))


def average_pool_reference(frame: TokenGrid, config: PoolConfig) -> TokenGrid:
    """Unweighted mean over the same window geometry.

    The baseline this pooling replaces; also the beta -> 0 limit of
    pool_frame, which is how the tests use it.
    """
    return TokenGrid(_average_pool_array(frame.data, config))


def apply_nsp(tokens: FrameTokens, config: PoolConfig) -> FrameTokens:
    """Pool every frame independently; output shape (N, H', W', d)."""
    hh, ww = pooled_dims(tokens.height, tokens.width, config)
    out = np.empty((tokens.n_frames, hh, ww, tokens.channels), dtype=np.float32)
    for i in range(tokens.n_frames):
        out[i] = _pool_array(tokens.data[i], config)
    return FrameTokens(out)
