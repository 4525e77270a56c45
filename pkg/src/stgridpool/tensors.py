"""Dense token-tensor containers and shared numeric primitives.

Storage is 32-bit float, row-major. All reductions (norms, weighted sums)
accumulate in float64 before results are rounded back to float32; every
module that computes a token norm goes through the helpers here, so the
optimized kernels and the loop-based references stay bitwise comparable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrameTokens",
    "TokenGrid",
    "lp_norm",
    "token_norm_map",
    "bilinear_resize",
    "spatial_concat",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    """Own a C-contiguous float32 copy and lock it against writes."""
    out = np.array(arr, dtype=np.float32, order="C", copy=True)
    out.flags.writeable = False
    return out


def _validate_token_array(arr: np.ndarray, rank: int, what: str) -> None:
    if arr.ndim != rank:
        raise ValueError(f"{what} expects a rank-{rank} array, got rank {arr.ndim}")
    if any(s < 1 for s in arr.shape):
        raise ValueError(f"{what} dimensions must all be >= 1, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"non-finite input: {what} must contain only finite values")


@dataclass(frozen=True)
class FrameTokens:
    """A 4-D token tensor: frames x height x width x channels, float32.

    The wrapped array is an immutable C-contiguous copy; every operation
    that "modifies" frames returns a new instance.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        _validate_token_array(arr, 4, "FrameTokens")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    def frame(self, index: int) -> "TokenGrid":
        if not 0 <= index < self.n_frames:
            raise ValueError(f"frame index {index} out of range [0, {self.n_frames})")
        return TokenGrid(self.data[index])


@dataclass(frozen=True)
class TokenGrid:
    """A single frame-shaped token map: height x width x channels, float32."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        _validate_token_array(arr, 3, "TokenGrid")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def check_norm_order(p: float) -> float:
    p = float(p)
    if not (p >= 1.0):  # also rejects NaN
        raise ValueError(f"invalid norm order: p must be >= 1, got {p}")
    return p


def _abs_pow(arr64: np.ndarray, p: float) -> np.ndarray:
    # p == 1 / p == 2 fast paths are shared by every norm consumer so the
    # vectorized kernels and the scalar reference produce identical bits.
    if p == 1.0:
        return np.abs(arr64)
    if p == 2.0:
        return arr64 * arr64
    return np.abs(arr64) ** p


def _root(acc: np.ndarray, p: float) -> np.ndarray:
    if p == 1.0:
        return acc
    if p == 2.0:
        return np.sqrt(acc)
    return acc ** (1.0 / p)


def lp_norm(vector, p: float) -> float:
    """Lp norm of one channel vector, accumulated in float64.

    Raises on non-finite entries and on p < 1. Internally evaluated through
    the same array kernel as the vectorized norm maps: numpy's scalar pow
    and its array pow can disagree in the last ulp, and norm consumers rely
    on all paths producing identical bits.
    """
    p = check_norm_order(p)
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("lp_norm expects a non-empty 1-D vector")
    if not np.isfinite(v).all():
        raise ValueError("non-finite input to lp_norm")
    return float(norm_map_array(v[None, :], p)[0])


def norm_map_array(tokens64: np.ndarray, p: float) -> np.ndarray:
    """Lp norm over the trailing channel axis of a float64 array.

    The channel axis must be contiguous so the reduction matches lp_norm
    bitwise; callers pass fresh float64 conversions, which are.
    """
    return _root(np.sum(_abs_pow(tokens64, p), axis=-1), p)


def token_norm_map(frame: TokenGrid, p: float) -> np.ndarray:
    """Per-position Lp norms of a frame, as an (H, W) float64 map."""
    p = check_norm_order(p)
    return norm_map_array(frame.data.astype(np.float64), p)


# ---------------------------------------------------------------------------
# Bilinear resampling
# ---------------------------------------------------------------------------


def _axis_coords(src: int, dst: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel source coordinates for one axis: low index, high index, frac."""
    pos = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    pos = np.clip(pos, 0.0, src - 1.0)
    lo = np.floor(pos).astype(np.intp)
    frac = pos - lo
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, frac


def resize_array(grid: np.ndarray, target_h: int, target_w: int) -> np.ndarray:
    """Channel-wise bilinear resize of an (H, W, d) float32 array.

    Uses half-pixel (pixel-center) mapping with edge clamping. Returning the
    input bit-identically when the target matches the source is part of the
    contract, hence the explicit shortcut.
    """
    if target_h < 1 or target_w < 1:
        raise ValueError(f"resize target must be >= 1, got ({target_h}, {target_w})")
    h, w = grid.shape[0], grid.shape[1]
    if (target_h, target_w) == (h, w):
        return grid.copy()

    y0, y1, fy = _axis_coords(h, target_h)
    x0, x1, fx = _axis_coords(w, target_w)
    g = grid.astype(np.float64)

    top = g[y0][:, x0] * (1.0 - fx)[None, :, None] + g[y0][:, x1] * fx[None, :, None]
    bot = g[y1][:, x0] * (1.0 - fx)[None, :, None] + g[y1][:, x1] * fx[None, :, None]
    out = top * (1.0 - fy)[:, None, None] + bot * fy[:, None, None]
    return out.astype(np.float32)


def bilinear_resize(grid: TokenGrid, target_h: int, target_w: int) -> TokenGrid:
    """Resize a token grid to (target_h, target_w) with bilinear interpolation."""
    return TokenGrid(resize_array(grid.data, int(target_h), int(target_w)))


# ---------------------------------------------------------------------------
# Spatial concatenation
# ---------------------------------------------------------------------------


def concat_arrays(grids: list[np.ndarray], m: int, n: int) -> np.ndarray:
    """Tile m*n equally-shaped (H, W, d) arrays into an (n*H, m*W, d) array.

    List element k lands at block row k // m, block column k % m, i.e. m
    grids per row and n block rows.
    """
    if m < 1 or n < 1:
        raise ValueError(f"grid shape must be >= 1, got ({m}, {n})")
    if len(grids) != m * n:
        raise ValueError(f"spatial_concat expects {m * n} grids, got {len(grids)}")
    shape = grids[0].shape
    for k, g in enumerate(grids):
        if g.shape != shape:
            raise ValueError(
                f"spatial_concat shape mismatch: grid 0 is {shape}, grid {k} is {g.shape}"
            )
    rows = [np.concatenate(grids[r * m : (r + 1) * m], axis=1) for r in range(n)]
    return np.concatenate(rows, axis=0)


def spatial_concat(grids: list[TokenGrid], m: int, n: int) -> TokenGrid:
    """Concatenate m*n token grids into one (n*H) x (m*W) grid, row-major."""
    return TokenGrid(concat_arrays([g.data for g in grids], int(m), int(n)))
