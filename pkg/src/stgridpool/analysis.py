"""Norm-saliency analysis over token grids.

Desk-scale study of how token norms separate salient regions from
background: per-region norm distributions (with shared histogram bins so
regions are directly comparable) and top-fraction norm masks. Output is
CSV; plotting stays outside the package.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .tensors import (
    FrameTokens,
    TokenGrid,
    check_norm_order,
    norm_map_array,
    token_norm_map,
)

__all__ = [
    "SaliencyMask",
    "NormStats",
    "norm_stats",
    "norm_stats_frames",
    "top_fraction_mask",
    "stats_to_csv",
]

DEFAULT_BINS = 64


@dataclass(frozen=True)
class SaliencyMask:
    """Binary (H, W) map: 1 = salient, 0 = background."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got rank {arr.ndim}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class NormStats:
    """Distribution summary of one region's token norms."""

    region: str
    count: int
    mean: float
    std: float
    min: float
    max: float
    bin_edges: tuple[float, ...]
    bin_counts: tuple[int, ...]


def _region_stats(region: str, values: np.ndarray, edges: np.ndarray) -> NormStats:
    if values.size == 0:
        return NormStats(
            region, 0, 0.0, 0.0, 0.0, 0.0,
            tuple(float(e) for e in edges), (0,) * (len(edges) - 1),
        )
    counts, _ = np.histogram(values, bins=edges)
    return NormStats(
        region=region,
        count=int(values.size),
        mean=float(values.mean()),
        std=float(values.std()),
        min=float(values.min()),
        max=float(values.max()),
        bin_edges=tuple(float(e) for e in edges),
        bin_counts=tuple(int(c) for c in counts),
    )


def _stats_from_norms(
    norm_values: np.ndarray, mask_flat: np.ndarray | None, bins: int
) -> list[NormStats]:
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    hi = float(norm_values.max()) if norm_values.size else 0.0
    # Degenerate all-zero input still needs well-formed edges.
    edges = np.linspace(0.0, hi if hi > 0 else 1.0, bins + 1)
    if mask_flat is None:
        return [_region_stats("all", norm_values, edges)]
    return [
        _region_stats("salient", norm_values[mask_flat == 1], edges),
        _region_stats("background", norm_values[mask_flat == 0], edges),
    ]


def norm_stats(
    frame: TokenGrid,
    mask: SaliencyMask | None = None,
    p: float = 2.0,
    bins: int = DEFAULT_BINS,
) -> list[NormStats]:
    """Per-region Lp-norm distributions of one frame.

    With a mask the regions are salient/background; without, a single
    "all" region. Histogram edges span [0, max observed norm] and are
    shared across regions.
    """
    if mask is not None and mask.shape != (frame.height, frame.width):
        raise ValueError(
            f"mask shape {mask.shape} does not match frame ({frame.height}, {frame.width})"
        )
    norms = token_norm_map(frame, p).ravel()
    flat = mask.values.ravel() if mask is not None else None
    return _stats_from_norms(norms, flat, bins)


def norm_stats_frames(
    tokens: FrameTokens,
    mask: SaliencyMask | None = None,
    p: float = 2.0,
    bins: int = DEFAULT_BINS,
) -> list[NormStats]:
    """Aggregate norm_stats over every frame of a 4-D tensor.

    The same (H, W) mask labels each frame; all frames' tokens feed one
    distribution per region.
    """
    if mask is not None and mask.shape != (tokens.height, tokens.width):
        raise ValueError(
            f"mask shape {mask.shape} does not match frames "
            f"({tokens.height}, {tokens.width})"
        )
    p = check_norm_order(p)
    norms = norm_map_array(tokens.data.astype(np.float64), p)  # (N, H, W)
    flat = None
    if mask is not None:
        flat = np.broadcast_to(mask.values, norms.shape).ravel()
    return _stats_from_norms(norms.ravel(), flat, bins)


def top_fraction_mask(frame: TokenGrid, fraction: float, p: float = 2.0) -> SaliencyMask:
    """Mark the ceil(fraction * H * W) highest-norm positions.

    Ties break toward the earlier row-major position, so the result is
    deterministic.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    norms = token_norm_map(frame, p).ravel()
    k = math.ceil(fraction * norms.size)
    order = np.argsort(-norms, kind="stable")
    flat = np.zeros(norms.size, dtype=np.uint8)
    flat[order[:k]] = 1
    return SaliencyMask(flat.reshape(frame.height, frame.width))


def stats_to_csv(stats: list[NormStats]) -> str:
    """Render stats as CSV: one summary row per region, one row per bin.

    Bin rows carry raw counts plus the region total, so density or count
    views are both derivable downstream.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["kind", "region", "bin_index", "bin_lo", "bin_hi",
         "count", "mean", "std", "min", "max"]
    )
    for s in stats:
        writer.writerow(
            ["summary", s.region, "", "", "",
             s.count, repr(s.mean), repr(s.std), repr(s.min), repr(s.max)]
        )
    for s in stats:
        for i, c in enumerate(s.bin_counts):
            writer.writerow(
                ["bin", s.region, i, repr(s.bin_edges[i]), repr(s.bin_edges[i + 1]),
                 c, "", "", "", ""]
            )
    return buf.getvalue()
