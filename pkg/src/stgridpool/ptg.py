"""Pyramid temporal gridding.

A frame sequence of length N is partitioned L times, level l using segments
of length K * 2**(l-1). Each segment contributes one summary grid: m*n of
its frames are sampled at a uniform stride, tiled into an (n*H) x (m*W)
mosaic, resized back to (H, W), and written over the segment's last frame.

Levels are applied in ascending order with sequential visibility: a summary
at level l is computed from the sequence as already updated by levels below
it (and by earlier segments of the same level). Frames that are not the
update target of any segment pass through bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensors import FrameTokens, TokenGrid, concat_arrays, resize_array

__all__ = [
    "GridSpec",
    "PtgConfig",
    "Segment",
    "LevelSchedule",
    "PyramidSchedule",
    "build_schedule",
    "summary_token",
    "apply_ptg",
]


@dataclass(frozen=True)
class GridSpec:
    """Frame-sampling grid: m columns x n rows of sampled frames per summary."""

    m: int = 2
    n: int = 2

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"grid dimensions must be >= 1, got ({self.m}, {self.n})")

    @property
    def samples(self) -> int:
        return self.m * self.n


@dataclass(frozen=True)
class PtgConfig:
    """Temporal pyramid parameters.

    base_length is the level-1 segment length; level l uses
    base_length * 2**(l-1). Defaults correspond to segment lengths
    (8, 16, 32) with a 2x2 sampling grid.
    """

    base_length: int = 8
    levels: int = 3
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        if self.base_length < 1:
            raise ValueError(f"base_length must be >= 1, got {self.base_length}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")

    def segment_length(self, level: int) -> int:
        return self.base_length * 2 ** (level - 1)


@dataclass(frozen=True)
class Segment:
    level: int
    index: int
    start: int
    span_end: int  # inclusive last frame of the segment span
    update_index: int  # frame overwritten by this segment's summary
    sample_indices: tuple[int, ...]


@dataclass(frozen=True)
class LevelSchedule:
    level: int
    segment_length: int
    segment_count: int
    segments: tuple[Segment, ...]


@dataclass(frozen=True)
class PyramidSchedule:
    """Full level/segment plan for a sequence of n_frames frames."""

    n_frames: int
    levels: tuple[LevelSchedule, ...]

    def all_segments(self) -> tuple[Segment, ...]:
        return tuple(seg for lvl in self.levels for seg in lvl.segments)

    def update_indices(self) -> set[int]:
        return {seg.update_index for seg in self.all_segments()}


def build_schedule(n_frames: int, config: PtgConfig) -> PyramidSchedule:
    """Compute the segment plan for n_frames frames.

    Segment starts at level l are 0, K_l, 2*K_l, ... below n_frames. Sample
    indices step by floor(K_l / (m*n)); a zero step (segment shorter than
    the sample count) is treated as 1, and every index is clamped to the
    segment's last in-range frame, so short final segments repeat their
    trailing frame instead of reading past the tensor.
    """
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    samples = config.grid.samples

    levels = []
    for level in range(1, config.levels + 1):
        seg_len = config.segment_length(level)
        seg_count = -(-n_frames // seg_len)  # ceil(N / K_l)
        step = max(seg_len // samples, 1)
        segments = []
        for j in range(seg_count):
            start = j * seg_len
            span_end = min(start + seg_len - 1, n_frames - 1)
            indices = tuple(min(start + k * step, span_end) for k in range(samples))
            segments.append(
                Segment(
                    level=level,
                    index=j,
                    start=start,
                    span_end=span_end,
                    update_index=span_end,
                    sample_indices=indices,
                )
            )
        levels.append(
            LevelSchedule(
                level=level,
                segment_length=seg_len,
                segment_count=seg_count,
                segments=tuple(segments),
            )
        )
    return PyramidSchedule(n_frames=n_frames, levels=tuple(levels))


def _summary_from_array(frames: np.ndarray, sample_indices, grid: GridSpec) -> np.ndarray:
    h, w = frames.shape[1], frames.shape[2]
    mosaic = concat_arrays([frames[i] for i in sample_indices], grid.m, grid.n)
    return resize_array(mosaic, h, w)


def summary_token(tokens: FrameTokens, sample_indices, grid: GridSpec) -> TokenGrid:
    """Build one segment summary: gather m*n frames, tile, resize to (H, W)."""
    indices = list(sample_indices)
    if len(indices) != grid.samples:
        raise ValueError(
            f"expected {grid.samples} sample indices for a {grid.m}x{grid.n} grid, "
            f"got {len(indices)}"
        )
    for i in indices:
        if not 0 <= i < tokens.n_frames:
            raise ValueError(f"sample index {i} out of range [0, {tokens.n_frames})")
    return TokenGrid(_summary_from_array(tokens.data, indices, grid))


def apply_ptg(tokens: FrameTokens, schedule: PyramidSchedule, grid: GridSpec) -> FrameTokens:
    """Overwrite each segment's update frame with its summary token.

    Processes levels in ascending order and segments left to right; each
    summary reads the sequence as updated so far.
    """
    if schedule.n_frames != tokens.n_frames:
        raise ValueError(
            f"schedule built for {schedule.n_frames} frames, tensor has {tokens.n_frames}"
        )
    work = tokens.data.copy()
    for level in schedule.levels:
        for seg in level.segments:
            if len(seg.sample_indices) != grid.samples:
                raise ValueError(
                    f"schedule segment carries {len(seg.sample_indices)} samples, "
                    f"grid {grid.m}x{grid.n} needs {grid.samples}"
                )
            work[seg.update_index] = _summary_from_array(work, seg.sample_indices, grid)
    return FrameTokens(work)
