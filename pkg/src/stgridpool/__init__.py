"""Training-free spatiotemporal token compression.

Two stages over a (frames, height, width, channels) float32 token tensor:
hierarchical temporal gridding that rewrites segment-end frames with
multi-frame summary grids, then norm-weighted spatial pooling that keeps
high-information regions dominant while shrinking each frame.
"""

__version__ = "0.1.0"

from .analysis import NormStats, SaliencyMask, norm_stats, top_fraction_mask
from .nsp import PoolConfig, apply_nsp, average_pool_reference, pool_frame, window_weights
from .pipeline import BudgetReport, StGridPoolConfig, st_gridpool, token_budget
from .ptg import (
    GridSpec,
    PtgConfig,
    PyramidSchedule,
    apply_ptg,
    build_schedule,
    summary_token,
)
from .runconfig import DEFAULTS, make_config, parse_run_config
from .tensorfile import read_tensor, write_tensor
from .tensors import (
    FrameTokens,
    TokenGrid,
    bilinear_resize,
    lp_norm,
    spatial_concat,
    token_norm_map,
)

__all__ = [
    "__version__",
    "FrameTokens",
    "TokenGrid",
    "lp_norm",
    "token_norm_map",
    "bilinear_resize",
    "spatial_concat",
    "GridSpec",
    "PtgConfig",
    "PyramidSchedule",
    "build_schedule",
    "summary_token",
    "apply_ptg",
    "PoolConfig",
    "window_weights",
    "pool_frame",
    "apply_nsp",
    "average_pool_reference",
    "StGridPoolConfig",
    "BudgetReport",
    "st_gridpool",
    "token_budget",
    "SaliencyMask",
    "NormStats",
    "norm_stats",
    "top_fraction_mask",
    "read_tensor",
    "write_tensor",
    "DEFAULTS",
    "make_config",
    "parse_run_config",
]
