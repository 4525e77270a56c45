"""Full compression pipeline: temporal gridding, then spatial pooling.

The stage order is fixed. Either stage can be switched off to reproduce
single-component variants, but a configuration with both disabled is
rejected up front. Temporal gridding overwrites frames in place, so the
token budget is decided entirely by the pooling geometry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .nsp import PoolConfig, apply_nsp, pooled_dims
from .ptg import PtgConfig, apply_ptg, build_schedule
from .tensors import FrameTokens

__all__ = ["StGridPoolConfig", "BudgetReport", "st_gridpool", "token_budget"]


@dataclass(frozen=True)
class StGridPoolConfig:
    ptg: PtgConfig = field(default_factory=PtgConfig)
    pool: PoolConfig = field(default_factory=PoolConfig)
    ptg_enabled: bool = True
    nsp_enabled: bool = True

    def __post_init__(self):
        if not (self.ptg_enabled or self.nsp_enabled):
            raise ValueError("at least one pipeline stage must be enabled")


@dataclass(frozen=True)
class BudgetReport:
    """Token counts before and after the pipeline."""

    input_tokens: int
    output_tokens: int

    @property
    def ratio(self) -> float:
        return self.output_tokens / self.input_tokens

    def as_dict(self) -> dict:
        return {
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "ratio": self.ratio,
        }


def token_budget(n: int, h: int, w: int, config: StGridPoolConfig) -> BudgetReport:
    """Exact input/output token counts for an (n, h, w, *) tensor.

    Raises before any computation if the pooling geometry cannot fit.
    """
    if n < 1 or h < 1 or w < 1:
        raise ValueError(f"tensor dims must be >= 1, got ({n}, {h}, {w})")
    if config.nsp_enabled:
        hh, ww = pooled_dims(h, w, config.pool)
    else:
        hh, ww = h, w
    return BudgetReport(input_tokens=n * h * w, output_tokens=n * hh * ww)


def st_gridpool(tokens: FrameTokens, config: StGridPoolConfig) -> FrameTokens:
    """Run the enabled stages in order and return the compressed tensor."""
    # Validate geometry before touching any data.
    token_budget(tokens.n_frames, tokens.height, tokens.width, config)

    out = tokens
    if config.ptg_enabled:
        schedule = build_schedule(out.n_frames, config.ptg)
        out = apply_ptg(out, schedule, config.ptg.grid)
    if config.nsp_enabled:
        out = apply_nsp(out, config.pool)
    return out
