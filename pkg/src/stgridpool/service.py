"""HTTP service exposing the compression pipeline.

Tensors travel as base64-encoded STGP bytes inside JSON bodies, so the
wire format and the on-disk format are the same thing. The CLI is a thin
client of these endpoints; nothing here computes anything the library
does not.
"""

from __future__ import annotations

import base64
import binascii

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .analysis import (
    DEFAULT_BINS,
    SaliencyMask,
    norm_stats,
    norm_stats_frames,
    stats_to_csv,
    top_fraction_mask,
)
from .pipeline import st_gridpool, token_budget
from .ptg import build_schedule
from .runconfig import DEFAULTS, make_config
from .sweep import SweepSpec, run_sweep, sweep_csv
from .tensorfile import decode_tensor, encode_tensor
from .tensors import FrameTokens, TokenGrid

__all__ = ["create_app", "RunConfigModel"]


class RunConfigModel(BaseModel):
    """Pipeline settings; unknown keys are rejected at the boundary."""

    model_config = ConfigDict(extra="forbid")

    base_length: int = DEFAULTS["base_length"]
    levels: int = DEFAULTS["levels"]
    grid_m: int = DEFAULTS["grid_m"]
    grid_n: int = DEFAULTS["grid_n"]
    kernel_h: int = DEFAULTS["kernel_h"]
    kernel_w: int = DEFAULTS["kernel_w"]
    stride_h: int = DEFAULTS["stride_h"]
    stride_w: int = DEFAULTS["stride_w"]
    beta: float = DEFAULTS["beta"]
    norm_order: float = DEFAULTS["norm_order"]
    ptg_enabled: bool = DEFAULTS["ptg_enabled"]
    nsp_enabled: bool = DEFAULTS["nsp_enabled"]


class BudgetModel(BaseModel):
    input_tokens: int
    output_tokens: int
    ratio: float


class PoolRequest(BaseModel):
    tensor_b64: str
    config: RunConfigModel = Field(default_factory=RunConfigModel)


class PoolResponse(BaseModel):
    tensor_b64: str
    budget: BudgetModel


class ScheduleRequest(BaseModel):
    n_frames: int
    config: RunConfigModel = Field(default_factory=RunConfigModel)


class SegmentModel(BaseModel):
    level: int
    index: int
    start: int
    span_end: int
    update_index: int
    sample_indices: list[int]


class LevelModel(BaseModel):
    level: int
    segment_length: int
    segment_count: int
    segments: list[SegmentModel]


class ScheduleResponse(BaseModel):
    n_frames: int
    levels: list[LevelModel]


class BudgetRequest(BaseModel):
    n_frames: int
    height: int
    width: int
    config: RunConfigModel = Field(default_factory=RunConfigModel)


class AnalyzeRequest(BaseModel):
    tensor_b64: str
    mask_b64: str | None = None
    norm_order: float = 2.0
    fraction: float | None = None
    bins: int = DEFAULT_BINS


class AnalyzeResponse(BaseModel):
    stats_csv: str
    mask_b64: str | None = None


class SweepAxes(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: list[float] = [DEFAULTS["beta"]]
    norm_order: list[float] = [DEFAULTS["norm_order"]]
    levels: list[int] = [DEFAULTS["levels"]]
    base_length: list[int] = [DEFAULTS["base_length"]]
    kernel: list[tuple[int, int]] = [(DEFAULTS["kernel_h"], DEFAULTS["kernel_w"])]


class SweepRequest(BaseModel):
    tensor_b64: str
    axes: SweepAxes = Field(default_factory=SweepAxes)
    config: RunConfigModel = Field(default_factory=RunConfigModel)


class SweepResponse(BaseModel):
    csv: str


def _decode_b64(text: str, what: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValueError(f"{what} is not valid base64: {exc}") from exc


def _tensor_from_b64(text: str) -> FrameTokens | TokenGrid:
    return decode_tensor(_decode_b64(text, "tensor_b64"))


def _tensor_to_b64(tensor: FrameTokens | TokenGrid) -> str:
    return base64.b64encode(encode_tensor(tensor)).decode("ascii")


def _mask_from_b64(text: str) -> SaliencyMask:
    grid = decode_tensor(_decode_b64(text, "mask_b64"))
    if not isinstance(grid, TokenGrid) or grid.channels != 1:
        raise ValueError("mask tensor must be rank 3 with a single channel")
    return SaliencyMask(grid.data[:, :, 0])


def _mask_to_grid(mask: SaliencyMask) -> TokenGrid:
    return TokenGrid(mask.values[:, :, None].astype(np.float32))


def create_app() -> FastAPI:
    app = FastAPI(title="stgridpool", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "service": "stgridpool", "version": __version__}

    @app.post("/v1/pool", response_model=PoolResponse)
    def pool(req: PoolRequest) -> PoolResponse:
        tokens = _tensor_from_b64(req.tensor_b64)
        if not isinstance(tokens, FrameTokens):
            raise ValueError("pool expects a rank-4 tensor (frames, h, w, channels)")
        config = make_config(req.config.model_dump())
        budget = token_budget(tokens.n_frames, tokens.height, tokens.width, config)
        out = st_gridpool(tokens, config)
        return PoolResponse(
            tensor_b64=_tensor_to_b64(out),
            budget=BudgetModel(**budget.as_dict()),
        )

    @app.post("/v1/schedule", response_model=ScheduleResponse)
    def schedule(req: ScheduleRequest) -> ScheduleResponse:
        config = make_config(req.config.model_dump())
        plan = build_schedule(req.n_frames, config.ptg)
        return ScheduleResponse(
            n_frames=plan.n_frames,
            levels=[
                LevelModel(
                    level=lvl.level,
                    segment_length=lvl.segment_length,
                    segment_count=lvl.segment_count,
                    segments=[
                        SegmentModel(
                            level=seg.level,
                            index=seg.index,
                            start=seg.start,
                            span_end=seg.span_end,
                            update_index=seg.update_index,
                            sample_indices=list(seg.sample_indices),
                        )
                        for seg in lvl.segments
                    ],
                )
                for lvl in plan.levels
            ],
        )

    @app.post("/v1/budget", response_model=BudgetModel)
    def budget(req: BudgetRequest) -> BudgetModel:
        config = make_config(req.config.model_dump())
        report = token_budget(req.n_frames, req.height, req.width, config)
        return BudgetModel(**report.as_dict())

    @app.post("/v1/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
        tensor = _tensor_from_b64(req.tensor_b64)
        mask = _mask_from_b64(req.mask_b64) if req.mask_b64 else None

        if isinstance(tensor, FrameTokens):
            stats = norm_stats_frames(tensor, mask, req.norm_order, req.bins)
        else:
            stats = norm_stats(tensor, mask, req.norm_order, req.bins)

        mask_b64 = None
        if req.fraction is not None:
            if isinstance(tensor, FrameTokens):
                per_frame = [
                    top_fraction_mask(tensor.frame(i), req.fraction, req.norm_order)
                    for i in range(tensor.n_frames)
                ]
                stacked = np.stack([m.values for m in per_frame]).astype(np.float32)
                mask_b64 = _tensor_to_b64(FrameTokens(stacked[:, :, :, None]))
            else:
                top = top_fraction_mask(tensor, req.fraction, req.norm_order)
                mask_b64 = _tensor_to_b64(_mask_to_grid(top))

        return AnalyzeResponse(stats_csv=stats_to_csv(stats), mask_b64=mask_b64)

    @app.post("/v1/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        tokens = _tensor_from_b64(req.tensor_b64)
        if not isinstance(tokens, FrameTokens):
            raise ValueError("sweep expects a rank-4 tensor (frames, h, w, channels)")
        spec = SweepSpec(
            beta=tuple(req.axes.beta),
            norm_order=tuple(req.axes.norm_order),
            levels=tuple(req.axes.levels),
            base_length=tuple(req.axes.base_length),
            kernel=tuple((kh, kw) for kh, kw in req.axes.kernel),
            base=req.config.model_dump(),
        )
        return SweepResponse(csv=sweep_csv(run_sweep(tokens, spec)))

    return app
