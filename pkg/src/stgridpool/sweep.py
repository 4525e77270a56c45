"""Configuration sweeps: the pipeline across a cartesian parameter grid.

One CSV row per configuration with the token budget and the mean/std of
the output token norms. Rows are emitted in the fixed cartesian order
(beta, norm order, levels, base length, kernel) regardless of how many
workers evaluate them; STGP_THREADS caps the worker count.
"""

from __future__ import annotations

import csv
import io
import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .pipeline import st_gridpool, token_budget
from .runconfig import DEFAULTS, make_config
from .tensors import FrameTokens, norm_map_array

__all__ = ["SweepSpec", "run_sweep", "sweep_csv", "max_workers"]

SWEEP_COLUMNS = [
    "beta", "norm_order", "levels", "base_length",
    "kernel_h", "kernel_w", "stride_h", "stride_w",
    "input_tokens", "output_tokens", "ratio",
    "out_norm_mean", "out_norm_std",
]


@dataclass(frozen=True)
class SweepSpec:
    """Axes of the sweep; stride follows the kernel, as in the shape ablation."""

    beta: tuple[float, ...] = (DEFAULTS["beta"],)
    norm_order: tuple[float, ...] = (DEFAULTS["norm_order"],)
    levels: tuple[int, ...] = (DEFAULTS["levels"],)
    base_length: tuple[int, ...] = (DEFAULTS["base_length"],)
    kernel: tuple[tuple[int, int], ...] = ((DEFAULTS["kernel_h"], DEFAULTS["kernel_w"]),)
    base: dict = field(default_factory=dict)  # overrides for the non-swept keys

    def __post_init__(self):
        for name in ("beta", "norm_order", "levels", "base_length", "kernel"):
            if len(getattr(self, name)) < 1:
                raise ValueError(f"sweep axis {name} must not be empty")

    def mappings(self) -> list[dict]:
        combos = itertools.product(
            self.beta, self.norm_order, self.levels, self.base_length, self.kernel
        )
        out = []
        for beta, p, levels, base_len, (kh, kw) in combos:
            m = dict(self.base)
            m.update(
                beta=beta, norm_order=p, levels=levels, base_length=base_len,
                kernel_h=kh, kernel_w=kw, stride_h=kh, stride_w=kw,
            )
            out.append(m)
        return out


def max_workers() -> int:
    raw = os.environ.get("STGP_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n >= 1 else (os.cpu_count() or 1)


def _evaluate(tokens: FrameTokens, mapping: dict) -> dict:
    config = make_config(mapping)
    budget = token_budget(tokens.n_frames, tokens.height, tokens.width, config)
    out = st_gridpool(tokens, config)
    norms = norm_map_array(out.data.astype(np.float64), config.pool.norm_order)
    return {
        "beta": config.pool.beta,
        "norm_order": config.pool.norm_order,
        "levels": config.ptg.levels,
        "base_length": config.ptg.base_length,
        "kernel_h": config.pool.kernel_h,
        "kernel_w": config.pool.kernel_w,
        "stride_h": config.pool.stride_h,
        "stride_w": config.pool.stride_w,
        "input_tokens": budget.input_tokens,
        "output_tokens": budget.output_tokens,
        "ratio": budget.ratio,
        "out_norm_mean": float(norms.mean()),
        "out_norm_std": float(norms.std()),
    }


def run_sweep(tokens: FrameTokens, spec: SweepSpec) -> list[dict]:
    """Evaluate every configuration; result order matches spec.mappings()."""
    mappings = spec.mappings()
    workers = min(max_workers(), len(mappings))
    if workers <= 1:
        return [_evaluate(tokens, m) for m in mappings]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda m: _evaluate(tokens, m), mappings))


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c]
                         for c in SWEEP_COLUMNS])
    return buf.getvalue()
