"""Textual run configuration shared by the CLI, config files, and service.

A run config is a flat key/value mapping mirroring the pipeline settings.
Unknown keys are rejected. Missing keys take the defaults below, which are
the best-performing settings: 2x2 kernel and stride, beta 1, L2 norm,
three pyramid levels with base segment length 8, 2x2 sampling grid.
"""

from __future__ import annotations

from .nsp import PoolConfig
from .pipeline import StGridPoolConfig
from .ptg import GridSpec, PtgConfig

__all__ = ["DEFAULTS", "parse_run_config", "make_config", "config_mapping"]

DEFAULTS: dict[str, object] = {
    "base_length": 8,
    "levels": 3,
    "grid_m": 2,
    "grid_n": 2,
    "kernel_h": 2,
    "kernel_w": 2,
    "stride_h": 2,
    "stride_w": 2,
    "beta": 1.0,
    "norm_order": 2.0,
    "ptg_enabled": True,
    "nsp_enabled": True,
}

_INT_KEYS = frozenset(
    ("base_length", "levels", "grid_m", "grid_n",
     "kernel_h", "kernel_w", "stride_h", "stride_w")
)
_FLOAT_KEYS = frozenset(("beta", "norm_order"))
_BOOL_KEYS = frozenset(("ptg_enabled", "nsp_enabled"))


def _coerce(key: str, value: object):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise ValueError(f"invalid value for {key}: {value!r}") from None
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes", "on"):
        return True
    if text in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"invalid boolean for {key}: {value!r}")


def parse_run_config(text: str) -> dict:
    """Parse `key = value` lines (# comments allowed) into a full mapping."""
    values = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in DEFAULTS:
            raise ValueError(f"unknown config key: {key}")
        values[key] = _coerce(key, value.strip())
    return values


def make_config(mapping: dict | None = None) -> StGridPoolConfig:
    """Build a validated pipeline config from a (possibly partial) mapping."""
    values = dict(DEFAULTS)
    for key, value in (mapping or {}).items():
        if key not in DEFAULTS:
            raise ValueError(f"unknown config key: {key}")
        values[key] = _coerce(key, value)
    return StGridPoolConfig(
        ptg=PtgConfig(
            base_length=values["base_length"],
            levels=values["levels"],
            grid=GridSpec(m=values["grid_m"], n=values["grid_n"]),
        ),
        pool=PoolConfig(
            kernel_h=values["kernel_h"],
            kernel_w=values["kernel_w"],
            stride_h=values["stride_h"],
            stride_w=values["stride_w"],
            beta=values["beta"],
            norm_order=values["norm_order"],
        ),
        ptg_enabled=values["ptg_enabled"],
        nsp_enabled=values["nsp_enabled"],
    )


def config_mapping(config: StGridPoolConfig) -> dict:
    return {
        "base_length": config.ptg.base_length,
        "levels": config.ptg.levels,
        "grid_m": config.ptg.grid.m,
        "grid_n": config.ptg.grid.n,
        "kernel_h": config.pool.kernel_h,
        "kernel_w": config.pool.kernel_w,
        "stride_h": config.pool.stride_h,
        "stride_w": config.pool.stride_w,
        "beta": config.pool.beta,
        "norm_order": config.pool.norm_order,
        "ptg_enabled": config.ptg_enabled,
        "nsp_enabled": config.nsp_enabled,
    }
