"""Acceptance suite: every shipping criterion at its stated tolerance.

Each test prints one `[PASS]`/`[FAIL]` line (run with `-s` to see them all
on a green run). Tolerances are pinned here, not configurable.
"""

import math
import os
import time

import numpy as np

from naive_reference import (
    enumerate_segment_starts,
    enumerate_update_indices,
    naive_pool_frame,
)
from stgridpool.analysis import SaliencyMask, norm_stats, top_fraction_mask
from stgridpool.nsp import PoolConfig, apply_nsp, average_pool_reference, pool_frame, window_weights
from stgridpool.pipeline import st_gridpool, token_budget
from stgridpool.ptg import GridSpec, PtgConfig, apply_ptg, build_schedule
from stgridpool.runconfig import make_config
from stgridpool.sweep import SweepSpec, run_sweep, sweep_csv
from stgridpool.tensors import FrameTokens, TokenGrid


def criterion(name):
    def decorate(fn):
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name}")
                raise
            print(f"[PASS] {name}")

        wrapper.__name__ = fn.__name__
        return wrapper

    return decorate


@criterion("schedule correctness: (N=32, K=8, L=3) counts and starts, < 1 ms")
def test_schedule_correctness():
    config = PtgConfig(base_length=8, levels=3, grid=GridSpec(2, 2))
    plan = build_schedule(32, config)
    assert [lvl.segment_count for lvl in plan.levels] == [4, 2, 1]
    assert [s.start for s in plan.levels[0].segments] == [0, 8, 16, 24]
    assert [s.start for s in plan.levels[1].segments] == [0, 16]
    assert [s.start for s in plan.levels[2].segments] == [0]
    # independent enumeration of the same starts
    for lvl in plan.levels:
        assert [s.start for s in lvl.segments] == enumerate_segment_starts(
            32, lvl.segment_length
        )
    best = min(
        _timed(lambda: build_schedule(32, config)) for _ in range(20)
    )
    assert best < 1e-3, f"build_schedule took {best * 1e3:.3f} ms"


def _timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


@criterion("uniform sampling: segment (start 0, K=8, 2x2 grid) -> {0, 2, 4, 6}")
def test_sampling_indices():
    plan = build_schedule(8, PtgConfig(base_length=8, levels=1, grid=GridSpec(2, 2)))
    assert plan.levels[0].segments[0].sample_indices == (0, 2, 4, 6)


@criterion("pooling oracle equivalence: 200 randomized instances, bitwise, < 10 s")
def test_pool_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for _ in range(200):
        kh, kw = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        h = int(rng.integers(kh, 17))
        w = int(rng.integers(kw, 17))
        d = int(rng.integers(1, 33))
        sh, sw = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        beta = float(rng.choice([0.0, 0.5, 1.0, 10.0, 1000.0]))
        p = float(rng.choice([1.0, 2.0, 3.0]))
        frame = TokenGrid(rng.normal(size=(h, w, d)).astype(np.float32))
        config = PoolConfig(kernel_h=kh, kernel_w=kw, stride_h=sh, stride_w=sw,
                            beta=beta, norm_order=p)
        ours = pool_frame(frame, config).data
        ref = naive_pool_frame(frame.data, (kh, kw), (sh, sw), beta, p)
        assert np.array_equal(ours, ref), (h, w, d, kh, kw, sh, sw, beta, p)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"oracle comparison took {elapsed:.1f} s"


@criterion("beta -> 0 limit: pooling equals plain averaging within 1e-6 (100 tensors)")
def test_beta_zero_limit():
    rng = np.random.default_rng(77)
    for _ in range(100):
        kh, kw = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        h = int(rng.integers(kh, 10))
        w = int(rng.integers(kw, 10))
        n = int(rng.integers(1, 5))
        d = int(rng.integers(1, 12))
        config = PoolConfig(kernel_h=kh, kernel_w=kw, stride_h=kh, stride_w=kw,
                            beta=0.0)
        tokens = FrameTokens(rng.normal(size=(n, h, w, d)).astype(np.float32))
        pooled = apply_nsp(tokens, config)
        for i in range(n):
            avg = average_pool_reference(tokens.frame(i), config)
            assert np.abs(pooled.data[i] - avg.data).max() < 1e-6


@criterion("beta -> inf concentration: winner-take-all within 1e-4 at beta=1000")
def test_beta_inf_concentration():
    rng = np.random.default_rng(88)
    for _ in range(50):
        d = int(rng.integers(1, 16))
        directions = rng.normal(size=(4, d))
        directions /= np.maximum(np.linalg.norm(directions, axis=1, keepdims=True), 1e-12)
        base = float(rng.uniform(0.5, 3.0))
        norms = np.array([base, base + 0.1, base + 0.35, base + 0.8])
        order = rng.permutation(4)
        window = (directions * norms[:, None]).astype(np.float32)[order]
        winner = window[np.argmax(norms[order])]
        frame = TokenGrid(window.reshape(2, 2, d))
        out = pool_frame(frame, PoolConfig(beta=1000.0)).data.reshape(d)
        assert np.abs(out - winner).max() < 1e-4


@criterion("weight normalization: sums within 1e-6, no NaN/Inf anywhere")
def test_weight_normalization():
    rng = np.random.default_rng(99)
    for _ in range(300):
        k = int(rng.integers(1, 17))
        d = int(rng.integers(1, 24))
        beta = float(rng.choice([0.0, 0.01, 1.0, 50.0, 1000.0]))
        p = float(rng.choice([1.0, 2.0, 3.0, 4.0]))
        scale = float(rng.choice([1e-3, 1.0, 1e3]))
        weights = window_weights(scale * rng.normal(size=(k, d)), beta=beta, p=p)
        assert np.isfinite(weights).all()
        assert abs(float(weights.sum()) - 1.0) < 1e-6
    # full pooled tensors stay finite as well
    tokens = FrameTokens((1e3 * rng.normal(size=(2, 8, 8, 16))).astype(np.float32))
    for beta in (0.0, 1.0, 1000.0):
        out = apply_nsp(tokens, PoolConfig(beta=beta))
        assert np.isfinite(out.data).all()


@criterion("temporal locality: off-update frames bitwise; (32,8,3) set {7,15,23,31}")
def test_ptg_locality():
    rng = np.random.default_rng(111)
    config = PtgConfig(base_length=8, levels=3, grid=GridSpec(2, 2))
    tokens = FrameTokens(rng.normal(size=(32, 4, 4, 3)).astype(np.float32))
    plan = build_schedule(32, config)
    out = apply_ptg(tokens, plan, config.grid)
    expected = enumerate_update_indices(32, 8, 3)
    assert expected == {7, 15, 23, 31}
    assert plan.update_indices() == expected
    for i in set(range(32)) - expected:
        assert np.array_equal(out.data[i], tokens.data[i])
    # and for a spread of other shapes
    for _ in range(15):
        n = int(rng.integers(1, 50))
        k = int(rng.integers(1, 9))
        levels = int(rng.integers(1, 4))
        t = FrameTokens(rng.normal(size=(n, 3, 3, 2)).astype(np.float32))
        c = PtgConfig(base_length=k, levels=levels, grid=GridSpec(2, 2))
        p = build_schedule(n, c)
        o = apply_ptg(t, p, c.grid)
        for i in set(range(n)) - p.update_indices():
            assert np.array_equal(o.data[i], t.data[i])


@criterion("identity pipeline: no gridding + 1x1 kernel/stride returns input bitwise")
def test_identity_pipeline():
    rng = np.random.default_rng(123)
    tokens = FrameTokens(rng.normal(size=(6, 5, 7, 4)).astype(np.float32))
    config = make_config(
        {"ptg_enabled": False, "kernel_h": 1, "kernel_w": 1,
         "stride_h": 1, "stride_w": 1}
    )
    out = st_gridpool(tokens, config)
    assert np.array_equal(out.data, tokens.data)


@criterion("budget arithmetic: exact 0.25 on even dims; predicted = actual on 50 configs")
def test_budget_arithmetic():
    assert token_budget(4, 8, 12, make_config({})).ratio == 0.25
    rng = np.random.default_rng(321)
    for _ in range(50):
        kh, kw = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        h = int(rng.integers(kh, 12))
        w = int(rng.integers(kw, 12))
        n = int(rng.integers(1, 8))
        mapping = {
            "kernel_h": kh, "kernel_w": kw,
            "stride_h": int(rng.integers(1, 5)),
            "stride_w": int(rng.integers(1, 5)),
            "base_length": int(rng.integers(1, 7)),
            "levels": int(rng.integers(1, 4)),
            "beta": float(rng.uniform(0, 5)),
        }
        config = make_config(mapping)
        tokens = FrameTokens(rng.normal(size=(n, h, w, 2)).astype(np.float32))
        report = token_budget(n, h, w, config)
        out = st_gridpool(tokens, config)
        assert report.output_tokens == out.n_frames * out.height * out.width
        assert report.ratio == report.output_tokens / report.input_tokens


@criterion("norm-saliency separation: > 5 sigma margin and >= 95% top-mask recovery")
def test_norm_saliency_separation():
    rng = np.random.default_rng(444)
    h = w = 16
    d = 64
    flat = np.zeros(h * w, dtype=np.uint8)
    flat[rng.permutation(h * w)[: h * w // 2]] = 1  # salient fraction = 0.5
    mask_values = flat.reshape(h, w)

    directions = rng.normal(size=(h, w, d))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    scale = np.where(mask_values == 1, 2.0, 1.0)[:, :, None]
    noise = rng.normal(scale=0.1, size=(h, w, d))
    frame = TokenGrid((directions * scale + noise).astype(np.float32))

    salient, background = norm_stats(frame, SaliencyMask(mask_values), p=2.0)
    se = math.sqrt(
        (salient.std**2) / salient.count + (background.std**2) / background.count
    )
    margin = salient.mean - background.mean
    assert margin > 5 * se, f"margin {margin:.4f} vs 5*SE {5 * se:.4f}"

    top = top_fraction_mask(frame, fraction=0.5, p=2.0)
    planted = mask_values == 1
    recovered = (top.values == 1) & planted
    recovery = recovered.sum() / planted.sum()
    assert recovery >= 0.95, f"recovered {recovery:.2%} of planted positions"


@criterion("desk-scale throughput: (64, 26, 26, 896) defaults < 5 s; thread-count invariant")
def test_throughput_and_thread_invariance():
    rng = np.random.default_rng(777)
    tokens = FrameTokens(rng.normal(size=(64, 26, 26, 896)).astype(np.float32))
    config = make_config({})

    start = time.perf_counter()
    out = st_gridpool(tokens, config)
    elapsed = time.perf_counter() - start
    assert out.shape == (64, 13, 13, 896)
    assert elapsed < 5.0, f"pipeline took {elapsed:.2f} s"

    # identical bits regardless of the advertised thread budget
    results = []
    sweeps = []
    small = FrameTokens(tokens.data[:8, :8, :8, :16])
    spec = SweepSpec(beta=(0.0, 1.0, 5.0), levels=(1, 2))
    previous = os.environ.get("STGP_THREADS")
    try:
        for threads in ("1", "8"):
            os.environ["STGP_THREADS"] = threads
            results.append(st_gridpool(small, config).data)
            sweeps.append(sweep_csv(run_sweep(small, spec)))
    finally:
        if previous is None:
            os.environ.pop("STGP_THREADS", None)
        else:
            os.environ["STGP_THREADS"] = previous
    assert np.array_equal(results[0], results[1])
    assert sweeps[0] == sweeps[1]
