"""Command-line client for the compression service.

Every command is a thin shell over the HTTP endpoints. With --server (or
STGP_SERVER) requests go to a running instance; otherwise they run against
an in-process ASGI transport, so batch use needs no daemon. Either way the
bytes written to disk are exactly what the service produced.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import json
import os
import sys

import httpx

from . import __version__
from .tensorfile import write_bytes_atomic


class CliError(Exception):
    pass


def _parse_pair(text: str, flag: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise CliError(f"{flag} expects HxW (e.g. 2x2), got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError:
        raise CliError(f"{flag} expects integers, got {text!r}") from None
    return a, b


def _parse_list(text: str, cast):
    try:
        return [cast(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise CliError(f"expected a comma-separated list, got {text!r}") from None


def _add_config_flags(parser: argparse.ArgumentParser, with_pool: bool = True) -> None:
    parser.add_argument("--config", metavar="FILE", help="key=value config file")
    parser.add_argument("--base-length", type=int, metavar="K")
    parser.add_argument("--levels", type=int, metavar="L")
    parser.add_argument("--grid", metavar="MxN", help="summary sampling grid")
    if with_pool:
        parser.add_argument("--kernel", metavar="HxW", help="pooling kernel")
        parser.add_argument("--stride", metavar="HxW", help="pooling stride")
        parser.add_argument("--beta", type=float, help="softmax temperature")
        parser.add_argument("--norm-order", type=float, help="token norm order p")
    parser.add_argument("--no-ptg", action="store_true", help="disable temporal gridding")
    parser.add_argument("--no-nsp", action="store_true", help="disable spatial pooling")


def _config_payload(args: argparse.Namespace) -> dict:
    from .runconfig import parse_run_config

    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as f:
            values.update(parse_run_config(f.read()))
    if getattr(args, "base_length", None) is not None:
        values["base_length"] = args.base_length
    if getattr(args, "levels", None) is not None:
        values["levels"] = args.levels
    if getattr(args, "grid", None):
        values["grid_m"], values["grid_n"] = _parse_pair(args.grid, "--grid")
    if getattr(args, "kernel", None):
        values["kernel_h"], values["kernel_w"] = _parse_pair(args.kernel, "--kernel")
    if getattr(args, "stride", None):
        values["stride_h"], values["stride_w"] = _parse_pair(args.stride, "--stride")
    if getattr(args, "beta", None) is not None:
        values["beta"] = args.beta
    if getattr(args, "norm_order", None) is not None:
        values["norm_order"] = args.norm_order
    if getattr(args, "no_ptg", False):
        values["ptg_enabled"] = False
    if getattr(args, "no_nsp", False):
        values["nsp_enabled"] = False
    return values


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------

_TIMEOUT = 600.0


async def _local_post(path: str, payload: dict) -> httpx.Response:
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://stgridpool.local", timeout=_TIMEOUT
    ) as client:
        return await client.post(path, json=payload)


def _post(path: str, payload: dict, server: str | None) -> dict:
    server = server or os.environ.get("STGP_SERVER") or None
    if server:
        with httpx.Client(base_url=server, timeout=_TIMEOUT) as client:
            response = client.post(path, json=payload)
    else:
        response = asyncio.run(_local_post(path, payload))
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise CliError(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _read_b64(path: str) -> str:
    try:
        with open(path, "rb") as f:
            return base64.b64encode(f.read()).decode("ascii")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_bytes_atomic(path, text.encode("utf-8"))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_pool(args: argparse.Namespace) -> int:
    payload = {
        "tensor_b64": _read_b64(args.input),
        "config": _config_payload(args),
    }
    result = _post("/v1/pool", payload, args.server)
    write_bytes_atomic(args.output, base64.b64decode(result["tensor_b64"]))
    print(json.dumps(result["budget"]))
    return 0


def _cmd_schedule(args: argparse.Namespace) -> int:
    payload = {"n_frames": args.n_frames, "config": _config_payload(args)}
    result = _post("/v1/schedule", payload, args.server)
    for level in result["levels"]:
        for seg in level["segments"]:
            samples = ",".join(str(i) for i in seg["sample_indices"])
            print(
                f"level={seg['level']} segment={seg['index']} "
                f"start={seg['start']} span_end={seg['span_end']} "
                f"update_index={seg['update_index']} samples={samples}"
            )
    return 0


def _cmd_budget(args: argparse.Namespace) -> int:
    payload = {
        "n_frames": args.n_frames,
        "height": args.height,
        "width": args.width,
        "config": _config_payload(args),
    }
    result = _post("/v1/budget", payload, args.server)
    print(json.dumps(result))
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    if args.fraction is not None and not args.out_mask:
        raise CliError("--fraction requires --out-mask PATH for the mask tensor")
    payload = {
        "tensor_b64": _read_b64(args.input),
        "mask_b64": _read_b64(args.mask) if args.mask else None,
        "norm_order": args.norm_order,
        "fraction": args.fraction,
        "bins": args.bins,
    }
    result = _post("/v1/analyze", payload, args.server)
    _write_text(args.out_csv, result["stats_csv"])
    if args.fraction is not None:
        write_bytes_atomic(args.out_mask, base64.b64decode(result["mask_b64"]))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    axes: dict = {}
    if args.beta:
        axes["beta"] = _parse_list(args.beta, float)
    if args.norm_order:
        axes["norm_order"] = _parse_list(args.norm_order, float)
    if args.levels:
        axes["levels"] = _parse_list(args.levels, int)
    if args.base_length:
        axes["base_length"] = _parse_list(args.base_length, int)
    if args.kernel:
        axes["kernel"] = [_parse_pair(k, "--kernel") for k in args.kernel.split(",")]
    base = {}
    if args.grid:
        base["grid_m"], base["grid_n"] = _parse_pair(args.grid, "--grid")
    if args.no_ptg:
        base["ptg_enabled"] = False
    if args.no_nsp:
        base["nsp_enabled"] = False
    payload = {"tensor_b64": _read_b64(args.input), "axes": axes, "config": base}
    result = _post("/v1/sweep", payload, args.server)
    _write_text(args.out, result["csv"])
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stgp",
        description="Spatiotemporal token compression over STGP tensor files.",
    )
    parser.add_argument("--version", action="version", version=f"stgp {__version__}")
    parser.add_argument(
        "--server",
        metavar="URL",
        default=None,
        help="remote service URL (default: in-process; env STGP_SERVER)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pool", help="run the compression pipeline on a tensor file")
    p.add_argument("input", help="input STGP tensor (rank 4)")
    p.add_argument("output", help="output STGP tensor path")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_pool)

    p = sub.add_parser("schedule", help="print the temporal segment plan")
    p.add_argument("n_frames", type=int)
    _add_config_flags(p, with_pool=False)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("budget", help="report token counts for given dims")
    p.add_argument("n_frames", type=int)
    p.add_argument("height", type=int)
    p.add_argument("width", type=int)
    _add_config_flags(p)
    p.set_defaults(func=_cmd_budget)

    p = sub.add_parser("analyze", help="norm distribution stats and top-norm mask")
    p.add_argument("input", help="input STGP tensor (rank 3 or 4)")
    p.add_argument("--mask", metavar="FILE", help="saliency mask tensor (H, W, 1)")
    p.add_argument("--norm-order", type=float, default=2.0)
    p.add_argument("--fraction", type=float, default=None,
                   help="emit a mask of the top-fraction norm positions")
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--out-csv", metavar="PATH", default=None,
                   help="stats CSV path (default: stdout)")
    p.add_argument("--out-mask", metavar="PATH", default=None,
                   help="top-fraction mask tensor path")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="run the pipeline across a parameter grid")
    p.add_argument("input", help="input STGP tensor (rank 4)")
    p.add_argument("--beta", help="comma list, e.g. 0.01,0.1,1")
    p.add_argument("--norm-order", help="comma list, e.g. 1,2,3")
    p.add_argument("--levels", help="comma list, e.g. 1,2,3")
    p.add_argument("--base-length", help="comma list, e.g. 4,8")
    p.add_argument("--kernel", help="comma list of HxW, e.g. 2x2,3x3")
    p.add_argument("--grid", metavar="MxN")
    p.add_argument("--no-ptg", action="store_true")
    p.add_argument("--no-nsp", action="store_true")
    p.add_argument("--out", metavar="PATH", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8077)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
