"""Command line interface.

Thin client over the HTTP service: every command builds a request model,
sends it to the app (in process by default, over the network with
--server), and writes the CSV/trace payloads it gets back. Keeping the
CLI on the service schemas means scripted and networked use cannot
drift apart.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx
from pydantic import ValidationError

from .experiments import PRESETS, SimConfig, SweepSpec, load_config

_SWEPT = ("sink_count", "comm_range", "node_count")


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="config file (YAML; unknown keys are errors)")
    p.add_argument("--schemes", metavar="LIST", help="comma-separated scheme subset")
    p.add_argument("--seed", type=int, metavar="U64", help="base RNG seed")
    p.add_argument("--reps", type=int, metavar="N", help="repetitions per sweep value")
    p.add_argument("--out", metavar="CSV", help="write CSV here instead of stdout")
    p.add_argument("--trace", metavar="PATH", help="write a JSONL diagnostic trace here")
    p.add_argument("--grid-res", type=float, metavar="M", help="estimation grid resolution in metres")
    p.add_argument("--server", metavar="URL", help="send the request to a running service")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsnloc",
        description="Range-based sensor network localization simulator.",
    )
    parser.add_argument(
        "--print-default-config",
        action="store_true",
        help="print a config file with every default and exit",
    )
    sub = parser.add_subparsers(dest="command")

    p_run = sub.add_parser("run", help="simulate one network and localize it")
    _add_shared_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    _add_shared_flags(p_sweep)
    p_sweep.add_argument("--preset", choices=sorted(PRESETS), help="named sweep")
    p_sweep.add_argument("--param", choices=_SWEPT, help="explicit swept parameter")
    p_sweep.add_argument("--values", metavar="LIST", help="comma-separated sweep values")
    p_sweep.add_argument("--workers", type=int, default=1, metavar="N", help="parallel workers")

    p_serve = sub.add_parser("serve", help="serve the HTTP API")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def _build_config(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.schemes is not None:
        overrides["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if args.grid_res is not None:
        overrides["grid_resolution"] = args.grid_res
    if not overrides:
        return cfg
    return SimConfig.model_validate({**cfg.model_dump(), **overrides})


def _post(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    async def go() -> httpx.Response:
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://wsnloc", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _get(server: str | None, path: str) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.get(path)

    async def go() -> httpx.Response:
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://wsnloc", timeout=None
        ) as client:
            return await client.get(path)

    return asyncio.run(go())


def _fail(resp: httpx.Response) -> int:
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    if isinstance(detail, list):
        parts = []
        for item in detail:
            loc = ".".join(str(x) for x in item.get("loc", ()) if x != "body")
            parts.append(f"{loc}: {item.get('msg', '')}" if loc else item.get("msg", ""))
        detail = "; ".join(parts)
    print(f"error: {detail}", file=sys.stderr)
    return 1


def _emit_outputs(args: argparse.Namespace, csv_text: str, trace: list | None) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            for entry in trace or []:
                fh.write(json.dumps(entry) + "\n")


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = _build_config(args)
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {"config": cfg.model_dump(), "include_trace": bool(args.trace)}
    resp = _post(args.server, "/run", payload)
    if resp.status_code != 200:
        return _fail(resp)
    body = resp.json()
    _emit_outputs(args, body["csv"], body.get("trace"))
    stats = body["stats"]
    print(
        f"simulated {stats.get('rounds', 0)} rounds, "
        f"{len(body['records'])} scheme records",
        file=sys.stderr,
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    if (args.preset is None) == (args.param is None):
        print("error: give exactly one of --preset or --param/--values", file=sys.stderr)
        return 2
    try:
        cfg = _build_config(args)
        payload: dict = {
            "config": cfg.model_dump(),
            "workers": args.workers,
            "include_trace": bool(args.trace),
        }
        if args.preset:
            payload["preset"] = args.preset
        else:
            if not args.values:
                print("error: --param requires --values", file=sys.stderr)
                return 2
            values = [float(v) for v in args.values.split(",") if v.strip()]
            payload["sweep"] = SweepSpec(
                swept_parameter=args.param, values=tuple(values)
            ).model_dump()
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    resp = _post(args.server, "/sweep", payload)
    if resp.status_code != 200:
        return _fail(resp)
    body = resp.json()
    _emit_outputs(args, body["csv"], body.get("trace"))
    print(f"{len(body['records'])} records", file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_default_config:
        resp = _get(getattr(args, "server", None), "/config/default")
        if resp.status_code != 200:
            return _fail(resp)
        sys.stdout.write(resp.json()["yaml"])
        return 0
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    if args.command == "serve":
        return _cmd_serve(args)
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
