"""Command-line experiment runner, implemented as a thin client of the HTTP
service. By default the service runs in-process; pass --server to target a
remote instance, or --serve to start one."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

from .config import PRESETS, ConfigError


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nodalsim",
        description="Run paired baseline/protocol attack simulations and "
                    "write baseline.csv, protocol.csv, and report.txt.")
    p.add_argument("--topology",
                   choices=["figure1", "figure1-redundant", "generated"],
                   help="topology family (default from preset/config)")
    p.add_argument("--ticks", type=int, help="simulation ticks per trial")
    p.add_argument("--messages", type=int, help="messages per trial")
    p.add_argument("--critical-fraction", type=float,
                   help="fraction of messages marked critical")
    p.add_argument("--budget", type=int,
                   help="duplication budget for non-critical messages")
    p.add_argument("--rate-tap", type=float, help="per-edge per-tick tap rate")
    p.add_argument("--rate-corrupt", type=float,
                   help="per-edge per-tick corruption rate")
    p.add_argument("--rate-sever", type=float,
                   help="per-edge per-tick sever rate")
    p.add_argument("--weighted-attacks", action="store_true", default=None,
                   help="weight attack placement by edge criticality")
    p.add_argument("--max-retries", type=int, help="retransmission cap")
    p.add_argument("--trials", type=int, help="paired trial count (default 100)")
    p.add_argument("--seed", type=int,
                   help="experiment seed (SIM_SEED env overrides)")
    p.add_argument("--out-dir", default="out", help="output directory")
    p.add_argument("--preset", default="paper-like", choices=sorted(PRESETS),
                   help="named base configuration")
    p.add_argument("--config", help="JSON file with SimConfig field overrides")
    p.add_argument("--server", help="URL of a running nodalsim service; "
                                    "default runs the service in-process")
    p.add_argument("--serve", action="store_true",
                   help="start the HTTP service instead of running an experiment")
    p.add_argument("--host", default="127.0.0.1", help="bind host for --serve")
    p.add_argument("--port", type=int, default=8000, help="bind port for --serve")
    return p


_FLAG_TO_FIELD = {
    "topology": "topology",
    "ticks": "ticks",
    "messages": "messages_per_trial",
    "critical_fraction": "critical_fraction",
    "budget": "duplication_budget",
    "rate_tap": "rate_tap",
    "rate_corrupt": "rate_corrupt",
    "rate_sever": "rate_sever",
    "weighted_attacks": "criticality_weighted_attacks",
    "max_retries": "max_retries",
    "trials": "trials",
    "seed": "seed",
}


def collect_overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.config:
        try:
            overrides.update(json.loads(Path(args.config).read_text()))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config file {args.config}: {exc}")
    for flag, field in _FLAG_TO_FIELD.items():
        value = getattr(args, flag)
        if value is not None:
            overrides[field] = value
    env_seed = os.environ.get("SIM_SEED")
    if env_seed is not None:
        try:
            overrides["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"SIM_SEED must be an integer, got {env_seed!r}")
    return overrides


def _post_experiment(server: str | None, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post("/experiment", json=payload)

    import asyncio

    from .service import app

    async def _call() -> httpx.Response:
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport,
                                     base_url="http://nodalsim.local",
                                     timeout=600.0) as client:
            return await client.post("/experiment", json=payload)

    return asyncio.run(_call())


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.serve:
        import uvicorn

        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        overrides = collect_overrides(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    payload = {"preset": args.preset, "config": overrides}
    resp = _post_experiment(args.server, payload)
    if resp.status_code != 200:
        detail = resp.json().get("detail", resp.text)
        print(f"error: {detail}", file=sys.stderr)
        return 2
    body = resp.json()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "baseline.csv").write_text(body["baseline_csv"])
    (out / "protocol.csv").write_text(body["protocol_csv"])
    (out / "report.txt").write_text(body["report"])

    print("effective config:")
    print(json.dumps(body["config"], indent=2, sort_keys=True))
    print()
    print(body["report"], end="")
    print(f"\noutputs written to {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
