"""Command-line client for the link-modeling service.

The CLI never computes anything itself: requests go to the FastAPI app,
in-process by default or to a remote instance via --server. Exit codes:
0 success, 1 configuration error, 2 numerical or operational failure.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import click
import httpx

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _post(path: str, payload: dict, server: Optional[str]) -> httpx.Response:
    async def go() -> httpx.Response:
        if server:
            async with httpx.AsyncClient(base_url=server, timeout=None) as client:
                return await client.post(path, json=payload)
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://thzlink.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _fail(resp: httpx.Response) -> int:
    try:
        body = resp.json()
    except json.JSONDecodeError:
        body = {"detail": resp.text}
    kind = body.get("kind", "config" if resp.status_code == 422 else "numerical")
    detail = body.get("detail", body)
    click.echo(f"error ({kind}): {detail}", err=True)
    return EXIT_CONFIG if kind == "config" else EXIT_NUMERICAL


@click.group()
def main():
    """Link experiments against the thzlink service."""


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), default=Path("."),
              show_default=True, help="Directory for CSV outputs and manifest.json.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker threads for simulation batches.")
@click.option("--server", default=None, help="Remote service URL; default runs in process.")
def run(config_path: Path, out_dir: Path, seed: Optional[int], threads: int, server: Optional[str]):
    """Run the experiment described by CONFIG_PATH and write its outputs."""
    payload = {
        "config_text": config_path.read_text(),
        "name": str(config_path),
        "workers": threads,
    }
    if seed is not None:
        payload["seed"] = seed
    try:
        resp = _post("/v1/experiments/run", payload, server)
    except httpx.HTTPError as exc:
        click.echo(f"error (numerical): service unreachable: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    if resp.status_code != 200:
        sys.exit(_fail(resp))
    body = resp.json()
    out_dir.mkdir(parents=True, exist_ok=True)
    for output in body["outputs"]:
        path = out_dir / output["filename"]
        path.write_text(output["content"])
        click.echo(f"wrote {path}")
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(body["manifest"], indent=2, sort_keys=True) + "\n")
    click.echo(f"wrote {manifest_path}")
    sys.exit(EXIT_OK)


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--server", default=None, help="Remote service URL; default runs in process.")
def validate(config_path: Path, server: Optional[str]):
    """Validate CONFIG_PATH without running anything."""
    payload = {"config_text": config_path.read_text(), "name": str(config_path)}
    try:
        resp = _post("/v1/experiments/validate", payload, server)
    except httpx.HTTPError as exc:
        click.echo(f"error (numerical): service unreachable: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    if resp.status_code != 200:
        sys.exit(_fail(resp))
    body = resp.json()
    if not body["valid"]:
        for line in body["errors"]:
            click.echo(line, err=True)
        sys.exit(EXIT_CONFIG)
    click.echo("configuration is valid")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int):
    """Serve the API over HTTP."""
    import uvicorn

    uvicorn.run("thzlink.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
