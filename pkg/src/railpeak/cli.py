"""Command-line client for the simulation service.

The CLI is a thin client: it loads the scenario file locally, sends the
work to the HTTP service (an in-process instance by default, or a remote
one via --server), and writes the returned traces and report to disk.

    railpeak --mode both --out runs/base
    railpeak --scenario corridor.ini --mode pres --out runs/pres --per-train
    railpeak selftest --instances 1000 --max-vars 12 --seed 42
    railpeak serve --port 8000
"""

from __future__ import annotations

import os
import sys
from typing import Optional

import click
import httpx

from .config import ConfigError, load_scenario
from .engine import Scenario
from .metrics import render_policy_stats, render_report, report_csv
from .service.models import ReportModel, ScenarioModel, TraceModel
from .trace_io import atomic_write, render_tick_csv, render_train_csv


class _InProcessClient:
    """Synchronous facade over the service mounted in-process via ASGI."""

    def __init__(self):
        from .service.app import app

        self._transport = httpx.ASGITransport(app=app)

    def post(self, path: str, json: dict) -> httpx.Response:
        import asyncio

        async def _go():
            async with httpx.AsyncClient(
                transport=self._transport, base_url="http://railpeak.internal"
            ) as client:
                return await client.post(path, json=json, timeout=300.0)

        return asyncio.run(_go())

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def _client(server: Optional[str]):
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    return _InProcessClient()


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _load_scenario(path: Optional[str], seed: Optional[int]) -> Scenario:
    try:
        scenario = load_scenario(path) if path else Scenario()
    except ConfigError as err:
        raise click.ClickException(str(err))
    if seed is not None:
        from dataclasses import replace

        scenario = replace(scenario, rng_seed=seed)
    return scenario


def _write(out_dir: str, name: str, content: str) -> str:
    path = os.path.join(out_dir, name)
    atomic_write(path, content)
    return path


@click.group(invoke_without_command=True)
@click.option("--scenario", "scenario_path", type=click.Path(), default=None,
              help="Scenario configuration file (defaults to the built-in corridor).")
@click.option("--mode", type=click.Choice(["fixed", "pres", "both"]), default="both",
              show_default=True, help="Which dispatch policy to run.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="out",
              show_default=True, help="Output directory for CSVs and the report.")
@click.option("--report-threshold", "report_threshold", type=float, default=None,
              help="Reporting threshold in kW for peak counting (defaults to the optimizer threshold).")
@click.option("--per-train", is_flag=True, help="Include per-train power columns in trace CSVs.")
@click.option("--seed", type=int, default=None, help="Override the scenario's random seed.")
@click.option("--server", default=None, help="Base URL of a running service (default: in-process).")
@click.pass_context
def main(ctx, scenario_path, mode, out_dir, report_threshold, per_train, seed, server):
    """Run corridor simulations and write traces plus the policy comparison."""
    if ctx.invoked_subcommand is not None:
        ctx.ensure_object(dict)
        ctx.obj["server"] = server
        return
    scenario = _load_scenario(scenario_path, seed)
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".railpeak-probe")
        with open(probe, "w"):
            pass
        os.unlink(probe)
    except OSError as err:
        raise click.ClickException(f"output directory not writable: {err}")

    with _client(server) as client:
        if mode == "both":
            payload = {
                "scenario": ScenarioModel.from_core(scenario).model_dump(),
                "reporting_threshold_kw": report_threshold,
            }
            data = _post(client, "/compare", payload)
            fixed = TraceModel.model_validate(data["fixed"]).to_core()
            pres = TraceModel.model_validate(data["pres"]).to_core()
            report = ReportModel.model_validate(data["report"]).to_core()
            _write(out_dir, "trace_fixed.csv", render_tick_csv(fixed, per_train))
            _write(out_dir, "trace_pres.csv", render_tick_csv(pres, per_train))
            _write(out_dir, "trains_fixed.csv", render_train_csv(fixed))
            _write(out_dir, "trains_pres.csv", render_train_csv(pres))
            _write(out_dir, "report.txt", render_report(report))
            _write(out_dir, "report.csv", report_csv(report))
            click.echo(f"wrote 6 files to {out_dir}")
            click.echo(
                f"exceedances: fixed {report.fixed.exceedance_count} -> "
                f"pres {report.pres.exceedance_count} at {report.reporting_threshold_kw} kW"
            )
        else:
            from dataclasses import replace

            from .engine import Policy
            from .metrics import policy_stats

            scenario = replace(scenario, policy=Policy(mode))
            payload = {"scenario": ScenarioModel.from_core(scenario).model_dump()}
            data = _post(client, "/simulate", payload)
            trace = TraceModel.model_validate(data["trace"]).to_core()
            _write(out_dir, f"trace_{mode}.csv", render_tick_csv(trace, per_train))
            _write(out_dir, f"trains_{mode}.csv", render_train_csv(trace))
            threshold = report_threshold if report_threshold is not None else trace.p_threshold_kw
            stats = policy_stats(trace, threshold)
            _write(out_dir, f"stats_{mode}.txt", render_policy_stats(stats) + "\n")
            click.echo(f"wrote 3 files to {out_dir}")


@main.command()
@click.option("--instances", type=int, default=1000, show_default=True,
              help="Number of random instances to check.")
@click.option("--max-vars", type=int, default=12, show_default=True,
              help="Largest instance size (refused above 20).")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--server", default=None, help="Base URL of a running service (default: in-process).")
@click.pass_context
def selftest(ctx, instances, max_vars, seed, server):
    """Differential solver check: branch-and-bound vs exhaustive enumeration."""
    server = server or (ctx.obj or {}).get("server")
    with _client(server) as client:
        data = _post(
            client,
            "/solver/selftest",
            {"num_instances": instances, "max_vars": max_vars, "seed": seed},
        )
    if data["passed"]:
        click.echo(
            f"selftest passed: {data['instances']} instances, "
            f"max solve time {data['max_solve_ms']:.2f} ms"
        )
        return
    click.echo(f"selftest FAILED: {data['mismatches']} mismatches", err=True)
    if data.get("first_failure"):
        click.echo(data["first_failure"], err=True)
    sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
