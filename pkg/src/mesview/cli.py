"""Batch command line interface.

Subcommands: validate, report, template, simulate, serve.  All file
arguments accept ``-`` for the standard streams.
"""

from __future__ import annotations

import sys

import click

from .config import load_config
from .events import parse_event_log, validate_log
from .metrics import action_breakdown, compute_unit_metrics, summary_table
from .synthgen import GeneratorConfig, generate_log, preset_paperlike
from .timeseries import Comparison, Quantity, template_day


def _read_log(path: str, n_steps: int = 7):
    if path == "-":
        source = sys.stdin.read()
    else:
        source = path
    return parse_event_log(source, n_steps=n_steps)


def _write_out(text: str, out: str | None) -> None:
    if out is None or out == "-":
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _apply_comparison(log, comparison: str):
    comp = Comparison.parse(comparison)
    if comp.weekday is None:
        return log
    from .events import filter_log

    return filter_log(log, weekdays={comp.weekday})


@click.group()
def main():
    """Process-log analytics: metrics, template days, KPI gauges."""


@main.command()
@click.argument("path")
def validate(path):
    """Parse a log and report malformed rows and anomalies."""
    try:
        log, report = _read_log(path)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    consistency = validate_log(log)
    click.echo(f"events accepted : {len(log)}")
    click.echo(f"rows rejected   : {report.n_rejected}")
    for err in report.record_errors:
        click.echo(f"  line {err.line}: {err.reason}")
    click.echo(f"anomalies       : {len(consistency.anomalies)}")
    for anomaly in consistency.anomalies:
        click.echo(
            f"  [{anomaly.kind}] unit {anomaly.unit_id} step {anomaly.step}: "
            f"{anomaly.detail}"
        )
    sys.exit(0 if report.n_rejected == 0 else 1)


@main.command()
@click.argument("path")
@click.option("--step", type=int, default=None, help="Restrict to one process step.")
@click.option(
    "--quantity",
    type=click.Choice(["duration", "idle"]),
    default="duration",
    show_default=True,
)
@click.option("--comparison", default="all", show_default=True,
              help="'all' or a weekday name.")
@click.option("--raw", is_flag=True, help="Absolute seconds instead of rescaled values.")
@click.option("--out", default=None, help="Output file ('-' for stdout).")
def report(path, step, quantity, comparison, raw, out):
    """Per-step summary table plus an action breakdown."""
    try:
        log, _ = _read_log(path)
        log = _apply_comparison(log, comparison)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    if len(log) == 0:
        raise click.ClickException("no events")
    if step is not None:
        from .events import filter_log

        log = filter_log(log, steps={step})
        if len(log) == 0:
            raise click.ClickException(f"no events at step {step}")
    metrics = compute_unit_metrics(log)
    rows = summary_table(metrics, quantity, rescaled=not raw)
    lines = ["step,mean,sd,median,p2.5,p97.5"]
    for s, stats in rows:
        lines.append(
            f"{s},{stats.mean:.4f},{stats.sd:.4f},{stats.median:.4f},"
            f"{stats.p2_5:.4f},{stats.p97_5:.4f}"
        )
    lines.append("")
    lines.append("step,action,count,proportion")
    for row in action_breakdown(log).rows():
        lines.append(
            f"{row['step']},{row['action']},{row['count']},{row['proportion']:.4f}"
        )
    _write_out("\n".join(lines) + "\n", out)


@main.command()
@click.argument("path")
@click.option("--step", type=int, required=True)
@click.option(
    "--quantity",
    type=click.Choice([q.value for q in Quantity]),
    required=True,
)
@click.option("--comparison", default="all", show_default=True)
@click.option("--out", default=None, help="Output file ('-' for stdout).")
def template(path, step, quantity, comparison, out):
    """Export a template day as delimited text."""
    try:
        log, _ = _read_log(path)
        tpl = template_day(
            log, step, Quantity.parse(quantity), Comparison.parse(comparison)
        )
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    _write_out(tpl.to_csv_text(), out)


@main.command()
@click.option("--preset", type=click.Choice(["paperlike"]), default=None)
@click.option("--config", "config_path", default=None, help="Generator config file.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", default="-", show_default=True)
def simulate(preset, config_path, seed, out):
    """Generate a synthetic log."""
    if preset is None and config_path is None:
        raise click.ClickException("need --preset or --config")
    try:
        if config_path is not None:
            cfg = GeneratorConfig.from_file(config_path)
        else:
            cfg = preset_paperlike()
        if seed is not None:
            from dataclasses import replace

            cfg = replace(cfg, seed=seed)
        log = generate_log(cfg)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    _write_out(log.to_csv_text(), out)


@main.command()
@click.option("--config", "config_path", default=None, help="Service config file.")
def serve(config_path):
    """Run the HTTP API server."""
    from .server import run

    try:
        cfg = load_config(config_path)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    run(cfg)


if __name__ == "__main__":
    main()
