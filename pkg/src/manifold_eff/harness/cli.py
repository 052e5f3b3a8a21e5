"""manifold-eff command line interface."""
from __future__ import annotations

import json
import os
import sys

import click

from .spec import PRESETS, load_spec, preset_spec


@click.group()
def main():
    """Monte Carlo harness for manifold efficiency bounds."""


@main.command("run")
@click.argument("spec_source")
@click.option("--seed", type=int, default=None, help="override the spec seed")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="out",
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv", "both"]),
              default="both", show_default=True)
@click.option("--plots/--no-plots", default=True, show_default=True,
              help="render matplotlib figures next to the reports")
def run_cmd(spec_source, seed, workers, out_dir, fmt, plots):
    """Run one experiment from a JSON spec file or a preset name."""
    from .runner import run_experiment

    if os.path.exists(spec_source):
        spec = load_spec(spec_source)
    else:
        spec = preset_spec(spec_source)
    if seed is not None:
        spec["seed"] = seed
    report = run_experiment(spec, workers=workers)
    paths = report.write(out_dir, fmt=fmt)
    if plots:
        from .plots import render_figures

        for p in render_figures(report, out_dir):
            click.echo(f"figure: {p}")
    for key, path in paths.items():
        click.echo(f"{key}: {path}")
    for flag in report.flags:
        status = "pass" if flag.passed else "FAIL"
        click.echo(
            f"[{status}] {flag.name}: measured={flag.measured:.6g} "
            f"({flag.tolerance_key}={flag.tolerance:g})"
        )
    click.echo(f"runtime: {report.runtime_seconds:.2f}s")
    sys.exit(0 if report.all_passed else 1)


@main.command("list-presets")
def list_presets_cmd():
    """List shipped experiment presets."""
    for name in sorted(PRESETS):
        kind = PRESETS[name]["kind"]
        click.echo(f"{name:24s} kind={kind}")


@main.group("geometry")
def geometry_group():
    """Geometry kernel diagnostics."""


@geometry_group.command("check")
@click.option("--manifold", "name", required=True)
@click.option("--cases", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def geometry_check_cmd(name, cases, seed):
    """Run the geometry invariant suite and print a pass/fail table."""
    from ..geometry.checks import format_check_table, run_geometry_checks

    rows = run_geometry_checks(name, cases=cases, seed=seed)
    click.echo(format_check_table(rows))
    sys.exit(0 if all(r.passed for r in rows) else 1)


if __name__ == "__main__":
    main()
