"""CLI entry point for the superintegrability workbench."""

import csv
import sys
from pathlib import Path
from typing import Annotated, Optional

import typer
from rich import print as rprint
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from src.chain.hamiltonian import FAMILIES, FOUR_D_DEFAULT_K, ChainError, expected_arity
from src.chain.models import FamilyTag, PhasePoint
from src.utils.config import ConfigError, RunConfig, SuiteName, load_config, save_config
from src.utils.logging import setup_logging

app = typer.Typer(
    name="workbench",
    help="Superint Workbench - verify superintegrable chained Hamiltonians",
    no_args_is_help=True,
)
console = Console()

EXIT_FAILED = 1
EXIT_CONFIG = 2


def _load(config: Path) -> RunConfig:
    try:
        return load_config(config)
    except ConfigError as e:
        rprint(f"[red]Config error in {config}:[/red]")
        for issue in e.issues:
            rprint(f"  {issue}")
        raise typer.Exit(EXIT_CONFIG)


def _configure_logging(verbose: bool, json_logs: bool, log_file: Optional[Path]) -> None:
    setup_logging(
        log_level="DEBUG" if verbose else "INFO",
        log_file=log_file,
        json_format=json_logs,
    )


@app.command()
def verify(
    config: Annotated[Path, typer.Argument(help="Path to the run configuration (YAML)")],
    seed: Annotated[
        Optional[int],
        typer.Option("--seed", help="Override the configured seed"),
    ] = None,
    suite: Annotated[
        Optional[list[SuiteName]],
        typer.Option("--suite", "-s", help="Run only these suites (repeatable)"),
    ] = None,
    out: Annotated[
        Optional[Path],
        typer.Option("--out", "-o", help="Write the JSON report here"),
    ] = None,
    traj_dir: Annotated[
        Optional[Path],
        typer.Option("--traj-dir", help="Write conservation trajectories as CSV into this directory"),
    ] = None,
    tol_scale: Annotated[
        float,
        typer.Option("--tol-scale", help="Multiply every suite tolerance by this factor"),
    ] = 1.0,
    verbose: Annotated[
        bool,
        typer.Option("--verbose", "-v", help="Enable debug logging"),
    ] = False,
    json_logs: Annotated[
        bool,
        typer.Option("--json-logs", help="Emit JSON log lines"),
    ] = False,
    log_file: Annotated[
        Optional[Path],
        typer.Option("--log-file", help="Write logs to this file instead of stderr"),
    ] = None,
) -> None:
    """Run the configured verification suites; exit 0 iff all pass."""
    _configure_logging(verbose, json_logs, log_file)
    cfg = _load(config)

    updates: dict[str, object] = {}
    if seed is not None:
        if seed < 0:
            rprint("[red]Error:[/red] --seed must be non-negative")
            raise typer.Exit(EXIT_CONFIG)
        updates["seed"] = seed
    if suite:
        updates["suites"] = list(dict.fromkeys(suite))
    if tol_scale != 1.0:
        try:
            updates["tolerances"] = cfg.tolerances.scaled(tol_scale)
        except ValueError as e:
            rprint(f"[red]Error:[/red] {e}")
            raise typer.Exit(EXIT_CONFIG)
    cfg = cfg.model_copy(update=updates)
    report_path = out or cfg.output.report
    trajectory_dir = traj_dir or cfg.output.traj_dir

    from src.workbench import emit_outputs, run_suite

    try:
        report = run_suite(cfg)
    except ChainError as e:
        rprint(f"[red]Error building system:[/red] {e}")
        raise typer.Exit(EXIT_CONFIG)

    table = Table(title=f"{cfg.system.family.value} (seed {cfg.seed})")
    table.add_column("Suite", style="cyan")
    table.add_column("Result")
    table.add_column("Worst residual", justify="right")
    table.add_column("Time (s)", justify="right")
    for name, result in report.suites.items():
        if result.error:
            verdict = "[red]error[/red]"
        elif result.skipped:
            verdict = "[dim]skipped[/dim]"
        else:
            verdict = "[green]pass[/green]" if result.passed else "[red]FAIL[/red]"
        worst = f"{max(result.residuals):.2e}" if result.residuals else "-"
        table.add_row(name, verdict, worst, f"{result.wall_time:.1f}")
    console.print(table)

    for name, result in report.suites.items():
        if result.error:
            rprint(f"[red]{name}:[/red] {result.error}")
        for detail in result.details:
            if not detail.passed:
                rprint(f"[yellow]{name}:[/yellow] {detail.name} = {detail.value} (threshold {detail.threshold})")

    written = emit_outputs(report, report.trajectories, report_path, trajectory_dir)
    for path in written:
        rprint(f"[green]✓[/green] Wrote {path}")

    if not report.passed:
        raise typer.Exit(EXIT_FAILED)


@app.command()
def families() -> None:
    """List the built-in chain families with their parameter arities."""
    table = Table(title="Built-in families")
    table.add_column("Family", style="cyan")
    table.add_column("n", justify="right")
    table.add_column("len(beta)", justify="right")
    table.add_column("len(k)", justify="right")
    table.add_column("Radial term")
    table.add_column("Default k")

    for family, (dim, radial) in FAMILIES.items():
        if dim is None:
            n_text, beta_text, k_text = "len(k)+1", "n (0 if n=1)", "n-1"
        else:
            n_beta, n_k = expected_arity(family)
            n_text, beta_text, k_text = str(dim), str(n_beta), str(n_k)
        default_k = ", ".join(FOUR_D_DEFAULT_K) if family == FamilyTag.FOUR_D_EXAMPLE else "-"
        table.add_row(family.value, n_text, beta_text, k_text, radial.value, default_k)
    table.add_row(FamilyTag.CUSTOM.value, "len(levels)", "-", "-", "declared", "-")
    console.print(table)


def _parse_floats(text: str) -> list[float]:
    parts = text.replace(",", " ").split()
    try:
        return [float(part) for part in parts]
    except ValueError as e:
        raise typer.BadParameter(f"not a list of numbers: {text!r}") from e


@app.command()
def trajectory(
    config: Annotated[Path, typer.Argument(help="Path to the run configuration (YAML)")],
    x0: Annotated[
        str,
        typer.Option("--x0", help="Initial state q1..qn p1..pn, comma or space separated"),
    ],
    tmax: Annotated[
        float,
        typer.Option("--tmax", help="Integration time"),
    ],
    out: Annotated[
        Optional[Path],
        typer.Option("--out", "-o", help="CSV output path (stdout if omitted)"),
    ] = None,
    verbose: Annotated[
        bool,
        typer.Option("--verbose", "-v", help="Enable debug logging"),
    ] = False,
) -> None:
    """Integrate one trajectory of the configured system and export it as CSV."""
    _configure_logging(verbose, json_logs=False, log_file=None)
    cfg = _load(config)

    from src.dynamics.integrator import integrate
    from src.workbench import trajectory_header, trajectory_rows, write_trajectory

    try:
        system = cfg.system.build()
        values = _parse_floats(x0)
        if len(values) != 2 * system.n:
            raise typer.BadParameter(f"--x0 needs {2 * system.n} numbers, got {len(values)}")
        traj = integrate(
            system,
            PhasePoint.from_vector(values),
            tmax,
            rel_tol=cfg.trajectory.rel_tol,
            abs_tol=cfg.trajectory.abs_tol,
        )
    except (ChainError, ValueError) as e:
        rprint(f"[red]Error:[/red] {e}")
        raise typer.Exit(EXIT_FAILED)

    if out is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(trajectory_header(system.n))
        writer.writerows(trajectory_rows(traj))
        return

    write_trajectory(traj, out)
    rprint(Panel(
        f"[green]✓ Trajectory written to {out}[/green]\n\n"
        f"  Samples: {len(traj)}\n"
        f"  Steps: {traj.stats.steps} ({traj.stats.rejects} rejected)\n"
        f"  Step range: {traj.stats.min_step:.3e} .. {traj.stats.max_step:.3e}",
        title="Trajectory",
    ))


@app.command("show-config")
def show_config(
    config: Annotated[Path, typer.Argument(help="Path to the run configuration (YAML)")],
    out: Annotated[
        Optional[Path],
        typer.Option("--out", "-o", help="Write the defaulted config here instead of printing it"),
    ] = None,
) -> None:
    """Validate a config and echo it with every default filled in."""
    cfg = _load(config)
    if out is not None:
        save_config(cfg, out)
        rprint(f"[green]✓[/green] Wrote {out}")
        return
    console.print_json(cfg.model_dump_json())


if __name__ == "__main__":
    app()
