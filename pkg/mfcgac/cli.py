"""Command-line interface.

Subcommands:

- ``oracle``: print the closed-form equilibrium as JSON
- ``train``: run one training job into a run directory
- ``eval``: score a run against the closed form and write ``eval.csv``
- ``sweep``: train and evaluate several seeds, then aggregate

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
divergence, 3 file I/O error.

Example:
    $ mfcgac oracle --sigma 0.5
    $ mfcgac train --algo batch --config cfg.json --seed 1 --out runs/b1
    $ mfcgac eval --run runs/b1 --grid -1:1.5:0.01
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, cast

import click
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeRemainingColumn
from rich.table import Table

from mfcgac._logging import configure_logging
from mfcgac.evaluation import aggregate_runs, evaluate_run
from mfcgac.exceptions import (
    ConfigError,
    DimensionError,
    MfcgError,
    NonFiniteError,
    OracleUndefinedError,
    RunIOError,
)
from mfcgac.lq import analytical_solution
from mfcgac.models import GridSpec, LqParams, MetricsRecord, MetricsReport, TrainConfig
from mfcgac.runs import RunDirectory, load_lq_params, load_train_config
from mfcgac.training import train, train_policy_evaluation

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="mfcgac",
    help="Actor-critic solvers for mean field control games.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)
err_console = Console(stderr=True)

# Newer typer releases bundle their own click, whose exception classes are not
# the external package's; typer's exports always come from the copy it runs on.
_USAGE_ERRORS = cast(
    "tuple[type[click.UsageError], ...]",
    (click.UsageError, *typer.BadParameter.__bases__),
)
_ABORTS = cast("tuple[type[click.Abort], ...]", (click.Abort, typer.Abort))


class AlgorithmChoice(str, Enum):
    baseline = "baseline"
    batch = "batch"
    minibatch = "minibatch"
    drl = "drl"


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate package errors into the CLI's exit codes."""
    try:
        yield
    except (ConfigError, DimensionError, OracleUndefinedError) as e:
        err_console.print(f"[red]error:[/red] {e.message}")
        for err in getattr(e, "errors", []):
            err_console.print(f"  {'.'.join(str(p) for p in err.get('loc', ()))}: {err.get('msg')}")
        raise typer.Exit(1) from e
    except NonFiniteError as e:
        err_console.print(f"[red]diverged:[/red] {e.message}")
        raise typer.Exit(2) from e
    except RunIOError as e:
        err_console.print(f"[red]I/O error:[/red] {e.message}")
        raise typer.Exit(3) from e
    except OSError as e:
        err_console.print(f"[red]I/O error:[/red] {e}")
        raise typer.Exit(3) from e
    except MfcgError as e:
        err_console.print(f"[red]error:[/red] {e.message}")
        raise typer.Exit(1) from e


def _revalidate(model: Any, updates: dict[str, Any]) -> Any:
    if not updates:
        return model
    try:
        return type(model).model_validate({**model.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigError(
            f"invalid {type(model).__name__} override", errors=[dict(err) for err in e.errors()]
        ) from e


@contextmanager
def _progress(total: int, label: str) -> Iterator[Callable[[int, MetricsRecord], None]]:
    with Progress(
        TextColumn("[bold]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeRemainingColumn(),
        console=err_console,
        transient=True,
    ) as progress:
        task = progress.add_task(label, total=total)

        def advance(step: int, record: MetricsRecord) -> None:
            progress.update(task, completed=step + 1)

        yield advance


@app.callback()
def root(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level."),
) -> None:
    configure_logging(logging.DEBUG if verbose else logging.INFO, err_console)


@app.command()
def oracle(
    config: Path | None = typer.Option(None, "--config", help="TrainConfig or LqParams JSON."),
    sigma: float | None = typer.Option(None, "--sigma", help="Override the noise level."),
    beta: float | None = typer.Option(None, "--beta", help="Override the discount rate."),
) -> None:
    """Print the closed-form equilibrium as JSON."""
    with _exit_codes():
        params = load_lq_params(config) if config is not None else LqParams()
        overrides = {k: v for k, v in {"sigma": sigma, "beta": beta}.items() if v is not None}
        params = _revalidate(params, overrides)
        typer.echo(analytical_solution(params).model_dump_json(indent=2))


@app.command("train")
def train_command(
    out: Path = typer.Option(..., "--out", help="Run directory to create."),
    algo: AlgorithmChoice | None = typer.Option(None, "--algo", help="Training algorithm."),
    config: Path | None = typer.Option(None, "--config", help="TrainConfig JSON."),
    seed: int | None = typer.Option(None, "--seed", help="Override the seed."),
    steps: int | None = typer.Option(None, "--steps", help="Override the number of steps."),
    policy_eval: bool = typer.Option(
        False, "--policy-eval", help="Freeze the actor at the closed-form control; learn the critic."
    ),
) -> None:
    """Train one run and write metrics, checkpoints and particles."""
    with _exit_codes():
        cfg = load_train_config(config) if config is not None else TrainConfig()
        updates: dict[str, Any] = {}
        if algo is not None:
            updates["algorithm"] = algo.value
        if seed is not None:
            updates["seed"] = seed
        if steps is not None:
            updates["steps"] = steps
        cfg = _revalidate(cfg, updates)
        run = RunDirectory.create(out, cfg)
        with _progress(cfg.steps, cfg.algorithm) as advance:
            if policy_eval:
                artifacts = train_policy_evaluation(cfg, run_dir=run, on_step=advance)
            else:
                artifacts = train(cfg, run_dir=run, on_step=advance)
        err_console.print(
            f"[green]done[/green] {len(artifacts.metrics)} steps -> {run.path}"
        )


@app.command("eval")
def eval_command(
    run: Path = typer.Option(..., "--run", help="Run directory to evaluate."),
    grid: str | None = typer.Option(None, "--grid", help="Evaluation grid lo:hi:step."),
    out: Path | None = typer.Option(None, "--out", help="CSV path (default: <run>/eval.csv)."),
) -> None:
    """Compare a trained run with the closed-form equilibrium."""
    with _exit_codes():
        spec = _parse_grid(grid) if grid is not None else None
        run_dir = RunDirectory.open(run)
        report, rows = evaluate_run(run_dir, spec)
        run_dir.write_eval(rows, out)
        typer.echo(report.model_dump_json(indent=2))


def _parse_grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValidationError as e:
        raise ConfigError(f"invalid grid {text!r}", errors=[dict(err) for err in e.errors()]) from e
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _train_and_evaluate(path: str) -> MetricsReport:
    run = RunDirectory.open(Path(path))
    train(run.read_config(), run_dir=run)
    report, rows = evaluate_run(run)
    run.write_eval(rows)
    return report


@app.command()
def sweep(
    out: Path = typer.Option(..., "--out", help="Directory for seed_<s>/ runs and sweep.json."),
    seeds: int = typer.Option(5, "--seeds", min=1, help="Number of seeds (0..S-1)."),
    algo: AlgorithmChoice | None = typer.Option(None, "--algo", help="Training algorithm."),
    config: Path | None = typer.Option(None, "--config", help="TrainConfig JSON."),
    steps: int | None = typer.Option(None, "--steps", help="Override the number of steps."),
    workers: int = typer.Option(1, "--workers", min=1, help="Seeds trained in parallel processes."),
) -> None:
    """Train and evaluate several seeds and aggregate their errors."""
    with _exit_codes():
        base = load_train_config(config) if config is not None else TrainConfig()
        updates: dict[str, Any] = {}
        if algo is not None:
            updates["algorithm"] = algo.value
        if steps is not None:
            updates["steps"] = steps
        base = _revalidate(base, updates)

        paths = []
        for s in range(seeds):
            run = RunDirectory.create(out / f"seed_{s}", _revalidate(base, {"seed": s}))
            paths.append(str(run.path))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                reports = list(pool.map(_train_and_evaluate, paths))
        else:
            reports = []
            for i, p in enumerate(paths):
                logger.info("Seed %d/%d", i + 1, seeds)
                reports.append(_train_and_evaluate(p))

        aggregate = aggregate_runs(reports)
        sweep_path = out / "sweep.json"
        try:
            sweep_path.write_text(aggregate.model_dump_json(indent=2))
        except OSError as e:
            raise RunIOError(f"cannot write {sweep_path}: {e}", path=sweep_path) from e

        table = Table(title=f"{base.algorithm}: {aggregate.n_runs} seeds")
        table.add_column("metric")
        table.add_column("mean", justify="right")
        table.add_column("std", justify="right")
        for name, value in aggregate.mean.items():
            table.add_row(name, f"{value:.4g}", f"{aggregate.std[name]:.4g}")
        err_console.print(table)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    try:
        result = app(
            args=list(argv) if argv is not None else None,
            prog_name="mfcgac",
            standalone_mode=False,
        )
    except _USAGE_ERRORS as e:
        e.show()
        return 1
    except _ABORTS:
        err_console.print("aborted")
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    raise SystemExit(main())
