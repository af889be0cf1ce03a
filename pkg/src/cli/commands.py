from typing import Optional

import click
from pydantic import ValidationError

from cli.config_parser import parse_config_file
from models.schema import OutputSpec, RunConfig, RunResult, Task
from utils.errors import ConfigError, OptomechError, ParameterError
from utils.logger import logger

EXIT_CONFIG_ERROR = 1
EXIT_NUMERICAL_ERROR = 2


def load_config(task: Task, config_path: str, out: Optional[str], svg: bool) -> RunConfig:
    """Parse the config file and apply command-line overrides for the output."""
    config = parse_config_file(config_path, task)
    if out is None and not svg:
        return config
    output = OutputSpec(
        directory=out or config.output.directory,
        prefix=config.output.prefix,
        emit_svg=svg or config.output.emit_svg,
    )
    return config.model_copy(update={"output": output})


def report(result: RunResult, config: RunConfig) -> None:
    if result.task is Task.THRESHOLD:
        omega_m = config.params.omega_m
        for label, threshold in (
            ("delta_crit_over_omega_m", result.threshold),
            ("delta_linear_over_omega_m", result.linear_threshold),
        ):
            if threshold.value is None:
                click.echo(f"{label}: {threshold.describe()}")
            else:
                click.echo(f"{label}: {threshold.value / omega_m:.6g}")
        return

    for path in result.files:
        click.echo(f"Wrote {path}")
    if not result.validated:
        click.echo("Warning: results are outside the validated regime", err=True)


def execute(task: Task, config_path: str, out: Optional[str], svg: bool) -> None:
    """Run one task and map failures onto exit codes."""
    from main import run

    try:
        config = load_config(task, config_path, out, svg)
        result = run(config)
    except (ConfigError, ParameterError, ValidationError) as e:
        logger.error(f"Configuration error: {e}")
        click.echo(f"Configuration error: {e}", err=True)
        raise SystemExit(EXIT_CONFIG_ERROR)
    except OptomechError as e:
        logger.error(f"Numerical error: {e}")
        click.echo(f"Numerical error: {e}", err=True)
        raise SystemExit(EXIT_NUMERICAL_ERROR)
    except OSError as e:
        logger.error(f"I/O error: {e}")
        click.echo(f"I/O error: {e}", err=True)
        raise SystemExit(EXIT_NUMERICAL_ERROR)

    report(result, config)


def task_options(func):
    func = click.option(
        "--svg", is_flag=True, help="Also render the primary column as an SVG plot"
    )(func)
    func = click.option(
        "--out", default=None, type=click.Path(file_okay=False), help="Output directory"
    )(func)
    func = click.option(
        "--config",
        "config_path",
        required=True,
        type=click.Path(exists=True, dir_okay=False),
        help="Run configuration file",
    )(func)
    return func


@click.group()
def cli():
    pass


@cli.command()
@task_options
def spectrum(config_path, out, svg):
    """Compute the homodyne squeezing spectrum over a frequency grid."""
    execute(Task.SPECTRUM, config_path, out, svg)


@cli.command()
@task_options
def stability(config_path, out, svg):
    """Sweep the detuning and write the stability diagram."""
    execute(Task.STABILITY, config_path, out, svg)


@cli.command()
@task_options
def threshold(config_path, out, svg):
    """Print the small-detuning instability threshold."""
    execute(Task.THRESHOLD, config_path, out, svg)
