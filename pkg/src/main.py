import math

from models.schema import (
    DetuningSweep,
    GridScale,
    RunConfig,
    RunResult,
    SqueezeSpectrum,
    Task,
)
from physics.model import steady_state
from physics.spectra import squeeze_spectrum
from physics.stability import (
    sweep_detuning,
    threshold_linear_routh_hurwitz,
    threshold_small_detuning,
)
from utils.export import export_to_csv, export_to_svg
from utils.logger import log_execution, logger

SPECTRUM_COLUMNS = [
    "omega_over_omega_m",
    "s_min",
    "theta_opt",
    "s_zz_theta0",
    "s_zz_theta90",
    "n_ba_like",
    "s_limit",
]
STABILITY_COLUMNS = ["delta_over_omega_m", "rh_stable", "max_re_eig_over_omega_m"]
INTERVAL_COLUMNS = [
    "low_over_omega_m",
    "high_over_omega_m",
    "clipped_low",
    "clipped_high",
]


def _metadata(config: RunConfig) -> dict:
    return {"config": config.resolved_dict()}


def write_spectrum(config: RunConfig, spectrum: SqueezeSpectrum) -> list:
    omega_m = config.params.omega_m
    rows = [
        {
            "omega_over_omega_m": spectrum.grid[i] / omega_m,
            "s_min": spectrum.s_min[i],
            "theta_opt": spectrum.theta_opt[i],
            "s_zz_theta0": spectrum.s_zz_at(0.0)[i],
            "s_zz_theta90": spectrum.s_zz_at(math.pi / 2)[i],
            "n_ba_like": spectrum.n_ba_like[i],
            "s_limit": spectrum.s_limit[i],
        }
        for i in range(spectrum.grid.size)
    ]
    directory, prefix = config.output.directory, config.output.prefix
    files = [
        export_to_csv(
            rows,
            f"{prefix}spectrum.csv",
            directory=directory,
            metadata=_metadata(config),
            fieldnames=SPECTRUM_COLUMNS,
        )
    ]
    if config.output.emit_svg:
        files.append(
            export_to_svg(
                spectrum.grid / omega_m,
                {"s_min": spectrum.s_min},
                f"{prefix}spectrum.svg",
                directory=directory,
                xlabel="omega / omega_m",
                ylabel="S_min",
                title=f"{spectrum.coupling_kind.value} squeezing spectrum",
                log_x=config.grid is not None and config.grid.scale is GridScale.LOG,
            )
        )
    return files


def write_stability(config: RunConfig, sweep: DetuningSweep) -> list:
    omega_m = config.params.omega_m
    rows = [
        {
            "delta_over_omega_m": point.delta / omega_m,
            "rh_stable": point.rh_stable,
            "max_re_eig_over_omega_m": point.max_re_eig / omega_m,
        }
        for point in sweep.points
    ]
    intervals = [
        {
            "low_over_omega_m": interval.low / omega_m,
            "high_over_omega_m": interval.high / omega_m,
            "clipped_low": interval.clipped_low,
            "clipped_high": interval.clipped_high,
        }
        for interval in sweep.intervals
    ]
    directory, prefix = config.output.directory, config.output.prefix
    metadata = _metadata(config)
    metadata["disagreements"] = sweep.disagreements

    files = [
        export_to_csv(
            rows,
            f"{prefix}stability.csv",
            directory=directory,
            metadata=metadata,
            fieldnames=STABILITY_COLUMNS,
        ),
        export_to_csv(
            intervals,
            f"{prefix}stability_intervals.csv",
            directory=directory,
            metadata=metadata,
            fieldnames=INTERVAL_COLUMNS,
        ),
    ]
    if config.output.emit_svg:
        files.append(
            export_to_svg(
                sweep.deltas / omega_m,
                {"max_re_eig": [p.max_re_eig / omega_m for p in sweep.points]},
                f"{prefix}stability.svg",
                directory=directory,
                xlabel="delta / omega_m",
                ylabel="max Re(eigenvalue) / omega_m",
                title=f"{sweep.coupling_kind.value} stability diagram",
            )
        )
    return files


@log_execution
def run(config: RunConfig) -> RunResult:
    """Execute the task of a validated configuration and write its outputs."""
    params = config.params
    steady = steady_state(params)
    logger.info(
        f"Running {config.task.value} for {config.coupling_kind.value} coupling "
        f"(G_omega={steady.G_omega:.6g}, G_gamma={steady.G_gamma:.6g})"
    )

    if config.task is Task.SPECTRUM:
        grid = None
        if config.grid is not None:
            grid = config.grid.values() * params.omega_m
        spectrum = squeeze_spectrum(
            params,
            config.coupling_kind,
            grid=grid,
            method=config.method,
            symmetrize=config.symmetrize,
            steady=steady,
        )
        return RunResult(
            task=config.task,
            files=write_spectrum(config, spectrum),
            validated=spectrum.validated,
        )

    if config.task is Task.STABILITY:
        deltas = None
        if config.grid is not None:
            deltas = config.grid.values() * params.omega_m
        sweep = sweep_detuning(params, steady, config.coupling_kind, deltas=deltas)
        return RunResult(
            task=config.task,
            files=write_stability(config, sweep),
            validated=sweep.disagreements == 0,
        )

    return RunResult(
        task=config.task,
        threshold=threshold_small_detuning(params, steady, config.coupling_kind),
        linear_threshold=threshold_linear_routh_hurwitz(
            params, steady, config.coupling_kind
        ),
    )


if __name__ == "__main__":
    from cli.commands import cli

    cli()
