"""
Reader and writer for run configuration documents.

A document is a sequence of ``[section]`` headers and ``key = value`` lines; ``#`` starts a
comment. Example::

    [params]
    gamma = 0.3          # rates in units of omega_m
    gamma_m = 1e-5
    G_omega = 0.36

    [task]
    name = stability
    coupling_kind = dispersive

    [grid]
    min = -0.1
    max = 0.1
    points = 2001

    [output]
    directory = output
    svg = true
"""
import math
from typing import Any, Dict, Optional, Tuple

from pydantic import ValidationError

from config.settings import settings
from models.schema import (
    CavityParams,
    CouplingKind,
    GridScale,
    GridSpec,
    OutputSpec,
    RunConfig,
    SpectrumMethod,
    Task,
)
from physics.model import resolve_n_th
from utils.errors import ConfigError, ConfigErrorCode, ParameterError

PARAM_KEYS = {
    "gamma",
    "gamma_m",
    "omega_m",
    "delta",
    "g_omega",
    "g_gamma",
    "G_omega",
    "G_gamma",
    "drive_amplitude",
    "n_th",
    "temperature",
    "omega_m_si",
}
SECTIONS: Dict[str, set] = {
    "params": PARAM_KEYS,
    "task": {"name", "coupling_kind", "method", "symmetrize"},
    "grid": {"min", "max", "points", "scale"},
    "output": {"directory", "prefix", "svg"},
}
RATE_KEYS = ("gamma", "gamma_m", "omega_m")
TRUE_WORDS = {"true", "yes", "on", "1"}
FALSE_WORDS = {"false", "no", "off", "0"}

Entry = Tuple[str, int]  # raw value, line number


def _tokenize(text: str) -> Dict[str, Dict[str, Entry]]:
    sections: Dict[str, Dict[str, Entry]] = {}
    current: Optional[str] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in SECTIONS:
                raise ConfigError(
                    ConfigErrorCode.UNKNOWN_SECTION, f"unknown section [{current}]", number
                )
            sections.setdefault(current, {})
            continue

        if "=" not in line:
            raise ConfigError(
                ConfigErrorCode.INVALID_VALUE, f"expected 'key = value', got {line!r}", number
            )
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            raise ConfigError(
                ConfigErrorCode.UNKNOWN_KEY, f"key {key!r} appears before any section", number
            )
        if key not in SECTIONS[current]:
            raise ConfigError(
                ConfigErrorCode.UNKNOWN_KEY, f"unknown key {key!r} in [{current}]", number
            )
        if key in sections[current]:
            raise ConfigError(
                ConfigErrorCode.INVALID_VALUE, f"duplicate key {key!r} in [{current}]", number
            )
        sections[current][key] = (value, number)

    return sections


def _number(section: str, key: str, entry: Entry) -> float:
    value, line = entry
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(
            ConfigErrorCode.MALFORMED_NUMBER, f"{section}.{key}: {value!r} is not a number", line
        )
    if not math.isfinite(number):
        raise ConfigError(
            ConfigErrorCode.MALFORMED_NUMBER, f"{section}.{key}: {value!r} is not finite", line
        )
    return number


def _integer(section: str, key: str, entry: Entry) -> int:
    value, line = entry
    try:
        return int(value)
    except ValueError:
        raise ConfigError(
            ConfigErrorCode.MALFORMED_NUMBER, f"{section}.{key}: {value!r} is not an integer", line
        )


def _boolean(section: str, key: str, entry: Entry) -> bool:
    value, line = entry
    word = value.lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise ConfigError(
        ConfigErrorCode.INVALID_VALUE, f"{section}.{key}: {value!r} is not a boolean", line
    )


def _choice(enum_type, section: str, key: str, entry: Entry):
    value, line = entry
    try:
        return enum_type(value.lower())
    except ValueError:
        allowed = ", ".join(member.value for member in enum_type)
        raise ConfigError(
            ConfigErrorCode.INVALID_VALUE,
            f"{section}.{key}: {value!r} is not one of {allowed}",
            line,
        )


def _require(entries: Dict[str, Entry], section: str, key: str) -> Entry:
    if key not in entries:
        raise ConfigError(ConfigErrorCode.MISSING_KEY, f"missing required key {section}.{key}")
    return entries[key]


def _validation_message(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in detail['loc']) or 'value'}: {detail['msg']}"
        for detail in error.errors()
    )


def _build_params(entries: Dict[str, Entry]) -> Tuple[CavityParams, Optional[float]]:
    _require(entries, "params", "gamma")
    _require(entries, "params", "gamma_m")
    values = {key: _number("params", key, entry) for key, entry in entries.items()}
    values.setdefault("omega_m", 1.0)

    for key in RATE_KEYS:
        if values[key] <= 0:
            line = entries[key][1] if key in entries else None
            raise ConfigError(
                ConfigErrorCode.NON_POSITIVE_RATE,
                f"params.{key} must be > 0, got {values[key]}",
                line,
            )

    bare = {"g_omega", "g_gamma", "drive_amplitude"} & values.keys()
    effective = {"G_omega", "G_gamma"} & values.keys()
    if bare and effective:
        key = sorted(effective)[0]
        raise ConfigError(
            ConfigErrorCode.INVALID_VALUE,
            "give either bare couplings with drive_amplitude or effective couplings G_omega/G_gamma, not both",
            entries[key][1],
        )

    omega_m_si = values.pop("omega_m_si", None)
    temperature = values.pop("temperature", None)
    if temperature is not None and "n_th" not in values and omega_m_si is None:
        raise ConfigError(
            ConfigErrorCode.MISSING_KEY,
            "params.temperature needs params.omega_m_si to convert into n_th",
            entries["temperature"][1],
        )
    try:
        n_th = resolve_n_th(values.pop("n_th", None), temperature, omega_m_si)
    except ParameterError as e:
        raise ConfigError(ConfigErrorCode.INVALID_VALUE, f"params: {e}")

    try:
        if effective:
            params = CavityParams.from_effective_couplings(
                gamma=values["gamma"],
                gamma_m=values["gamma_m"],
                omega_m=values["omega_m"],
                G_omega=values.get("G_omega", 0.0),
                G_gamma=values.get("G_gamma", 0.0),
                delta=values.get("delta", 0.0),
                n_th=n_th,
            )
        else:
            params = CavityParams(**values, n_th=n_th)
    except (ValidationError, ValueError) as e:
        message = _validation_message(e) if isinstance(e, ValidationError) else str(e)
        raise ConfigError(ConfigErrorCode.INVALID_VALUE, f"params: {message}")

    return params.normalized(), omega_m_si


def _build_grid(entries: Dict[str, Entry]) -> GridSpec:
    grid_kwargs: Dict[str, Any] = {
        "min": _number("grid", "min", _require(entries, "grid", "min")),
        "max": _number("grid", "max", _require(entries, "grid", "max")),
        "points": _integer("grid", "points", _require(entries, "grid", "points")),
    }
    if "scale" in entries:
        grid_kwargs["scale"] = _choice(GridScale, "grid", "scale", entries["scale"])
    try:
        return GridSpec(**grid_kwargs)
    except ValidationError as e:
        raise ConfigError(ConfigErrorCode.INVALID_VALUE, f"grid: {_validation_message(e)}")


def parse_config(text: str, task: Optional[Task] = None) -> RunConfig:
    """
    Parse a configuration document into a validated RunConfig.

    ``task`` is the task selected by the caller. A document naming a different task is
    rejected; a document without ``[task] name`` takes it.
    """
    sections = _tokenize(text)
    if "params" not in sections:
        raise ConfigError(ConfigErrorCode.MISSING_KEY, "missing required section [params]")

    params, omega_m_si = _build_params(sections["params"])

    task_entries = sections.get("task", {})
    if "name" in task_entries:
        declared = _choice(Task, "task", "name", task_entries["name"])
        if task is not None and declared is not task:
            raise ConfigError(
                ConfigErrorCode.INVALID_VALUE,
                f"config declares task {declared.value!r} but {task.value!r} was requested",
                task_entries["name"][1],
            )
        task = declared
    elif task is None:
        raise ConfigError(ConfigErrorCode.MISSING_KEY, "missing required key task.name")

    options: Dict[str, Any] = {}
    if "coupling_kind" in task_entries:
        options["coupling_kind"] = _choice(
            CouplingKind, "task", "coupling_kind", task_entries["coupling_kind"]
        )
    if "method" in task_entries:
        options["method"] = _choice(
            SpectrumMethod, "task", "method", task_entries["method"]
        )
    if "symmetrize" in task_entries:
        options["symmetrize"] = _boolean("task", "symmetrize", task_entries["symmetrize"])

    if "grid" in sections:
        options["grid"] = _build_grid(sections["grid"])

    output_entries = sections.get("output", {})
    output = OutputSpec(
        directory=output_entries.get("directory", (settings.OUTPUT_DIRECTORY, 0))[0],
        prefix=output_entries.get("prefix", ("", 0))[0],
        emit_svg=_boolean("output", "svg", output_entries["svg"])
        if "svg" in output_entries
        else False,
    )

    return RunConfig(
        params=params,
        task=task,
        output=output,
        omega_m_si=omega_m_si,
        **options,
    )


def parse_config_file(path: str, task: Optional[Task] = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except UnicodeDecodeError as e:
        raise ConfigError(
            ConfigErrorCode.INVALID_VALUE, f"{path} is not valid UTF-8: {e.reason}"
        ) from e
    return parse_config(text, task)


def serialize_config(config: RunConfig) -> str:
    """Write a document that parse_config reads back into an equal RunConfig."""
    p = config.params
    lines = [
        "[params]",
        f"gamma = {p.gamma!r}",
        f"gamma_m = {p.gamma_m!r}",
        f"omega_m = {p.omega_m!r}",
        f"delta = {p.delta!r}",
        f"g_omega = {p.g_omega!r}",
        f"g_gamma = {p.g_gamma!r}",
        f"drive_amplitude = {p.drive_amplitude!r}",
        f"n_th = {p.n_th!r}",
    ]
    if config.omega_m_si is not None:
        lines.append(f"omega_m_si = {config.omega_m_si!r}")

    lines += [
        "",
        "[task]",
        f"name = {config.task.value}",
        f"coupling_kind = {config.coupling_kind.value}",
        f"method = {config.method.value}",
        f"symmetrize = {'true' if config.symmetrize else 'false'}",
    ]

    if config.grid is not None:
        lines += [
            "",
            "[grid]",
            f"min = {config.grid.min!r}",
            f"max = {config.grid.max!r}",
            f"points = {config.grid.points}",
            f"scale = {config.grid.scale.value}",
        ]

    lines += [
        "",
        "[output]",
        f"directory = {config.output.directory}",
        f"prefix = {config.output.prefix}",
        f"svg = {'true' if config.output.emit_svg else 'false'}",
    ]
    return "\n".join(lines) + "\n"
