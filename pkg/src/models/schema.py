import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class CouplingKind(str, Enum):
    DISPERSIVE = "dispersive"
    DISSIPATIVE = "dissipative"
    MIXED = "mixed"


class Task(str, Enum):
    SPECTRUM = "spectrum"
    STABILITY = "stability"
    THRESHOLD = "threshold"


class GridScale(str, Enum):
    LINEAR = "linear"
    LOG = "log"


class SpectrumMethod(str, Enum):
    GENERAL = "general"
    BADCAVITY = "badcavity"


# Physical parameters


class CavityParams(BaseModel):
    """
    Rates and couplings of a one-sided cavity whose input mirror is a mechanical oscillator.

    All rates are angular frequencies in a common unit; ``normalized()`` rescales them to
    units of ``omega_m``. ``drive_amplitude`` carries the square root of that unit.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    gamma: float
    gamma_m: float
    omega_m: float
    delta: float = 0.0
    g_omega: float = 0.0
    g_gamma: float = 0.0
    drive_amplitude: float = 0.0
    n_th: float = 0.0

    @field_validator("gamma", "gamma_m", "omega_m")
    @classmethod
    def _positive_rate(cls, value: float, info) -> float:
        if not value > 0:
            raise ValueError(f"{info.field_name} must be > 0, got {value}")
        return value

    @field_validator("n_th")
    @classmethod
    def _non_negative_occupancy(cls, value: float) -> float:
        if value < 0:
            raise ValueError(f"n_th must be >= 0, got {value}")
        return value

    @field_validator("drive_amplitude")
    @classmethod
    def _real_non_negative_drive(cls, value: float) -> float:
        if value < 0:
            raise ValueError(
                f"drive_amplitude is real and >= 0 by phase convention, got {value}"
            )
        return value

    @model_validator(mode="after")
    def _underdamped(self) -> "CavityParams":
        if not self.gamma_m < self.omega_m:
            raise ValueError(
                f"gamma_m < omega_m required (underdamped mechanics), "
                f"got gamma_m={self.gamma_m}, omega_m={self.omega_m}"
            )
        return self

    def with_changes(self, **changes: Any) -> "CavityParams":
        """Return a validated copy with some fields replaced."""
        return CavityParams(**{**self.model_dump(), **changes})

    def normalized(self) -> "CavityParams":
        """Express every rate in units of omega_m (omega_m becomes 1)."""
        scale = self.omega_m
        if scale == 1.0:
            return self
        return CavityParams(
            gamma=self.gamma / scale,
            gamma_m=self.gamma_m / scale,
            omega_m=1.0,
            delta=self.delta / scale,
            g_omega=self.g_omega / scale,
            g_gamma=self.g_gamma / scale,
            drive_amplitude=self.drive_amplitude / math.sqrt(scale),
            n_th=self.n_th,
        )

    @classmethod
    def from_effective_couplings(
        cls,
        gamma: float,
        gamma_m: float,
        omega_m: float,
        G_omega: float = 0.0,
        G_gamma: float = 0.0,
        delta: float = 0.0,
        n_th: float = 0.0,
    ) -> "CavityParams":
        """
        Choose the drive so that |a0| = 1 and bare couplings that reproduce the requested
        effective couplings G_omega = 2 g_omega |a0| and G_gamma = g_gamma |a0|.
        """
        if not gamma > 0:
            raise ValueError(f"gamma must be > 0, got {gamma}")
        drive = math.sqrt((gamma**2 / 4.0 + delta**2) / gamma)
        return cls(
            gamma=gamma,
            gamma_m=gamma_m,
            omega_m=omega_m,
            delta=delta,
            g_omega=G_omega / 2.0,
            g_gamma=G_gamma,
            drive_amplitude=drive,
            n_th=n_th,
        )


@dataclass(frozen=True)
class SteadyState:
    a0: complex
    G_omega: float
    G_gamma: float

    @property
    def intracavity_photons(self) -> float:
        return abs(self.a0) ** 2

    def rescaled(self, factor: float) -> "SteadyState":
        """Divide the effective couplings by ``factor``; a0 is dimensionless."""
        return SteadyState(
            a0=self.a0, G_omega=self.G_omega / factor, G_gamma=self.G_gamma / factor
        )


@dataclass(frozen=True)
class Susceptibility:
    value: Any  # complex or complex ndarray

    @property
    def inverse(self) -> Any:
        return 1.0 / self.value


# Spectra


@dataclass(frozen=True, eq=False)
class InputCorrelator:
    """3x3 correlator of the input noise vector (X_in, Y_in, Q_in)."""

    matrix: np.ndarray

    @property
    def n_th(self) -> float:
        return float(self.matrix[2, 2].real) - 0.5

    @property
    def symmetric(self) -> np.ndarray:
        """Frequency-even part: the real (symmetric) part of the Hermitian matrix."""
        return self.matrix.real.copy()


@dataclass(frozen=True, eq=False)
class NoiseTransfer:
    """
    2x3 matrix mapping (X_in, Y_in, Q_in) at ``omega`` to (X_out, Y_out).

    ``state`` holds the 4x3 intracavity response (X, Y, Q, P) when the general solver
    produced the matrix.
    """

    omega: float
    matrix: np.ndarray
    coupling_kind: CouplingKind
    method: SpectrumMethod
    validated: bool = True
    state: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SqueezeResult:
    s_min: float
    theta_opt: float
    s_max: float
    s_min_closed_form: float
    m: float
    n: float
    base: float
    methods_agree: bool


@dataclass(frozen=True, eq=False)
class SqueezeSpectrum:
    grid: np.ndarray
    thetas: Tuple[float, ...]
    s_zz: np.ndarray  # shape (len(thetas), len(grid))
    s_min: np.ndarray
    theta_opt: np.ndarray
    n_ba_like: np.ndarray
    s_limit: np.ndarray
    coupling_kind: CouplingKind
    method: SpectrumMethod
    symmetrized: bool = True
    validated: bool = True

    def s_zz_at(self, theta: float) -> np.ndarray:
        for index, tabulated in enumerate(self.thetas):
            if math.isclose(tabulated, theta, rel_tol=0.0, abs_tol=1e-12):
                return self.s_zz[index]
        raise KeyError(f"theta={theta} was not tabulated; have {self.thetas}")


# Stability


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    """4x4 real drift matrix over the state (X, Y, Q, P)."""

    entries: np.ndarray
    coupling_kind: CouplingKind
    delta: float = 0.0

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))


@dataclass(frozen=True, eq=False)
class RouthArray:
    rows: List[np.ndarray]
    first_column: np.ndarray
    marginal: bool
    sign_changes: int


@dataclass(frozen=True, eq=False)
class StabilityReport:
    char_poly: np.ndarray
    rh_stable: bool
    max_re_eig: float
    method_agreement: bool
    marginal: bool
    eigenvalues: np.ndarray
    trace_residual: float


@dataclass(frozen=True)
class SweepPoint:
    delta: float
    rh_stable: bool
    max_re_eig: float
    marginal: bool
    methods_agree: bool


@dataclass(frozen=True)
class UnstableInterval:
    low: float
    high: float
    clipped_low: bool = False
    clipped_high: bool = False


@dataclass(frozen=True)
class DetuningSweep:
    coupling_kind: CouplingKind
    points: List[SweepPoint]
    intervals: List[UnstableInterval] = field(default_factory=list)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([p.delta for p in self.points])

    @property
    def disagreements(self) -> int:
        return sum(1 for p in self.points if not p.methods_agree)


@dataclass(frozen=True)
class DetuningThreshold:
    coupling_kind: CouplingKind
    value: Optional[float]

    @property
    def stable_for_all(self) -> bool:
        return self.value is None

    def describe(self) -> str:
        if self.value is None:
            return "stable for all small detunings"
        return f"{self.value:.6g}"


# Run configuration


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    min: float
    max: float
    points: int
    scale: GridScale = GridScale.LINEAR

    @model_validator(mode="after")
    def _ordered(self) -> "GridSpec":
        if not self.min < self.max:
            raise ValueError(f"grid min < max required, got {self.min} >= {self.max}")
        if self.points < 2:
            raise ValueError(f"grid points >= 2 required, got {self.points}")
        if self.scale is GridScale.LOG and self.min <= 0:
            raise ValueError("log grid requires min > 0")
        return self

    def values(self) -> np.ndarray:
        if self.scale is GridScale.LOG:
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    directory: str
    prefix: str = ""
    emit_svg: bool = False

    @field_validator("directory", "prefix")
    @classmethod
    def _plain_config_value(cls, value: str, info) -> str:
        # Written unquoted into config documents, where '#' opens a comment.
        if "#" in value or "\n" in value or "\r" in value:
            raise ValueError(f"output.{info.field_name} must not contain '#' or line breaks")
        if value != value.strip():
            raise ValueError(
                f"output.{info.field_name} must not start or end with whitespace, got {value!r}"
            )
        return value


class RunConfig(BaseModel):
    """Fully resolved run description; params are in units of omega_m."""

    model_config = ConfigDict(frozen=True)

    params: CavityParams
    task: Task
    coupling_kind: CouplingKind = CouplingKind.DISPERSIVE
    method: SpectrumMethod = SpectrumMethod.GENERAL
    symmetrize: bool = True
    grid: Optional[GridSpec] = None
    output: OutputSpec
    omega_m_si: Optional[float] = None

    def resolved_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


@dataclass(frozen=True)
class RunResult:
    task: Task
    files: List[str] = field(default_factory=list)
    threshold: Optional[DetuningThreshold] = None
    linear_threshold: Optional[DetuningThreshold] = None
    validated: bool = True
