"""
Classical steady state, mechanical susceptibility and bath occupancy of the cavity.

Everything here is a pure function of its arguments and works in whatever rate unit
the parameters are expressed in.
"""
from typing import Optional, Union

import numpy as np
from scipy import constants

from models.schema import CavityParams, SteadyState, Susceptibility
from utils.errors import ParameterError

ArrayLike = Union[float, np.ndarray]


def steady_state(params: CavityParams) -> SteadyState:
    """
    Solve (gamma/2 - i delta) a0 = sqrt(gamma) A0 at lowest order in the couplings.

    The effective couplings use |a0| so they stay real when the detuning makes a0 complex.
    """
    if not params.gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {params.gamma}")

    a0 = np.sqrt(params.gamma) * params.drive_amplitude / complex(
        params.gamma / 2.0, -params.delta
    )
    amplitude = abs(a0)
    return SteadyState(
        a0=complex(a0),
        G_omega=2.0 * params.g_omega * amplitude,
        G_gamma=params.g_gamma * amplitude,
    )


def susceptibility(omega: ArrayLike, params: CavityParams) -> Susceptibility:
    """chi(omega) = omega_m / (omega_m^2 - omega^2 - i gamma_m omega)."""
    omega = np.asarray(omega, dtype=float)
    inverse = (params.omega_m**2 - omega**2 - 1j * params.gamma_m * omega) / params.omega_m
    value = 1.0 / inverse
    if value.ndim == 0:
        value = complex(value)
    return Susceptibility(value=value)


def thermal_occupancy(
    temperature: float, omega_m: float, hbar: float = constants.hbar
) -> float:
    """
    Bose-Einstein occupancy [exp(hbar omega_m / T) - 1]^-1 with T in energy units.

    ``hbar`` may be set to 1 when ``temperature`` is already expressed in the rate unit
    of ``omega_m``.
    """
    if temperature < 0:
        raise ParameterError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        return 0.0
    ratio = hbar * omega_m / temperature
    with np.errstate(over="ignore"):
        return float(1.0 / np.expm1(ratio))


def thermal_occupancy_kelvin(temperature_k: float, omega_m: float) -> float:
    """Occupancy for a bath temperature in kelvin and omega_m in rad/s."""
    return thermal_occupancy(temperature_k * constants.k, omega_m)


def resolve_n_th(
    n_th: Optional[float], temperature: Optional[float], omega_m: Optional[float]
) -> float:
    """Directly supplied n_th wins over a temperature."""
    if n_th is not None:
        return n_th
    if temperature is None:
        return 0.0
    if omega_m is None:
        raise ParameterError(
            "a physical omega_m is required to convert a temperature into n_th"
        )
    return thermal_occupancy(temperature, omega_m)


def beta(omega: ArrayLike, gamma: float) -> ArrayLike:
    """Bad-cavity readout factor 2 i omega / gamma of the dissipative coupling."""
    return 2j * np.asarray(omega) / gamma


def exact_beta(omega: ArrayLike, gamma: float) -> ArrayLike:
    """i omega / (gamma/2 - i omega); tends to beta(omega) for omega << gamma."""
    omega = np.asarray(omega)
    return 1j * omega / (gamma / 2.0 - 1j * omega)


def cavity_filter(omega: ArrayLike, gamma: float) -> ArrayLike:
    """(gamma/2) / (gamma/2 - i omega): the finite-linewidth factor on dispersive coupling."""
    omega = np.asarray(omega)
    return 1.0 / (1.0 - 2j * omega / gamma)


def reflection_phase(omega: ArrayLike, gamma: float) -> ArrayLike:
    """Empty-cavity reflection (gamma/2 + i omega) / (gamma/2 - i omega), |r| = 1."""
    omega = np.asarray(omega)
    return (gamma / 2.0 + 1j * omega) / (gamma / 2.0 - 1j * omega)
