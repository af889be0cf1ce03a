"""
Noise transfer matrices, homodyne squeezing spectra and cooperativities.

Input noise is the vector u = (X_in, Y_in, Q_in) and the measured outputs are
(X_out, Y_out). A homodyne detector at angle theta reads Z = cos(theta) X_out + sin(theta) Y_out.
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from models.schema import (
    CavityParams,
    CouplingKind,
    InputCorrelator,
    NoiseTransfer,
    SpectrumMethod,
    SqueezeResult,
    SqueezeSpectrum,
    SteadyState,
)
from physics.model import beta, steady_state, susceptibility
from physics.stability import P, Q, STATE_SIZE, X, Y, drift_matrix
from utils.errors import ParameterError, SingularSystemError
from utils.logger import logger, timing_decorator

X_IN, Y_IN, Q_IN = range(3)
CLOSED_FORM_RTOL = 1e-10


def input_correlator(n_th: float) -> InputCorrelator:
    """
    Correlator N of the input noise: optical vacuum plus a thermal mechanical bath.

    The optical block [[1, i], [-i, 1]] has eigenvalues {0, 2}.
    """
    if n_th < 0:
        raise ParameterError(f"n_th must be >= 0, got {n_th}")
    N = np.zeros((3, 3), dtype=complex)
    N[X_IN, X_IN] = 1.0
    N[Y_IN, Y_IN] = 1.0
    N[X_IN, Y_IN] = 1j
    N[Y_IN, X_IN] = -1j
    N[Q_IN, Q_IN] = n_th + 0.5
    return InputCorrelator(matrix=N)


def _require_resonance(params: CavityParams) -> None:
    if params.delta != 0:
        raise ParameterError(
            f"closed-form bad-cavity transfer requires delta = 0, got {params.delta}"
        )


def transfer_dispersive_badcavity(
    omega: float, steady: SteadyState, params: CavityParams
) -> NoiseTransfer:
    """X_out = X_in and Y_out = Y_in + (4 G/sqrt(gamma)) chi [G/sqrt(gamma) X_in + sqrt(gamma_m) Q_in]."""
    _require_resonance(params)
    chi = susceptibility(omega, params).value
    G = steady.G_omega
    readout = 4.0 * G / math.sqrt(params.gamma)

    T = np.zeros((2, 3), dtype=complex)
    T[0, X_IN] = 1.0
    T[1, X_IN] = 4.0 * G**2 / params.gamma * chi
    T[1, Y_IN] = 1.0
    T[1, Q_IN] = readout * math.sqrt(params.gamma_m) * chi
    return NoiseTransfer(
        omega=omega,
        matrix=T,
        coupling_kind=CouplingKind.DISPERSIVE,
        method=SpectrumMethod.BADCAVITY,
    )


def transfer_dissipative_badcavity(
    omega: float, steady: SteadyState, params: CavityParams
) -> NoiseTransfer:
    """Y_out = Y_in and X_out = X_in + (4 G b/sqrt(gamma)) chi [sqrt(gamma_m) Q_in + G b/sqrt(gamma) Y_in]."""
    _require_resonance(params)
    chi = susceptibility(omega, params).value
    G = steady.G_gamma
    b = beta(omega, params.gamma)
    readout = 4.0 * G * b / math.sqrt(params.gamma)

    T = np.zeros((2, 3), dtype=complex)
    T[0, X_IN] = 1.0
    T[0, Y_IN] = readout * chi * G * b / math.sqrt(params.gamma)
    T[0, Q_IN] = readout * chi * math.sqrt(params.gamma_m)
    T[1, Y_IN] = 1.0
    return NoiseTransfer(
        omega=omega,
        matrix=T,
        coupling_kind=CouplingKind.DISSIPATIVE,
        method=SpectrumMethod.BADCAVITY,
    )


def _input_matrix(
    params: CavityParams, steady: SteadyState, coupling_kind: CouplingKind
) -> np.ndarray:
    B = np.zeros((STATE_SIZE, 3))
    B[X, X_IN] = math.sqrt(params.gamma) / 2.0
    B[Y, Y_IN] = math.sqrt(params.gamma) / 2.0
    B[P, Q_IN] = math.sqrt(params.gamma_m)
    if coupling_kind in (CouplingKind.DISSIPATIVE, CouplingKind.MIXED):
        # Vacuum enters the dissipative force directly as -G Y_in / sqrt(gamma).
        B[P, Y_IN] -= steady.G_gamma / math.sqrt(params.gamma)
    return B


def _output_maps(
    params: CavityParams, steady: SteadyState, coupling_kind: CouplingKind
) -> Tuple[np.ndarray, np.ndarray]:
    """(C, D) of u_out = C v + D u_in."""
    C = np.zeros((2, STATE_SIZE))
    C[0, X] = 2.0 * math.sqrt(params.gamma)
    C[1, Y] = 2.0 * math.sqrt(params.gamma)
    if coupling_kind in (CouplingKind.DISSIPATIVE, CouplingKind.MIXED):
        C[0, Q] = -4.0 * steady.G_gamma / math.sqrt(params.gamma)
    D = np.zeros((2, 3))
    D[0, X_IN] = -1.0
    D[1, Y_IN] = -1.0
    return C, D


def transfer_general(
    omega: float,
    steady: SteadyState,
    params: CavityParams,
    coupling_kind: CouplingKind,
) -> NoiseTransfer:
    """
    Solve (-i omega I - A) v = B u_in for the intracavity state and apply the input-output
    relations. Exact in omega/gamma.

    Results at nonzero detuning or for mixed coupling are returned with validated=False.
    """
    A = drift_matrix(params, steady, coupling_kind).entries
    B = _input_matrix(params, steady, coupling_kind)
    C, D = _output_maps(params, steady, coupling_kind)

    system = -1j * omega * np.eye(STATE_SIZE) - A
    condition = np.linalg.cond(system)
    if not np.isfinite(condition) or condition > 1.0 / np.finfo(float).eps:
        raise SingularSystemError(omega, condition)
    try:
        state = np.linalg.solve(system, B)
    except np.linalg.LinAlgError:
        raise SingularSystemError(omega, condition)

    validated = params.delta == 0 and coupling_kind is not CouplingKind.MIXED
    return NoiseTransfer(
        omega=omega,
        matrix=C @ state + D,
        coupling_kind=coupling_kind,
        method=SpectrumMethod.GENERAL,
        validated=validated,
        state=state,
    )


def transfer(
    omega: float,
    steady: SteadyState,
    params: CavityParams,
    coupling_kind: CouplingKind,
    method: SpectrumMethod = SpectrumMethod.GENERAL,
) -> NoiseTransfer:
    if method is SpectrumMethod.GENERAL:
        return transfer_general(omega, steady, params, coupling_kind)
    if coupling_kind is CouplingKind.DISPERSIVE:
        return transfer_dispersive_badcavity(omega, steady, params)
    if coupling_kind is CouplingKind.DISSIPATIVE:
        return transfer_dissipative_badcavity(omega, steady, params)
    raise ParameterError("no closed-form bad-cavity transfer exists for mixed coupling")


def _check_pair(t_pos: NoiseTransfer, t_neg: NoiseTransfer) -> None:
    if not math.isclose(t_neg.omega, -t_pos.omega, rel_tol=1e-12, abs_tol=1e-300):
        raise ParameterError(
            f"transfers must be evaluated at +omega and -omega, got {t_pos.omega} and {t_neg.omega}"
        )


def output_covariance(
    t_pos: NoiseTransfer,
    t_neg: NoiseTransfer,
    correlator: InputCorrelator,
    symmetrize: bool = True,
) -> np.ndarray:
    """
    2x2 real output covariance sigma with S_ZZ(theta) = u(theta)^T sigma u(theta).

    The symmetrized covariance keeps only the frequency-even part of the input noise. The
    raw covariance uses the full correlator and is meant for diagnostics.
    """
    _check_pair(t_pos, t_neg)
    N = correlator.symmetric if symmetrize else correlator.matrix
    sigma = np.real(t_pos.matrix @ N @ t_neg.matrix.T)
    if symmetrize:
        sigma = 0.5 * (sigma + sigma.T)
    return sigma


def quadrature_vector(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def szz(
    theta: float,
    t_pos: NoiseTransfer,
    t_neg: NoiseTransfer,
    correlator: InputCorrelator,
    symmetrize: bool = True,
) -> float:
    """Spectral density of the homodyne quadrature Z(theta) at the frequency of ``t_pos``."""
    u = quadrature_vector(theta)
    return float(u @ output_covariance(t_pos, t_neg, correlator, symmetrize) @ u)


def squeeze_coefficients(
    sigma: np.ndarray, coupling_kind: CouplingKind
) -> Tuple[float, float, float]:
    """
    Coefficients (base, M, N) of the theta dependence around the reference quadrature.

    Dispersive: S = base + M sin^2 + N sin cos, with base = sigma_XX.
    Dissipative: S = base + M cos^2 + N sin cos, with base = sigma_YY.
    """
    if coupling_kind is CouplingKind.DISSIPATIVE:
        base = sigma[1, 1]
        M = sigma[0, 0] - sigma[1, 1]
    else:
        base = sigma[0, 0]
        M = sigma[1, 1] - sigma[0, 0]
    return float(base), float(M), float(2.0 * sigma[0, 1])


def closed_form_minimum(M: float, N: float, base: float = 1.0) -> float:
    """base - (N^2/2) / (sqrt(M^2 + N^2) + M), rearranged where M is negative."""
    root = math.hypot(M, N)
    if M >= 0:
        if root == 0:
            return base
        return base - 0.5 * N**2 / (root + M)
    return base + 0.5 * (M - root)


def optimal_squeeze(
    t_pos: NoiseTransfer,
    t_neg: NoiseTransfer,
    correlator: InputCorrelator,
    symmetrize: bool = True,
) -> SqueezeResult:
    """
    Minimise S_ZZ over theta twice: as the smallest eigenvalue of the output covariance,
    and through the closed form on the coefficients of the reference quadrature.
    """
    sigma = output_covariance(t_pos, t_neg, correlator, symmetrize)
    sigma = 0.5 * (sigma + sigma.T)
    values, vectors = np.linalg.eigh(sigma)
    s_min, s_max = float(values[0]), float(values[1])
    theta = math.atan2(vectors[1, 0], vectors[0, 0]) % math.pi

    base, M, N = squeeze_coefficients(sigma, t_pos.coupling_kind)
    closed = closed_form_minimum(M, N, base)
    scale = max(abs(s_min), abs(closed), np.finfo(float).tiny)
    agree = abs(s_min - closed) <= CLOSED_FORM_RTOL * scale + 10.0 * np.finfo(float).eps * s_max
    if not agree:
        logger.warning(
            f"Eigenvalue minimum {s_min:.12g} and closed form {closed:.12g} disagree "
            f"at omega={t_pos.omega:.6g}"
        )

    return SqueezeResult(
        s_min=s_min,
        theta_opt=theta,
        s_max=s_max,
        s_min_closed_form=closed,
        m=M,
        n=N,
        base=base,
        methods_agree=agree,
    )


def s_limit(n_ba_like, n_th: float):
    """Far-detuned plateau (n_th + 1/2) / (n_ba + n_th + 1/2) of the minimised spectrum."""
    n_ba_like = np.asarray(n_ba_like, dtype=float)
    if np.any(n_ba_like < 0):
        raise ParameterError("n_ba_like must be >= 0")
    value = (n_th + 0.5) / (n_ba_like + n_th + 0.5)
    return float(value) if value.ndim == 0 else value


def lorentzian_sm(delta, n_ba: float, n_th: float, gamma_m: float):
    """Minimised spectrum near resonance, delta = omega - omega_m."""
    total = n_ba + n_th + 0.5
    profile = 1.0 / (1.0 + (2.0 * np.asarray(delta, dtype=float) / gamma_m) ** 2)
    value = (n_th + 0.5) / total + n_ba / total * profile
    return float(value) if value.ndim == 0 else value


def near_resonance_sm(omega, params: CavityParams, n_ba: float):
    """
    Minimised dispersive spectrum with the N^2 term under the root dropped.

    Keeps the exact Im^2(chi)/|chi|^2 so it stays valid away from the Lorentzian regime
    as long as M dominates N.
    """
    chi = np.asarray(susceptibility(omega, params).value)
    weight = chi.imag**2 / np.abs(chi) ** 2
    total = n_ba + params.n_th + 0.5
    value = (params.n_th + 0.5) / total + n_ba / total * weight
    return float(value) if value.ndim == 0 else value


def cooperativity(
    params: CavityParams,
    steady: SteadyState,
    coupling_kind: CouplingKind,
    omega: Optional[float] = None,
) -> float:
    """n_ba = G^2/(gamma_m gamma), times |beta(omega)|^2 for dissipative coupling."""
    if coupling_kind is CouplingKind.DISPERSIVE:
        return steady.G_omega**2 / (params.gamma_m * params.gamma)
    if coupling_kind is CouplingKind.DISSIPATIVE:
        if omega is None:
            raise ParameterError("dissipative cooperativity requires omega")
        return (
            steady.G_gamma**2
            / (params.gamma_m * params.gamma)
            * (2.0 * omega / params.gamma) ** 2
        )
    raise ParameterError("cooperativity is defined for pure coupling kinds only")


def cooperativity_from_transfer(transfer: NoiseTransfer, params: CavityParams) -> float:
    """
    Backaction cooperativity read off the general solver: optical noise power driving the
    mechanics relative to its intrinsic damping noise.
    """
    if transfer.state is None:
        raise ParameterError("transfer carries no intracavity response")
    response = transfer.state[Q]
    optical = abs(response[X_IN]) ** 2 + abs(response[Y_IN]) ** 2
    intrinsic = abs(response[Q_IN]) ** 2
    return float(optical / intrinsic)


def backaction_reduction_factor(omega: float, params: CavityParams) -> float:
    """
    Ratio of the vacuum-noise drive on the mechanics under dissipative coupling to that under
    dispersive coupling of the same strength. Tends to 2|omega|/gamma.
    """
    if params.delta != 0:
        raise ParameterError(
            f"backaction reduction is defined at delta = 0, got {params.delta}"
        )
    reference = math.sqrt(params.gamma * params.gamma_m)
    steady = SteadyState(a0=1.0, G_omega=reference, G_gamma=reference)

    drives = {}
    for kind in (CouplingKind.DISSIPATIVE, CouplingKind.DISPERSIVE):
        response = transfer_general(omega, steady, params, kind).state[Q]
        drives[kind] = math.hypot(abs(response[X_IN]), abs(response[Y_IN]))
    return drives[CouplingKind.DISSIPATIVE] / drives[CouplingKind.DISPERSIVE]


def default_frequency_grid(params: CavityParams) -> np.ndarray:
    """
    Geometrically dense points within DENSE_GRID_HALF_WIDTH * gamma_m of omega_m, merged with a
    linear background over [0.5, 2] omega_m. Only positive frequencies are kept.
    """
    omega_m, gamma_m = params.omega_m, params.gamma_m
    per_side = max((settings.DENSE_GRID_POINTS - 1) // 2, 1)
    offsets = np.geomspace(
        1e-2 * gamma_m, settings.DENSE_GRID_HALF_WIDTH * gamma_m, per_side
    )
    dense = np.concatenate([omega_m - offsets[::-1], [omega_m], omega_m + offsets])
    background = np.linspace(
        0.5 * omega_m, 2.0 * omega_m, settings.BACKGROUND_GRID_POINTS
    )
    grid = np.unique(np.concatenate([dense, background]))
    return grid[grid > 0]


@timing_decorator
def squeeze_spectrum(
    params: CavityParams,
    coupling_kind: CouplingKind,
    grid: Optional[Sequence[float]] = None,
    method: SpectrumMethod = SpectrumMethod.GENERAL,
    thetas: Sequence[float] = (0.0, math.pi / 2),
    symmetrize: bool = True,
    steady: Optional[SteadyState] = None,
) -> SqueezeSpectrum:
    """Tabulate S_ZZ at the requested angles and the theta-minimised spectrum over a grid."""
    steady = steady_state(params) if steady is None else steady
    grid = default_frequency_grid(params) if grid is None else np.asarray(grid, float)
    correlator = input_correlator(params.n_th)

    validated = params.delta == 0 and coupling_kind is not CouplingKind.MIXED
    if not validated:
        logger.warning(
            f"Spectrum for {coupling_kind.value} coupling at delta={params.delta} "
            "is outside the validated regime"
        )

    s_zz = np.empty((len(thetas), grid.size))
    s_min = np.empty(grid.size)
    theta_opt = np.empty(grid.size)
    n_ba_like = np.empty(grid.size)
    disagreements = 0

    for index, omega in enumerate(grid):
        t_pos = transfer(omega, steady, params, coupling_kind, method)
        t_neg = transfer(-omega, steady, params, coupling_kind, method)
        sigma = output_covariance(t_pos, t_neg, correlator, symmetrize)
        for row, theta in enumerate(thetas):
            u = quadrature_vector(theta)
            s_zz[row, index] = u @ sigma @ u

        result = optimal_squeeze(t_pos, t_neg, correlator, symmetrize)
        s_min[index] = result.s_min
        theta_opt[index] = result.theta_opt
        disagreements += not result.methods_agree

        if method is SpectrumMethod.GENERAL:
            n_ba_like[index] = cooperativity_from_transfer(t_pos, params)
        else:
            n_ba_like[index] = cooperativity(params, steady, coupling_kind, omega)

    if disagreements:
        logger.warning(f"{disagreements} grid points where the two minimisations disagree")
    logger.info(
        f"{coupling_kind.value} spectrum over {grid.size} frequencies, "
        f"min s_min = {s_min.min():.6g}"
    )

    return SqueezeSpectrum(
        grid=grid,
        thetas=tuple(float(t) for t in thetas),
        s_zz=s_zz,
        s_min=s_min,
        theta_opt=theta_opt,
        n_ba_like=n_ba_like,
        s_limit=s_limit(n_ba_like, params.n_th),
        coupling_kind=coupling_kind,
        method=method,
        symmetrized=symmetrize,
        validated=validated,
    )
