"""
Stability of the linearised cavity + oscillator dynamics over the state (X, Y, Q, P).

Two independent channels decide stability: the Routh-Hurwitz table built on the
characteristic polynomial, and the polynomial roots refined by Newton iteration.
A disagreement between them is reported per point, never resolved silently.
"""
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import settings
from models.schema import (
    CavityParams,
    CouplingKind,
    DetuningSweep,
    DetuningThreshold,
    DriftMatrix,
    RouthArray,
    StabilityReport,
    SteadyState,
    SweepPoint,
    UnstableInterval,
)
from physics.model import steady_state
from utils.errors import ConvergenceError, ParameterError
from utils.logger import logger, timing_decorator

STATE_SIZE = 4
X, Y, Q, P = range(STATE_SIZE)

MatrixLike = Union[DriftMatrix, np.ndarray]


def drift_matrix(
    params: CavityParams,
    steady: SteadyState,
    coupling_kind: CouplingKind,
    delta: Optional[float] = None,
) -> DriftMatrix:
    """
    Assemble the drift matrix A of d/dt (X, Y, Q, P) = A (X, Y, Q, P).

    The dissipative form is the one linear in the detuning. Mixed coupling adds the
    dispersive and dissipative entries.
    """
    delta = params.delta if delta is None else delta
    half_gamma = params.gamma / 2.0

    A = np.zeros((STATE_SIZE, STATE_SIZE))
    A[X, X] = -half_gamma
    A[X, Y] = -delta
    A[Y, X] = delta
    A[Y, Y] = -half_gamma
    A[Q, P] = params.omega_m
    A[P, Q] = -params.omega_m
    A[P, P] = -params.gamma_m

    if coupling_kind in (CouplingKind.DISPERSIVE, CouplingKind.MIXED):
        A[Y, Q] += steady.G_omega
        A[P, X] += steady.G_omega
    if coupling_kind in (CouplingKind.DISSIPATIVE, CouplingKind.MIXED):
        A[X, Q] += steady.G_gamma
        A[P, Y] += steady.G_gamma

    return DriftMatrix(entries=A, coupling_kind=coupling_kind, delta=delta)


def _entries(A: MatrixLike) -> np.ndarray:
    entries = A.entries if isinstance(A, DriftMatrix) else np.asarray(A, dtype=float)
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise ParameterError(f"square matrix required, got shape {entries.shape}")
    return entries


def characteristic_polynomial(A: MatrixLike) -> np.ndarray:
    """
    Coefficients of det(sI - A) in descending powers, by Faddeev-LeVerrier.

    The result is monic and its s^(n-1) coefficient is -trace(A).
    """
    entries = _entries(A)
    n = entries.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0

    identity = np.eye(n)
    M = np.zeros_like(entries)
    for k in range(1, n + 1):
        M = entries @ M + coeffs[k - 1] * identity
        coeffs[k] = -np.trace(entries @ M) / k
    return coeffs


def routh_array(coeffs: Sequence[float], epsilon: float = 1e-12) -> RouthArray:
    """
    Build the Routh array of a real polynomial.

    A vanishing pivot is replaced by epsilon times the coefficient scale; a vanishing row
    is replaced by the derivative of its auxiliary polynomial. Either case marks the
    array as marginal.
    """
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if coeffs.size < 2:
        raise ParameterError("polynomial of degree >= 1 required")
    if coeffs[0] < 0:
        coeffs = -coeffs

    degree = coeffs.size - 1
    width = degree // 2 + 1
    scale = float(np.max(np.abs(coeffs)))
    tolerance = epsilon * scale

    first = np.zeros(width)
    second = np.zeros(width)
    first[: len(coeffs[0::2])] = coeffs[0::2]
    second[: len(coeffs[1::2])] = coeffs[1::2]
    rows = [first, second]
    marginal = False

    for power in range(degree - 1, 0, -1):
        upper, lower = rows[-2], rows[-1]

        if np.all(np.abs(lower) <= tolerance):
            # Auxiliary polynomial of the row above, order power + 1 in s.
            orders = np.arange(power + 1, -1, -2)
            lower = np.zeros(width)
            derivative = upper[: len(orders)] * orders
            lower[: len(derivative)] = derivative
            rows[-1] = lower
            marginal = True

        if abs(lower[0]) <= tolerance:
            lower = lower.copy()
            lower[0] = tolerance if tolerance > 0 else epsilon
            rows[-1] = lower
            marginal = True

        nxt = np.zeros(width)
        for j in range(width - 1):
            nxt[j] = (lower[0] * upper[j + 1] - upper[0] * lower[j + 1]) / lower[0]
        rows.append(nxt)

    first_column = np.array([row[0] for row in rows])
    signs = np.sign(first_column)
    sign_changes = int(np.sum(signs[1:] != signs[:-1]))
    return RouthArray(
        rows=rows,
        first_column=first_column,
        marginal=marginal,
        sign_changes=sign_changes,
    )


def routh_hurwitz(coeffs: Sequence[float]) -> bool:
    """True iff every root has a negative real part; marginal tables are not stable."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs[0] < 0:
        coeffs = -coeffs
    if np.any(coeffs <= 0):
        return False

    table = routh_array(coeffs)
    if table.marginal:
        logger.debug(f"Marginal Routh array for coefficients {coeffs}")
        return False
    return bool(np.all(table.first_column > 0))


def polynomial_roots(
    coeffs: Sequence[float], max_iterations: int = 50
) -> np.ndarray:
    """
    Roots of a real polynomial: companion-matrix estimates polished by Newton steps.

    A root counts as converged once the residual is within the round-off bound of
    evaluating the polynomial there.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    derivative = np.polyder(coeffs)
    abs_coeffs = np.abs(coeffs)
    eps = np.finfo(float).eps

    roots = np.roots(coeffs).astype(complex)
    for index, root in enumerate(roots):
        for _ in range(max_iterations):
            value = np.polyval(coeffs, root)
            bound = 4.0 * coeffs.size * eps * np.polyval(abs_coeffs, abs(root))
            if abs(value) <= bound:
                break
            slope = np.polyval(derivative, root)
            if slope == 0:
                break
            step = value / slope
            root = root - step
            if abs(step) <= 4.0 * eps * max(1.0, abs(root)):
                break
        else:
            raise ConvergenceError(
                f"root refinement did not converge after {max_iterations} iterations "
                f"(residual {abs(np.polyval(coeffs, root)):.3g})"
            )
        roots[index] = root
    return roots


def eigenvalues(A: MatrixLike) -> np.ndarray:
    return polynomial_roots(characteristic_polynomial(A))


def eigen_oracle(A: MatrixLike) -> float:
    """Largest real part over the eigenvalues of A."""
    return float(np.max(eigenvalues(A).real))


def analyze_stability(A: MatrixLike, margin: Optional[float] = None) -> StabilityReport:
    """
    Run both stability channels on A.

    Points whose dominant real part lies within ``margin`` of zero are marginal and
    excluded from the agreement check.
    """
    entries = _entries(A)
    margin = settings.MARGINAL_MARGIN if margin is None else margin

    coeffs = characteristic_polynomial(entries)
    rh_stable = routh_hurwitz(coeffs)
    roots = polynomial_roots(coeffs)
    max_re = float(np.max(roots.real))

    marginal = abs(max_re) <= margin
    agree = marginal or (rh_stable == (max_re < 0))
    if not agree:
        logger.warning(
            f"Routh-Hurwitz says {'stable' if rh_stable else 'unstable'} "
            f"but max Re(eig) = {max_re:.3e}"
        )

    return StabilityReport(
        char_poly=coeffs,
        rh_stable=rh_stable,
        max_re_eig=max_re,
        method_agreement=agree,
        marginal=marginal,
        eigenvalues=roots,
        trace_residual=float(np.sum(roots).real - np.trace(entries)),
    )


def _coupling_for(steady: SteadyState, coupling_kind: CouplingKind) -> float:
    if coupling_kind is CouplingKind.DISPERSIVE:
        return steady.G_omega
    if coupling_kind is CouplingKind.DISSIPATIVE:
        return steady.G_gamma
    raise ParameterError("small-detuning thresholds exist for pure coupling kinds only")


def threshold_small_detuning(
    params: CavityParams,
    steady: SteadyState,
    coupling_kind: CouplingKind = CouplingKind.DISPERSIVE,
) -> DetuningThreshold:
    """
    Small-detuning instability threshold in its closed form

        D/w_m = (g/G)^2 (g/w_m) Q [1 + 4Q (w_m/g)^3 + 16 (w_m/g)^4],   Q = gamma_m/omega_m,

    with g = gamma. The dissipative threshold is the mirror image -D with G_gamma for G.
    """
    G = _coupling_for(steady, coupling_kind)
    if G == 0:
        return DetuningThreshold(coupling_kind=coupling_kind, value=None)

    gamma, omega_m = params.gamma, params.omega_m
    q = params.gamma_m / omega_m
    ratio = omega_m / gamma
    bracket = 1.0 + 4.0 * q * ratio**3 + 16.0 * ratio**4
    value = omega_m * (gamma / G) ** 2 * (gamma / omega_m) * q * bracket

    if coupling_kind is CouplingKind.DISSIPATIVE:
        value = -value
    return DetuningThreshold(coupling_kind=coupling_kind, value=value)


def threshold_linear_routh_hurwitz(
    params: CavityParams,
    steady: SteadyState,
    coupling_kind: CouplingKind = CouplingKind.DISPERSIVE,
) -> DetuningThreshold:
    """
    Exact threshold of the quartic Hurwitz condition a3(a1 a2 - a3) - a1^2 a4 > 0 kept to
    first order in the detuning.

    Only a4 is linear in the detuning, with slope +omega_m G^2 for dispersive coupling and
    -omega_m G^2 for dissipative coupling.
    """
    G = _coupling_for(steady, coupling_kind)
    if G == 0:
        return DetuningThreshold(coupling_kind=coupling_kind, value=None)

    resonant = drift_matrix(params, steady, coupling_kind, delta=0.0)
    _, a1, a2, a3, a4 = characteristic_polynomial(resonant)
    hurwitz = a3 * (a1 * a2 - a3) - a1**2 * a4
    slope = params.omega_m * G**2
    value = hurwitz / (a1**2 * slope)

    if coupling_kind is CouplingKind.DISSIPATIVE:
        value = -value
    return DetuningThreshold(coupling_kind=coupling_kind, value=value)


def _unstable(
    params: CavityParams, steady: SteadyState, coupling_kind: CouplingKind, delta: float
) -> bool:
    return eigen_oracle(drift_matrix(params, steady, coupling_kind, delta)) > 0


def _bisect_edge(
    params: CavityParams,
    steady: SteadyState,
    coupling_kind: CouplingKind,
    stable_delta: float,
    unstable_delta: float,
    rtol: float,
) -> float:
    """Shrink [stable_delta, unstable_delta] onto the stability boundary."""
    floor = rtol * params.omega_m * 1e-6
    while abs(unstable_delta - stable_delta) > rtol * max(
        abs(stable_delta), abs(unstable_delta), floor
    ):
        middle = 0.5 * (stable_delta + unstable_delta)
        if _unstable(params, steady, coupling_kind, middle):
            unstable_delta = middle
        else:
            stable_delta = middle
    return 0.5 * (stable_delta + unstable_delta)


def unstable_intervals(
    params: CavityParams,
    steady: SteadyState,
    coupling_kind: CouplingKind,
    points: List[SweepPoint],
    rtol: Optional[float] = None,
) -> List[UnstableInterval]:
    """Maximal runs of unstable points, with endpoints refined by bisection."""
    rtol = settings.BISECTION_RTOL if rtol is None else rtol
    runs: List[Tuple[int, int]] = []
    start = None
    for index, point in enumerate(points):
        unstable = point.max_re_eig > 0 and not point.marginal
        if unstable and start is None:
            start = index
        elif not unstable and start is not None:
            runs.append((start, index - 1))
            start = None
    if start is not None:
        runs.append((start, len(points) - 1))

    intervals = []
    for first, last in runs:
        clipped_low = first == 0
        clipped_high = last == len(points) - 1
        low = points[first].delta
        high = points[last].delta
        if not clipped_low:
            low = _bisect_edge(
                params, steady, coupling_kind, points[first - 1].delta, low, rtol
            )
        if not clipped_high:
            high = _bisect_edge(
                params, steady, coupling_kind, points[last + 1].delta, high, rtol
            )
        intervals.append(
            UnstableInterval(
                low=low, high=high, clipped_low=clipped_low, clipped_high=clipped_high
            )
        )
    return intervals


@timing_decorator
def sweep_detuning(
    params: CavityParams,
    steady: Optional[SteadyState],
    coupling_kind: CouplingKind,
    delta_range: Optional[Tuple[float, float]] = None,
    n_points: Optional[int] = None,
    deltas: Optional[np.ndarray] = None,
) -> DetuningSweep:
    """
    Stability verdicts from both channels over a detuning grid.

    The effective couplings of ``steady`` stay fixed across the sweep. Parameters are
    normalised to omega_m internally; detunings and real parts come back in the caller's
    units.
    """
    scale = params.omega_m
    steady = steady_state(params) if steady is None else steady
    unit_params = params.normalized()
    unit_steady = steady.rescaled(scale)

    if deltas is None:
        if delta_range is None:
            half_width = settings.SWEEP_HALF_WIDTH * scale
            delta_range = (-half_width, half_width)
        n_points = settings.SWEEP_POINTS if n_points is None else n_points
        if n_points < 2:
            raise ParameterError(f"n_points >= 2 required, got {n_points}")
        deltas = np.linspace(delta_range[0], delta_range[1], n_points)
    unit_deltas = np.asarray(deltas, dtype=float) / scale

    margin = settings.MARGINAL_MARGIN
    points = []
    for delta in unit_deltas:
        report = analyze_stability(
            drift_matrix(unit_params, unit_steady, coupling_kind, float(delta)),
            margin=margin,
        )
        points.append(
            SweepPoint(
                delta=float(delta),
                rh_stable=report.rh_stable,
                max_re_eig=report.max_re_eig,
                marginal=report.marginal,
                methods_agree=report.method_agreement,
            )
        )

    intervals = unstable_intervals(unit_params, unit_steady, coupling_kind, points)
    disagreements = sum(1 for p in points if not p.methods_agree)
    if disagreements:
        logger.warning(f"{disagreements} sweep points with method disagreement")
    logger.info(
        f"{coupling_kind.value} sweep over {len(points)} detunings: "
        f"{len(intervals)} unstable interval(s)"
    )

    return DetuningSweep(
        coupling_kind=coupling_kind,
        points=[
            SweepPoint(
                delta=p.delta * scale,
                rh_stable=p.rh_stable,
                max_re_eig=p.max_re_eig * scale,
                marginal=p.marginal,
                methods_agree=p.methods_agree,
            )
            for p in points
        ],
        intervals=[
            UnstableInterval(
                low=i.low * scale,
                high=i.high * scale,
                clipped_low=i.clipped_low,
                clipped_high=i.clipped_high,
            )
            for i in intervals
        ],
    )


def instability_onset(sweep: DetuningSweep, side: int = 1) -> Optional[float]:
    """Detuning closest to zero where instability sets in on the given side of resonance."""
    if side > 0:
        edges = [max(i.low, 0.0) for i in sweep.intervals if i.high > 0]
    else:
        edges = [min(i.high, 0.0) for i in sweep.intervals if i.low < 0]
    if not edges:
        return None
    return min(edges, key=abs)
