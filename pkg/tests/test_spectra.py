import math
from fractions import Fraction

import numpy as np
import pytest

from models.schema import CavityParams, CouplingKind, SpectrumMethod, SteadyState
from physics.model import cavity_filter, exact_beta, reflection_phase, susceptibility
from physics.spectra import (
    backaction_reduction_factor,
    closed_form_minimum,
    cooperativity,
    cooperativity_from_transfer,
    default_frequency_grid,
    input_correlator,
    lorentzian_sm,
    near_resonance_sm,
    optimal_squeeze,
    output_covariance,
    s_limit,
    squeeze_spectrum,
    szz,
    transfer_dispersive_badcavity,
    transfer_dissipative_badcavity,
    transfer_general,
)
from utils.errors import ParameterError, SingularSystemError

DISPERSIVE = CouplingKind.DISPERSIVE
DISSIPATIVE = CouplingKind.DISSIPATIVE


def steady(G_omega=0.0, G_gamma=0.0):
    return SteadyState(a0=1.0 + 0j, G_omega=G_omega, G_gamma=G_gamma)


def pair(builder, omega, *args):
    return builder(omega, *args), builder(-omega, *args)


def exact_chi(omega, omega_m, gamma_m):
    """chi as (real, imag) Fractions."""
    a = omega_m**2 - omega**2
    b = -gamma_m * omega
    norm = a**2 + b**2
    return omega_m * a / norm, -omega_m * b / norm


def exact_product(x, y):
    return x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0]


class TestInputCorrelator:
    def test_structure(self):
        N = input_correlator(2.0).matrix
        np.testing.assert_array_equal(N, N.conj().T)
        np.testing.assert_allclose(np.linalg.eigvalsh(N[:2, :2]), [0.0, 2.0], atol=1e-15)
        assert N[2, 2] == 2.5
        assert N[0, 1] == 1j
        assert input_correlator(2.0).n_th == pytest.approx(2.0)

    def test_symmetric_part_is_real_diagonal(self):
        np.testing.assert_array_equal(input_correlator(0.0).symmetric, np.diag([1, 1, 0.5]))

    def test_rejects_negative_occupancy(self):
        with pytest.raises(ParameterError):
            input_correlator(-1.0)


class TestBadCavityTransfers:
    def test_dispersive_rows(self, bad_cavity_params):
        T = transfer_dispersive_badcavity(1.3, steady(G_omega=0.5), bad_cavity_params).matrix
        np.testing.assert_array_equal(T[0], [1, 0, 0])
        assert T[1, 1] == 1

    def test_dispersive_resonant_backaction_entry(self, bad_cavity_params):
        G = 0.5
        T = transfer_dispersive_badcavity(1.0, steady(G_omega=G), bad_cavity_params).matrix
        expected = 4j * G**2 / (bad_cavity_params.gamma * bad_cavity_params.gamma_m)
        assert T[1, 0] == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        "builder", [transfer_dispersive_badcavity, transfer_dissipative_badcavity]
    )
    def test_zero_coupling_is_identity(self, bad_cavity_params, builder):
        T = builder(0.9, steady(), bad_cavity_params).matrix
        np.testing.assert_array_equal(T, [[1, 0, 0], [0, 1, 0]])

    def test_dispersive_matches_exact_arithmetic(self):
        gamma, omega_m, gamma_m = Fraction(100), Fraction(1), Fraction(1, 1000)
        G, omega = Fraction(1, 2), Fraction(101, 100)
        params = CavityParams(gamma=100.0, gamma_m=1e-3, omega_m=1.0)
        T = transfer_dispersive_badcavity(1.01, steady(G_omega=0.5), params).matrix

        chi = exact_chi(omega, omega_m, gamma_m)
        backaction = tuple(4 * G**2 / gamma * part for part in chi)
        readout = tuple(4 * G / 10 * part for part in chi)  # sqrt(gamma) = 10

        assert T[1, 0] == pytest.approx(complex(*map(float, backaction)), rel=1e-13)
        assert T[1, 2] / math.sqrt(1e-3) == pytest.approx(
            complex(*map(float, readout)), rel=1e-13
        )
        np.testing.assert_array_equal(T[0], [1, 0, 0])
        assert T[1, 1] == 1

    def test_dissipative_rows(self, bad_cavity_params):
        T = transfer_dissipative_badcavity(1.3, steady(G_gamma=0.5), bad_cavity_params).matrix
        np.testing.assert_array_equal(T[1], [0, 1, 0])
        assert T[0, 0] == 1

    def test_dissipative_matches_exact_arithmetic(self):
        gamma, omega_m, gamma_m = Fraction(100), Fraction(1), Fraction(1, 1000)
        G, omega = Fraction(1, 2), Fraction(101, 100)
        params = CavityParams(gamma=100.0, gamma_m=1e-3, omega_m=1.0)
        T = transfer_dissipative_badcavity(1.01, steady(G_gamma=0.5), params).matrix

        chi = exact_chi(omega, omega_m, gamma_m)
        b = (Fraction(0), 2 * omega / gamma)
        b_squared = exact_product(b, b)
        vacuum = exact_product(tuple(4 * G**2 / gamma * part for part in b_squared), chi)
        readout = exact_product(tuple(4 * G / 10 * part for part in b), chi)

        assert T[0, 1] == pytest.approx(complex(*map(float, vacuum)), rel=1e-13)
        assert T[0, 2] / math.sqrt(1e-3) == pytest.approx(
            complex(*map(float, readout)), rel=1e-13
        )

    def test_dissipative_backaction_and_readout_vanish_at_zero_frequency(self, bad_cavity_params):
        T = transfer_dissipative_badcavity(1e-9, steady(G_gamma=0.5), bad_cavity_params).matrix
        np.testing.assert_allclose(T[0], [1, 0, 0], atol=1e-9)

    @pytest.mark.parametrize(
        "builder", [transfer_dispersive_badcavity, transfer_dissipative_badcavity]
    )
    def test_rejects_detuning(self, builder):
        params = CavityParams(gamma=100.0, gamma_m=1e-3, omega_m=1.0, delta=0.1)
        with pytest.raises(ParameterError, match="delta = 0"):
            builder(1.0, steady(0.5, 0.5), params)


class TestGeneralTransfer:
    @pytest.mark.parametrize("kind", list(CouplingKind))
    def test_zero_coupling_reflects_the_input(self, bad_cavity_params, kind):
        for omega in (0.0, 0.7, 1.0, 3.0):
            T = transfer_general(omega, steady(), bad_cavity_params, kind).matrix
            r = reflection_phase(omega, bad_cavity_params.gamma)
            np.testing.assert_allclose(T, [[r, 0, 0], [0, r, 0]], atol=1e-14)
        T0 = transfer_general(0.0, steady(), bad_cavity_params, DISPERSIVE).matrix
        np.testing.assert_allclose(T0, [[1, 0, 0], [0, 1, 0]], atol=1e-14)

    def test_dispersive_is_the_filtered_closed_form(self):
        params = CavityParams(gamma=3.0, gamma_m=0.01, omega_m=1.0)
        G = 0.4
        for omega in (0.3, 1.0, 1.7):
            T = transfer_general(omega, steady(G_omega=G), params, DISPERSIVE).matrix
            f = cavity_filter(omega, params.gamma)
            r = reflection_phase(omega, params.gamma)
            chi = susceptibility(omega, params).value
            readout = 4 * G * f / math.sqrt(params.gamma) * chi
            expected = [
                [r, 0, 0],
                [readout * G * f / math.sqrt(params.gamma), r, readout * math.sqrt(params.gamma_m)],
            ]
            np.testing.assert_allclose(T, expected, rtol=1e-12, atol=1e-14)

    def test_dissipative_is_the_exact_beta_closed_form(self):
        params = CavityParams(gamma=3.0, gamma_m=0.01, omega_m=1.0)
        G = 0.4
        for omega in (0.3, 1.0, 1.7):
            T = transfer_general(omega, steady(G_gamma=G), params, DISSIPATIVE).matrix
            b = exact_beta(omega, params.gamma)
            r = reflection_phase(omega, params.gamma)
            chi = susceptibility(omega, params).value
            readout = 4 * G * b / math.sqrt(params.gamma) * chi
            expected = [
                [r, readout * G * b / math.sqrt(params.gamma), readout * math.sqrt(params.gamma_m)],
                [0, r, 0],
            ]
            np.testing.assert_allclose(T, expected, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize(
        "kind, builder, couplings",
        [
            (DISPERSIVE, transfer_dispersive_badcavity, dict(G_omega=3.0)),
            (DISSIPATIVE, transfer_dissipative_badcavity, dict(G_gamma=300.0)),
        ],
    )
    def test_converges_to_bad_cavity_form(self, kind, builder, couplings):
        params = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0)
        for omega in np.linspace(0.95, 1.05, 11):
            general = transfer_general(omega, steady(**couplings), params, kind).matrix
            closed = builder(omega, steady(**couplings), params).matrix
            mask = closed != 0
            np.testing.assert_allclose(general[mask], closed[mask], rtol=1e-2)
            assert np.all(np.abs(general[~mask]) < 1e-2 * np.max(np.abs(closed)))

    @pytest.mark.parametrize(
        "kind, builder",
        [(DISPERSIVE, transfer_dispersive_badcavity), (DISSIPATIVE, transfer_dissipative_badcavity)],
    )
    def test_deviation_shrinks_with_linewidth(self, kind, builder):
        deviations = []
        for gamma in (1e2, 1e3, 1e4):
            params = CavityParams(gamma=gamma, gamma_m=1e-2, omega_m=1.0)
            s = steady(G_omega=0.1 * math.sqrt(gamma), G_gamma=0.1 * math.sqrt(gamma))
            worst = 0.0
            for omega in np.linspace(0.5, 2.0, 31):
                general = transfer_general(omega, s, params, kind).matrix
                closed = builder(omega, s, params).matrix
                worst = max(worst, np.max(np.abs(general - closed)) / np.max(np.abs(closed)))
            deviations.append(worst)
            assert worst < 10 * params.omega_m / gamma
        assert deviations[0] > deviations[1] > deviations[2]

    def test_flags_unvalidated_regimes(self, bad_cavity_params):
        detuned = bad_cavity_params.with_changes(delta=0.1)
        assert not transfer_general(1.0, steady(0.1), detuned, DISPERSIVE).validated
        assert not transfer_general(1.0, steady(0.1, 0.1), bad_cavity_params, CouplingKind.MIXED).validated
        assert transfer_general(1.0, steady(0.1), bad_cavity_params, DISPERSIVE).validated

    def test_singular_system_raises(self):
        undamped = CavityParams.model_construct(
            gamma=1.0, gamma_m=0.0, omega_m=1.0, delta=0.0, g_omega=0.0, g_gamma=0.0,
            drive_amplitude=0.0, n_th=0.0,
        )
        with pytest.raises(SingularSystemError, match="singular"):
            transfer_general(1.0, steady(), undamped, DISPERSIVE)


class TestSpectralDensity:
    def test_shot_noise_floor(self, bad_cavity_params):
        correlator = input_correlator(3.0)
        for kind in CouplingKind:
            for omega in (0.2, 1.0, 1.9):
                t_pos, t_neg = pair(transfer_general, omega, steady(), bad_cavity_params, kind)
                for theta in np.linspace(0, math.pi, 7):
                    assert szz(theta, t_pos, t_neg, correlator) == pytest.approx(1.0, abs=1e-12)

    def test_reference_quadratures_are_shot_noise_limited(self, bad_cavity_params):
        correlator = input_correlator(5.0)
        for omega in np.linspace(0.5, 2.0, 61):
            dispersive = pair(transfer_dispersive_badcavity, omega, steady(G_omega=0.7), bad_cavity_params)
            dissipative = pair(transfer_dissipative_badcavity, omega, steady(G_gamma=0.7), bad_cavity_params)
            assert szz(0.0, *dispersive, correlator) == pytest.approx(1.0, abs=1e-10)
            assert szz(math.pi / 2, *dissipative, correlator) == pytest.approx(1.0, abs=1e-10)

    def test_phase_quadrature_on_resonance(self, bad_cavity_params):
        G, n_th = 0.05, 1.5
        p = bad_cavity_params
        n_ba = G**2 / (p.gamma_m * p.gamma)
        expected = 1 + 16 * n_ba * (n_th + n_ba + 0.5)
        correlator = input_correlator(n_th)

        closed = pair(transfer_dispersive_badcavity, 1.0, steady(G_omega=G), p)
        assert szz(math.pi / 2, *closed, correlator) == pytest.approx(expected, rel=1e-12)

        wide = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0)
        G_wide = math.sqrt(n_ba * wide.gamma_m * wide.gamma)
        general = pair(transfer_general, 1.0, steady(G_omega=G_wide), wide, DISPERSIVE)
        assert szz(math.pi / 2, *general, correlator) == pytest.approx(expected, rel=1e-2)

    def test_symmetrized_covariance_is_frequency_even(self, bad_cavity_params):
        correlator = input_correlator(0.5)
        for kind in (DISPERSIVE, DISSIPATIVE):
            t_pos, t_neg = pair(transfer_general, 1.01, steady(0.3, 0.3), bad_cavity_params, kind)
            np.testing.assert_allclose(
                output_covariance(t_pos, t_neg, correlator),
                output_covariance(t_neg, t_pos, correlator),
                rtol=1e-12,
            )

    def test_raw_spectrum_differs_from_symmetrized(self, bad_cavity_params):
        correlator = input_correlator(0.0)
        t_pos, t_neg = pair(transfer_general, 1.01, steady(G_omega=0.5), bad_cavity_params, DISPERSIVE)
        raw = output_covariance(t_pos, t_neg, correlator, symmetrize=False)
        even = output_covariance(t_pos, t_neg, correlator)
        assert not np.allclose(raw, even)

    def test_rejects_inconsistent_pair(self, bad_cavity_params):
        t_pos = transfer_general(1.0, steady(), bad_cavity_params, DISPERSIVE)
        t_other = transfer_general(-1.1, steady(), bad_cavity_params, DISPERSIVE)
        with pytest.raises(ParameterError):
            szz(0.0, t_pos, t_other, input_correlator(0.0))


class TestOptimalSqueeze:
    def test_no_squeezing_on_resonance(self, bad_cavity_params):
        t_pos, t_neg = pair(transfer_dispersive_badcavity, 1.0, steady(G_omega=0.3), bad_cavity_params)
        result = optimal_squeeze(t_pos, t_neg, input_correlator(0.0))
        assert result.s_min == pytest.approx(1.0, abs=1e-12)
        assert result.n == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize(
        "builder, coupling",
        [(transfer_dispersive_badcavity, dict(G_omega=0.4)), (transfer_dissipative_badcavity, dict(G_gamma=40.0))],
    )
    def test_eigenvalue_and_closed_form_agree(self, bad_cavity_params, builder, coupling):
        correlator = input_correlator(0.7)
        for omega in np.linspace(0.5, 2.0, 151):
            result = optimal_squeeze(*pair(builder, omega, steady(**coupling), bad_cavity_params), correlator)
            assert result.methods_agree
            assert result.s_min == pytest.approx(result.s_min_closed_form, rel=1e-10)
            assert result.s_min <= 1.0 + 1e-12
            assert result.s_min > 0

    def test_minimum_lies_below_every_angle(self, bad_cavity_params):
        correlator = input_correlator(0.2)
        t_pos, t_neg = pair(transfer_general, 1.002, steady(G_omega=0.5), bad_cavity_params, DISPERSIVE)
        result = optimal_squeeze(t_pos, t_neg, correlator)
        angles = np.linspace(0, math.pi, 721)
        values = [szz(theta, t_pos, t_neg, correlator) for theta in angles]
        assert result.s_min <= min(values) + 1e-12
        assert szz(result.theta_opt, t_pos, t_neg, correlator) == pytest.approx(result.s_min, rel=1e-9)
        assert 0.0 <= result.theta_opt < math.pi

    def test_swap_between_coupling_kinds(self, bad_cavity_params):
        p = bad_cavity_params
        correlator = input_correlator(1.0)
        g = 0.3
        for omega in (0.9, 0.999, 1.004, 1.3):
            dispersive = optimal_squeeze(
                *pair(transfer_dispersive_badcavity, omega, steady(G_omega=g), p), correlator
            )
            G_gamma = g * p.gamma / (2 * omega)
            dissipative = optimal_squeeze(
                *pair(transfer_dissipative_badcavity, omega, steady(G_gamma=G_gamma), p), correlator
            )
            assert dissipative.s_min == pytest.approx(dispersive.s_min, rel=1e-10)
            shift = (dispersive.theta_opt - dissipative.theta_opt) % math.pi
            assert shift == pytest.approx(math.pi / 2, abs=1e-8)

    def test_uncertainty_bound(self):
        for gamma, G, n_th in [(1e3, 2.0, 0.0), (10.0, 0.5, 3.0), (2.0, 0.3, 0.0)]:
            params = CavityParams(gamma=gamma, gamma_m=1e-2, omega_m=1.0)
            correlator = input_correlator(n_th)
            for kind in (DISPERSIVE, DISSIPATIVE):
                for omega in np.linspace(0.5, 2.0, 41):
                    result = optimal_squeeze(
                        *pair(transfer_general, omega, steady(G, G), params, kind), correlator
                    )
                    assert result.s_min * result.s_max >= 1.0 - 1e-9

    def test_closed_form_minimum(self):
        assert closed_form_minimum(0.0, 0.0) == 1.0
        assert closed_form_minimum(3.0, 4.0) == pytest.approx(1 - 8 / 8)
        assert closed_form_minimum(-3.0, 4.0, base=5.0) == pytest.approx(5 + (-3 - 5) / 2)


class TestLimits:
    @pytest.mark.parametrize(
        "n_ba, n_th, expected", [(0.0, 0.0, 1.0), (0.5, 0.0, 0.5), (2.0, 0.0, 0.2), (200.0, 49.5, 0.2)]
    )
    def test_s_limit(self, n_ba, n_th, expected):
        assert s_limit(n_ba, n_th) == pytest.approx(expected)

    def test_s_limit_vanishes_for_strong_backaction(self):
        assert s_limit(1e12, 0.0) < 1e-12

    def test_s_limit_rejects_negative_cooperativity(self):
        with pytest.raises(ParameterError):
            s_limit(-1.0, 0.0)

    def test_lorentzian(self):
        gamma_m = 1e-3
        assert lorentzian_sm(0.0, 2.0, 0.0, gamma_m) == pytest.approx(1.0)
        assert lorentzian_sm(gamma_m / 2, 2.0, 0.0, gamma_m) == pytest.approx(0.6)
        assert lorentzian_sm(1e6 * gamma_m, 2.0, 0.0, gamma_m) == pytest.approx(0.2, rel=1e-9)

    def test_near_resonance_form(self):
        params = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0)
        assert near_resonance_sm(1.0, params, 2.0) == pytest.approx(1.0)
        deltas = np.array([-5e-3, -1e-4, 2e-4, 4e-3])
        np.testing.assert_allclose(
            near_resonance_sm(1.0 + deltas, params, 2.0),
            lorentzian_sm(deltas, 2.0, 0.0, params.gamma_m),
            rtol=1e-2,
        )


def plateau_params(n_ba, n_th, gamma=1e3, gamma_m=1e-4):
    params = CavityParams(gamma=gamma, gamma_m=gamma_m, omega_m=1.0, n_th=n_th)
    return params, steady(G_omega=math.sqrt(n_ba * gamma_m * gamma))


class TestSqueezingPlateau:
    def test_far_detuned_plateau(self):
        params, s = plateau_params(n_ba=200.0, n_th=49.5)
        x = np.linspace(20, 60, 41)  # 2 |delta| / gamma_m
        grid = np.concatenate([1 - x * params.gamma_m / 2, 1 + x * params.gamma_m / 2])
        spectrum = squeeze_spectrum(params, DISPERSIVE, grid=grid, steady=s)
        np.testing.assert_allclose(spectrum.s_min, 0.2, atol=5e-3)

    def test_lorentzian_profile_near_resonance(self):
        params, s = plateau_params(n_ba=200.0, n_th=49.5)
        deltas = np.linspace(-10, 10, 81) * params.gamma_m
        spectrum = squeeze_spectrum(params, DISPERSIVE, grid=1 + deltas, steady=s)
        expected = lorentzian_sm(deltas, 200.0, 49.5, params.gamma_m)
        np.testing.assert_allclose(spectrum.s_min, expected, rtol=0.02)

    def test_weak_backaction_follows_lorentzian_inside_linewidth(self):
        params, s = plateau_params(n_ba=2.0, n_th=0.0)
        deltas = np.linspace(-0.5, 0.5, 21) * params.gamma_m
        spectrum = squeeze_spectrum(params, DISPERSIVE, grid=1 + deltas, steady=s)
        expected = lorentzian_sm(deltas, 2.0, 0.0, params.gamma_m)
        np.testing.assert_allclose(spectrum.s_min, expected, rtol=0.02)
        assert s_limit(spectrum.n_ba_like, 0.0) == pytest.approx(0.2, rel=1e-4)


class TestCooperativity:
    def test_dispersive(self):
        params = CavityParams(gamma=1.0, gamma_m=1.0, omega_m=2.0)
        assert cooperativity(params, steady(G_omega=1.0), DISPERSIVE) == pytest.approx(1.0)

    def test_dissipative_at_half_linewidth(self):
        params = CavityParams(gamma=2.0, gamma_m=0.1, omega_m=1.0)
        value = cooperativity(params, steady(G_gamma=0.4), DISSIPATIVE, omega=1.0)
        assert value == pytest.approx(0.4**2 / (0.1 * 2.0))

    def test_dissipative_vanishes_at_low_frequency(self, bad_cavity_params):
        assert cooperativity(bad_cavity_params, steady(G_gamma=1.0), DISSIPATIVE, omega=1e-12) < 1e-20

    def test_requires_frequency_and_pure_kind(self, bad_cavity_params):
        with pytest.raises(ParameterError):
            cooperativity(bad_cavity_params, steady(G_gamma=1.0), DISSIPATIVE)
        with pytest.raises(ParameterError):
            cooperativity(bad_cavity_params, steady(1.0, 1.0), CouplingKind.MIXED, omega=1.0)

    def test_general_solver_reproduces_dispersive_cooperativity(self):
        params = CavityParams(gamma=1e4, gamma_m=1e-3, omega_m=1.0)
        s = steady(G_omega=2.0)
        t = transfer_general(1.0, s, params, DISPERSIVE)
        assert cooperativity_from_transfer(t, params) == pytest.approx(
            cooperativity(params, s, DISPERSIVE), rel=1e-6
        )

    def test_dissipative_cooperativity_scales_quadratically(self):
        params = CavityParams(gamma=1.0, gamma_m=1e-6, omega_m=1e-3)
        s = steady(G_gamma=1e-3)
        ratios = np.array([1e-2, 1e-3, 1e-4])  # omega / gamma
        n_ba1 = [
            cooperativity_from_transfer(transfer_general(r, s, params, DISSIPATIVE), params)
            for r in ratios
        ]
        slope = np.polyfit(np.log(ratios), np.log(n_ba1), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.05)
        for r, value in zip(ratios, n_ba1):
            assert value == pytest.approx(cooperativity(params, s, DISSIPATIVE, omega=r), rel=1e-3)

    def test_requires_general_transfer(self, bad_cavity_params):
        t = transfer_dispersive_badcavity(1.0, steady(G_omega=0.1), bad_cavity_params)
        with pytest.raises(ParameterError):
            cooperativity_from_transfer(t, bad_cavity_params)


class TestBackactionReduction:
    def test_tends_to_zero_at_low_frequency(self, bad_cavity_params):
        assert backaction_reduction_factor(1e-9, bad_cavity_params) < 1e-10

    def test_unity_at_half_linewidth(self):
        params = CavityParams(gamma=2.0, gamma_m=1e-3, omega_m=1.0)
        assert backaction_reduction_factor(1.0, params) == pytest.approx(1.0, rel=1e-12)

    def test_bad_cavity_suppression(self):
        params = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0)
        assert backaction_reduction_factor(1.0, params) == pytest.approx(2e-3, rel=0.01)

    def test_requires_resonant_drive(self):
        params = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0, delta=0.1)
        with pytest.raises(ParameterError):
            backaction_reduction_factor(1.0, params)


class TestSqueezeSpectrum:
    def test_default_grid(self):
        params = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0)
        grid = default_frequency_grid(params)
        assert np.all(np.diff(grid) > 0)
        assert np.all(grid > 0)
        assert 1.0 in grid
        dense = grid[np.abs(grid - 1.0) <= 50 * params.gamma_m * (1 + 1e-12)]
        assert dense.size >= 501
        assert grid[0] == pytest.approx(0.5)
        assert grid[-1] == pytest.approx(2.0)

    def test_default_grid_stays_positive_for_broad_mechanics(self):
        params = CavityParams(gamma=1.0, gamma_m=0.5, omega_m=1.0)
        assert np.all(default_frequency_grid(params) > 0)

    def test_zero_coupling_spectrum_is_flat(self):
        params = CavityParams(gamma=1e3, gamma_m=1e-3, omega_m=1.0, n_th=10.0)
        spectrum = squeeze_spectrum(params, DISPERSIVE)
        np.testing.assert_allclose(spectrum.s_min, 1.0, atol=1e-12)
        np.testing.assert_allclose(spectrum.s_zz, 1.0, atol=1e-12)
        np.testing.assert_allclose(spectrum.s_limit, 1.0, atol=1e-12)

    @pytest.mark.parametrize("kind", [DISPERSIVE, DISSIPATIVE])
    def test_spectrum_invariants(self, kind):
        params = CavityParams(gamma=50.0, gamma_m=1e-2, omega_m=1.0, n_th=0.3)
        s = steady(G_omega=0.8, G_gamma=8.0)
        grid = np.linspace(0.6, 1.6, 101)
        spectrum = squeeze_spectrum(params, kind, grid=grid, steady=s)
        assert spectrum.validated
        for row in spectrum.s_zz:
            assert np.all(spectrum.s_min <= row + 1e-12)
        assert np.all(spectrum.s_min > 0)
        assert np.all(spectrum.s_min <= 1 + 1e-12)

        mirrored = squeeze_spectrum(params, kind, grid=-grid, steady=s)
        np.testing.assert_allclose(mirrored.s_min, spectrum.s_min, rtol=1e-10)

    def test_bad_cavity_method_and_tabulated_angles(self, bad_cavity_params):
        s = steady(G_omega=0.4)
        spectrum = squeeze_spectrum(
            bad_cavity_params, DISPERSIVE, grid=[0.9, 1.1], method=SpectrumMethod.BADCAVITY, steady=s
        )
        np.testing.assert_allclose(spectrum.s_zz_at(0.0), 1.0, atol=1e-12)
        assert spectrum.method is SpectrumMethod.BADCAVITY
        np.testing.assert_allclose(spectrum.n_ba_like, cooperativity(bad_cavity_params, s, DISPERSIVE))
        with pytest.raises(KeyError):
            spectrum.s_zz_at(0.3)

    def test_unvalidated_regimes_are_flagged(self, bad_cavity_params):
        detuned = bad_cavity_params.with_changes(delta=0.01)
        assert not squeeze_spectrum(detuned, DISPERSIVE, grid=[1.0], steady=steady(0.1)).validated
        mixed = squeeze_spectrum(bad_cavity_params, CouplingKind.MIXED, grid=[1.0], steady=steady(0.1, 0.1))
        assert not mixed.validated

    def test_mixed_has_no_bad_cavity_form(self, bad_cavity_params):
        with pytest.raises(ParameterError):
            squeeze_spectrum(
                bad_cavity_params, CouplingKind.MIXED, grid=[1.0], method=SpectrumMethod.BADCAVITY
            )
