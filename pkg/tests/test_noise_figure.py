import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference_forms as ref
from factories import random_signature, random_symplectic
from fopa_noise.analysis.moments import moments_general, moments_pia
from fopa_noise.analysis.noise_figure import (
    PhaseConfig,
    Regime,
    from_db,
    gain_pia,
    gain_psa,
    gain_psa_general,
    make_entry,
    nf_from_moments,
    nf_pia,
    nf_psa_general,
    nf_psa_two_injected,
    noise_report,
    pia_noise_contributions,
    psa_gain_extrema,
    reduce_angle,
    relative_phase,
    signal_phase_for_theta,
    to_db,
)
from fopa_noise.core.mode_algebra import InputState, LadderSignature, TransferMatrix
from fopa_noise.core.models import build_four_mode, build_two_mode
from fopa_noise.errors import ModeIndexError, UndefinedNoiseFigureError

THETA0 = PhaseConfig(theta=0.0)


def test_db_helpers():
    assert to_db(2.0) == pytest.approx(3.0103, abs=1e-4)
    assert from_db(to_db(7.5)) == pytest.approx(7.5)
    assert reduce_angle(3 * math.pi) == pytest.approx(math.pi)
    assert reduce_angle(-math.pi) == pytest.approx(math.pi)
    assert reduce_angle(-0.5) == -0.5


def test_make_entry_zero_gain():
    entry = make_entry(2, 0.0, None, Regime.PSA, theta=2 * math.pi)
    assert entry.gain_db is None
    assert not entry.nf_defined
    assert entry.theta == pytest.approx(0.0, abs=1e-15)


def test_phase_config_needs_something():
    with pytest.raises(ValueError):
        PhaseConfig()


class TestPia:
    @pytest.mark.parametrize("xi", [0.5, 2.0, 8.0])
    def test_two_mode_well_known_limit(self, xi):
        m = build_two_mode(xi)
        g = gain_pia(m, 1)
        assert nf_pia(m, 1) == pytest.approx(2 - 1 / g, rel=1e-12)

    def test_two_mode_xi_two_is_three_db(self):
        assert to_db(nf_pia(build_two_mode(2.0), 1)) == pytest.approx(3.01, abs=0.02)

    def test_three_mode_hand_form(self, toy_matrix):
        assert nf_pia(toy_matrix, 1) == pytest.approx(ref.three_mode_nf_pia(toy_matrix.mu), rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.01, 20.0), st.integers(1, 4))
    def test_never_below_one(self, xi, j):
        assert nf_pia(build_four_mode(xi), j) >= 1.0 - 1e-12

    def test_four_mode_limits(self):
        m = build_four_mode(50.0)
        assert to_db(nf_pia(m, 1)) == pytest.approx(10.0, abs=0.01)
        assert to_db(nf_pia(m, 2)) == pytest.approx(10 * math.log10(2.5), abs=0.01)
        assert to_db(nf_pia(m, 3)) == pytest.approx(10 * math.log10(2.5), abs=0.01)
        assert to_db(nf_pia(m, 4)) == pytest.approx(10.0, abs=0.01)

    def test_contributions_sum_to_excess_noise(self):
        m = build_four_mode(1.0)
        parts = pia_noise_contributions(m, 1)
        assert sorted(parts) == [2, 3, 4]
        assert 1 + sum(parts.values()) == pytest.approx(nf_pia(m, 1))
        assert parts[2] == pytest.approx(4 / 2)

    def test_zero_coupling_is_undefined(self):
        m = TransferMatrix.identity(LadderSignature.parse("ac"))
        with pytest.raises(UndefinedNoiseFigureError):
            nf_pia(m, 2)

    def test_mode_out_of_range(self):
        with pytest.raises(ModeIndexError):
            gain_pia(build_two_mode(1.0), 3)

    def test_large_signal_matches_definition(self, rng):
        # NF from moments tends to the closed form once fluorescence is negligible
        for n in (2, 3, 4):
            m = random_symplectic(rng, random_signature(rng, n))
            photons = 1e12
            report = moments_pia(m, math.sqrt(photons))
            exact = nf_from_moments(photons, photons, report, 1)
            assert exact.nf_linear == pytest.approx(nf_pia(m, 1), rel=1e-5)


class TestPsaTwoInjected:
    @pytest.mark.parametrize("theta", np.linspace(-math.pi, math.pi, 9))
    def test_two_mode_hand_form(self, theta):
        m = build_two_mode(1.0)
        phases = PhaseConfig(theta=theta)
        assert nf_psa_two_injected(m, 1, phases) == pytest.approx(ref.two_mode_nf_psa(m.mu, theta), rel=1e-10)

    def test_two_mode_minus_three_db(self):
        nf = nf_psa_two_injected(build_two_mode(2.0), 1, THETA0)
        assert to_db(nf) == pytest.approx(-3.01, abs=0.02)

    @pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
    def test_nf_times_gain_identity(self, xi):
        m = build_two_mode(xi)
        for theta in np.linspace(-3.0, 3.0, 13):
            phases = PhaseConfig(theta=theta)
            product = nf_psa_two_injected(m, 1, phases) * gain_psa(m, 1, phases)
            assert product == pytest.approx(2 * gain_pia(m, 1) - 1, rel=1e-10)

    @pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
    def test_gain_reciprocity(self, xi):
        m = build_two_mode(xi)
        product = gain_psa(m, 1, THETA0) * gain_psa(m, 1, PhaseConfig(theta=math.pi))
        assert product == pytest.approx(1.0, abs=1e-9)

    def test_three_mode_hand_form(self, toy_matrix):
        for theta in (-2.0, 0.0, 0.7):
            nf = nf_psa_two_injected(toy_matrix, 1, PhaseConfig(theta=theta))
            assert nf == pytest.approx(ref.three_mode_nf_psa(toy_matrix.mu, theta), rel=1e-10)

    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_four_mode_hand_form(self, j):
        m = build_four_mode(0.9)
        for theta in (-1.0, 0.3, 2.5):
            nf = nf_psa_two_injected(m, j, PhaseConfig(theta=theta))
            assert nf == pytest.approx(ref.four_mode_nf_psa(m.mu, j, theta), rel=1e-10)

    def test_four_mode_limit(self):
        m = build_four_mode(50.0)
        nf_db = to_db(nf_psa_two_injected(m, 1, THETA0))
        assert nf_db == pytest.approx(10 * math.log10(90 / 81), abs=0.01)
        two_mode_db = to_db(nf_psa_two_injected(build_two_mode(50.0), 1, THETA0))
        assert nf_db - two_mode_db == pytest.approx(3.47, abs=0.05)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 5.0), st.floats(-math.pi, math.pi))
    def test_two_pi_periodic(self, xi, theta):
        m = build_four_mode(xi)
        a = PhaseConfig(theta=theta)
        b = PhaseConfig(theta=theta + 2 * math.pi)
        assert gain_psa(m, 1, b) == pytest.approx(gain_psa(m, 1, a), rel=1e-9, abs=1e-12)
        assert nf_psa_two_injected(m, 1, b) == pytest.approx(nf_psa_two_injected(m, 1, a), rel=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 5.0), st.floats(-math.pi, math.pi))
    def test_two_mode_bounded_by_half(self, xi, theta):
        # NF * G_PSA = 2 G_PIA - 1 and G_PSA < 2 (2 G_PIA - 1)
        assert nf_psa_two_injected(build_two_mode(xi), 1, PhaseConfig(theta=theta)) > 0.5

    def test_zero_gain_is_undefined(self):
        # equal magnitudes on signal and idler give a dark fringe at Theta = pi
        s = 0.5
        m = TransferMatrix(np.array([[s, s], [-s, s]]), LadderSignature.parse("aa"))
        with pytest.raises(UndefinedNoiseFigureError):
            nf_psa_two_injected(m, 1, PhaseConfig(theta=math.pi))

    def test_needs_two_modes(self):
        m = TransferMatrix.identity(LadderSignature.parse("a"))
        with pytest.raises(ModeIndexError):
            gain_psa(m, 1, THETA0)

    def test_mode_phases_give_same_result_as_theta(self):
        m = build_four_mode(1.3)
        theta = 0.8
        theta1 = signal_phase_for_theta(m, 1, theta)
        by_phases = PhaseConfig(mode_phases=(theta1, 0.0, 0.0, 0.0))
        assert reduce_angle(relative_phase(m, 1, 1, 2, by_phases.mode_phases) - theta) == pytest.approx(0.0, abs=1e-12)
        assert gain_psa(m, 1, by_phases) == pytest.approx(gain_psa(m, 1, PhaseConfig(theta=theta)), rel=1e-12)

    @pytest.mark.parametrize("signature", ["ac", "ca", "aa", "cc"])
    def test_signal_phase_inverts_relative_phase(self, rng, signature):
        sig = LadderSignature.parse(signature)
        m = random_symplectic(rng, sig) if signature in ("ac", "ca") else TransferMatrix(
            np.array([[0.6 * np.exp(0.4j), 0.8 * np.exp(-1.1j)], [-0.8 * np.exp(1.1j), 0.6 * np.exp(-0.4j)]]), sig
        )
        for theta in (-2.5, 0.0, 1.2):
            theta1 = signal_phase_for_theta(m, 1, theta, idler_phase=0.3)
            got = relative_phase(m, 1, 1, 2, (theta1, 0.3))
            assert reduce_angle(got - theta) == pytest.approx(0.0, abs=1e-12)


class TestPsaGeneral:
    def test_p_one_is_pia(self, rng):
        m = random_symplectic(rng, random_signature(rng, 4))
        state = InputState.signal_only(4, 5.0)
        assert gain_psa_general(m, state, 1) == pytest.approx(gain_pia(m, 1))
        assert nf_psa_general(m, state, 1) == pytest.approx(nf_pia(m, 1), rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 10.0), st.integers(1, 4))
    def test_p_one_is_pia_over_xi(self, xi, j):
        m = build_four_mode(xi)
        state = InputState.signal_only(4, 2.0)
        assert nf_psa_general(m, state, j) == pytest.approx(nf_pia(m, j), rel=1e-10)

    @pytest.mark.parametrize("j", [1, 2, 3, 4])
    def test_p_two_is_two_injected(self, j):
        m = build_four_mode(1.1)
        theta = 0.6
        state = InputState.leading(4, 2, 3.0, phases=[signal_phase_for_theta(m, j, theta), 0.0])
        phases = PhaseConfig(theta=theta)
        assert gain_psa_general(m, state, j) == pytest.approx(gain_psa(m, j, phases), rel=1e-10)
        assert nf_psa_general(m, state, j) == pytest.approx(nf_psa_two_injected(m, j, phases), rel=1e-10)

    def test_p_three_matches_large_signal_definition(self):
        m = build_four_mode(0.7)
        photons = 1e8
        state = InputState.leading(4, 3, math.sqrt(photons), phases=[0.2, -0.4, 1.0])
        exact = nf_from_moments(photons, photons, moments_general(m, state), 1, Regime.PSA)
        assert exact.gain_linear == pytest.approx(gain_psa_general(m, state, 1), rel=1e-6)
        assert exact.nf_linear == pytest.approx(nf_psa_general(m, state, 1), rel=1e-6)

    def test_explicit_phases_override_state(self):
        m = build_four_mode(0.7)
        state = InputState.leading(4, 2, 1.0)
        override = PhaseConfig(mode_phases=(math.pi, 0.0, 0.0, 0.0))
        flipped = InputState.leading(4, 2, 1.0, phases=[math.pi, 0.0])
        assert gain_psa_general(m, state, 1, override) == pytest.approx(gain_psa_general(m, flipped, 1))

    def test_rejects_non_leading_pattern(self):
        m = build_four_mode(0.7)
        state = InputState.from_alphas([1.0, 0, 1.0, 0])
        with pytest.raises(ValueError, match="modes 1..p"):
            nf_psa_general(m, state, 1)

    def test_rejects_unequal_photons(self):
        m = build_four_mode(0.7)
        state = InputState.from_alphas([1.0, 2.0, 0, 0])
        with pytest.raises(ValueError, match="equal photon numbers"):
            gain_psa_general(m, state, 1)

    def test_row_and_printed_weights_agree_for_p_two(self):
        m = build_four_mode(1.4)
        state = InputState.leading(4, 2, 1.0, phases=[0.3, 0.0])
        assert nf_psa_general(m, state, 1, pair_weight="printed") == pytest.approx(
            nf_psa_general(m, state, 1, pair_weight="row"), rel=1e-12
        )


class TestLargeGain:
    def test_two_mode_at_largest_xi(self):
        m = build_two_mode(101.0)
        nf = nf_psa_two_injected(m, 1, THETA0)
        assert math.isfinite(nf)
        assert nf == pytest.approx(0.5, rel=1e-6)
        assert nf * gain_psa(m, 1, THETA0) == pytest.approx(2 * gain_pia(m, 1) - 1, rel=1e-9)

    @pytest.mark.parametrize("factor", [1e-100, 1e120])
    def test_ratios_do_not_depend_on_row_scale(self, factor):
        m = build_four_mode(1.3)
        scaled = TransferMatrix(m.entries * factor, m.signature)
        phases = PhaseConfig(theta=0.7)
        state = InputState.leading(4, 3, 2.0, phases=[0.3, 0.0, -0.4])
        for j in range(1, 5):
            assert nf_pia(scaled, j) == pytest.approx(nf_pia(m, j), rel=1e-12)
            assert nf_psa_two_injected(scaled, j, phases) == pytest.approx(nf_psa_two_injected(m, j, phases), rel=1e-12)
            assert nf_psa_general(scaled, state, j) == pytest.approx(nf_psa_general(m, state, j), rel=1e-12)


class TestFromMoments:
    def test_coherent_identity_is_noiseless(self):
        m = TransferMatrix.identity(LadderSignature.parse("ac"))
        report = moments_pia(m, 4.0)
        entry = nf_from_moments(16.0, 16.0, report, 1)
        assert entry.nf_linear == pytest.approx(1.0)
        assert entry.gain_linear == pytest.approx(1.0)
        assert entry.nf_db == pytest.approx(0.0, abs=1e-12)

    def test_dark_mode_has_no_nf(self):
        report = moments_pia(TransferMatrix.identity(LadderSignature.parse("ac")), 2.0)
        entry = nf_from_moments(4.0, 4.0, report, 2)
        assert entry.gain_linear == 0.0
        assert entry.nf_linear is None

    def test_signal_must_be_injected(self):
        report = moments_pia(build_two_mode(1.0), 0.0)
        with pytest.raises(ValueError):
            nf_from_moments(0.0, 0.0, report, 1)


class TestReportsAndExtrema:
    def test_gain_extrema_two_mode(self):
        m = build_two_mode(1.0)
        g_min, t_min, g_max, t_max = psa_gain_extrema(m, 1, np.linspace(-math.pi, math.pi, 721))
        assert t_max == pytest.approx(0.0, abs=1e-12)
        assert abs(t_min) == pytest.approx(math.pi)
        assert g_min * g_max == pytest.approx(1.0, abs=1e-9)

    def test_four_mode_gain_stays_above_unity(self):
        m = build_four_mode(2.0)
        g_min, _, _, _ = psa_gain_extrema(m, 1, np.linspace(-math.pi, math.pi, 720, endpoint=False))
        assert g_min > 1.0

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            psa_gain_extrema(build_two_mode(1.0), 1, [])

    def test_pia_report(self):
        report = noise_report(build_four_mode(2.0), Regime.PIA)
        assert [e.mode for e in report.entries] == [1, 2, 3, 4]
        assert report[1].nf_linear == pytest.approx(nf_pia(build_four_mode(2.0), 1))
        assert report[1].theta is None
        with pytest.raises(KeyError):
            report[5]

    def test_psa_report_keeps_theta(self):
        report = noise_report(build_two_mode(1.0), Regime.PSA, modes=[1], theta=0.5)
        assert report[1].theta == pytest.approx(0.5)
        assert report[1].gain_db == pytest.approx(to_db(gain_psa(build_two_mode(1.0), 1, PhaseConfig(theta=0.5))))

    def test_undefined_pia_nf_reported_as_none(self):
        report = noise_report(TransferMatrix.identity(LadderSignature.parse("ac")), Regime.PIA)
        assert report[2].nf_linear is None
        assert report[2].gain_db is None
