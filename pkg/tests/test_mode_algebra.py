import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from factories import random_generic, random_signature, random_symplectic
from fopa_noise.core.mode_algebra import (
    InputState,
    Ladder,
    LadderSignature,
    TransferMatrix,
    commutator_matrix,
    pair_type,
    pseudo_metric,
    selector_abcd,
    selector_s,
    selector_sigma,
    validate_symplectic,
)
from fopa_noise.core.models import build_four_mode, build_two_mode
from fopa_noise.errors import DimensionMismatchError, ModeIndexError

signatures = st.text(alphabet="ac", min_size=1, max_size=6).map(LadderSignature.parse)

TWO = LadderSignature.parse("ac")
FOUR = LadderSignature.alternating(4)


class TestSignature:
    def test_alternating_starts_with_annihilation(self):
        assert str(FOUR) == "acac"
        assert FOUR.is_annihilation(1) and not FOUR.is_annihilation(2)

    def test_parse_accepts_separators(self):
        assert LadderSignature.parse("a, c, a").tags == (Ladder.ANNIHILATION, Ladder.CREATION, Ladder.ANNIHILATION)

    def test_parse_rejects_unknown_tags(self):
        with pytest.raises(ValueError):
            LadderSignature.parse("axc")

    def test_empty_signature_rejected(self):
        with pytest.raises(DimensionMismatchError):
            LadderSignature(())


class TestSelectors:
    def test_s_values(self):
        assert selector_s(TWO, 1, 1) == 1
        assert selector_s(TWO, 1, 2) == -1
        assert selector_s(FOUR, 3, 1) == 1

    def test_sigma_values(self):
        assert selector_sigma(TWO, 1, 2) == 1
        assert selector_sigma(TWO, 2, 2) == 0
        assert selector_sigma(FOUR, 2, 3) == 1

    def test_abcd_table(self):
        assert selector_abcd(TWO, 1, 2) == (1, 0, 0, 0)
        assert selector_abcd(LadderSignature.parse("aa"), 1, 2) == (0, 0, 1, 0)
        assert selector_abcd(LadderSignature.parse("cc"), 1, 2) == (0, 0, 0, 1)
        assert selector_abcd(LadderSignature.parse("ca"), 1, 2) == (0, 1, 0, 0)
        assert pair_type(LadderSignature.parse("ca"), 1, 2) == "B"

    def test_abcd_requires_ordered_pair(self):
        with pytest.raises(ModeIndexError):
            selector_abcd(FOUR, 2, 2)
        with pytest.raises(ModeIndexError):
            selector_abcd(FOUR, 3, 1)

    @pytest.mark.parametrize("j", [0, 5, -1])
    def test_out_of_range_labels_are_1_based(self, j):
        with pytest.raises(ModeIndexError, match=r"1\.\.4"):
            selector_s(FOUR, j, 1)

    @given(signatures, st.data())
    def test_sigma_is_half_of_one_minus_s(self, sig, data):
        j = data.draw(st.integers(1, sig.n))
        k = data.draw(st.integers(1, sig.n))
        assert selector_sigma(sig, j, k) == (1 - selector_s(sig, j, k)) // 2
        assert selector_s(sig, j, k) == selector_s(sig, k, j)
        assert selector_sigma(sig, j, j) == 0

    @given(signatures.filter(lambda s: s.n >= 2), st.data())
    def test_exactly_one_pair_selector(self, sig, data):
        k = data.draw(st.integers(1, sig.n - 1))
        l = data.draw(st.integers(k + 1, sig.n))
        assert sum(selector_abcd(sig, k, l)) == 1

    def test_pseudo_metric(self):
        np.testing.assert_array_equal(np.diag(pseudo_metric(FOUR)), [1, -1, 1, -1])


class TestTransferMatrix:
    def test_entries_are_read_only(self):
        m = TransferMatrix.identity(TWO)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 2

    def test_shape_must_match_signature(self):
        with pytest.raises(DimensionMismatchError):
            TransferMatrix(np.eye(3), TWO)

    def test_accessors(self):
        m = build_two_mode(1.0)
        assert m.mu(2, 1) == -m.mu(1, 2)
        assert m.phase(1, 2) == pytest.approx(np.pi / 2)
        assert m.row_norm(1) == pytest.approx(abs(m.mu(1, 1)) ** 2 + abs(m.mu(1, 2)) ** 2)


class TestInputState:
    def test_vacuum_modes_must_have_zero_amplitude(self):
        with pytest.raises(ValueError):
            InputState((1.0, 0.5), (True, False))

    def test_signal_only(self):
        state = InputState.signal_only(4, 3.0)
        assert state.injected == (True, False, False, False)
        assert state.photons(1) == pytest.approx(9.0)

    def test_leading_phases(self):
        state = InputState.leading(4, 2, 2.0, phases=[0.3, -0.1])
        assert state.injected_count == 2
        assert state.phase(1) == pytest.approx(0.3)
        assert state.photons(2) == pytest.approx(4.0)
        assert state.alpha(3) == 0

    def test_leading_rejects_bad_p(self):
        with pytest.raises(ModeIndexError):
            InputState.leading(2, 3, 1.0)


class TestValidateSymplectic:
    def test_two_mode_any_xi(self):
        for xi in (0.0, 0.7, 5.0, 100.0):
            report = validate_symplectic(build_two_mode(xi), 1e-12)
            assert report.passed, report

    def test_four_mode_xi_two_row_sums(self):
        report = validate_symplectic(build_four_mode(2.0), 1e-12)
        assert report.passed
        assert report.max_residual <= 1e-12

    def test_random_generic_fails(self, rng):
        m = random_generic(rng, random_signature(rng, 3))
        report = validate_symplectic(m)
        assert not report.passed
        assert report.max_residual > 1e-3

    def test_failing_rows_are_1_based(self):
        m = TransferMatrix(np.diag([1.0, 1.2]), TWO)
        report = validate_symplectic(m)
        assert report.failing_rows == (2,)
        assert report.pairs_pass

    def test_random_symplectic_passes(self, rng):
        for n in (2, 3, 4, 6):
            m = random_symplectic(rng, random_signature(rng, n))
            assert validate_symplectic(m, 1e-10).passed

    def test_commutator_matrix_is_metric_for_built_ins(self):
        m = build_four_mode(0.8)
        np.testing.assert_allclose(commutator_matrix(m), pseudo_metric(m.signature), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 100.0))
    def test_built_ins_over_xi(self, xi):
        assert validate_symplectic(build_two_mode(xi), 1e-12).passed
        assert validate_symplectic(build_four_mode(xi), 1e-12).passed

    def test_deterministic(self):
        m = build_four_mode(3.3)
        assert validate_symplectic(m) == validate_symplectic(m)
