import numpy as np
import pytest

from bbqkit.ratfit import RationalModel, evaluate_model, fit_impedance
from bbqkit.network import FrequencyResponse, ResponseKind
from bbqkit.synthesis import (
    RLCMode,
    SynthesisError,
    chain_impedance,
    mode_impedance,
    modes_from_dicts,
    modes_to_dicts,
    synthesize_modes,
)
from conftest import rlc_impedance_oracle

TWO_PI = 2.0 * np.pi


def pair_from_rwq(r, omega, q):
    """Pole pair via the synthesis identification (its exact inverse):
    xi = -omega/(2Q), a = -R*xi, b chosen so the numerator constant of the
    two-pole form vanishes."""
    xi = -omega / (2.0 * q)
    a = -r * xi
    b = -a * xi / omega
    pole = complex(xi, omega)
    residue = complex(a, b)
    return np.array([pole, np.conj(pole)]), np.array([residue, np.conj(residue)])


class TestRLCModeInvariants:
    def test_omega_lc_identity_enforced(self):
        with pytest.raises(ValueError, match="sqrt"):
            RLCMode(omega=1e9, q_factor=50.0, r=100.0, l=1e-9, c=1e-12)

    def test_q_identity_enforced(self):
        omega = 1.0 / np.sqrt(1e-9 * 1e-15)
        with pytest.raises(ValueError, match="q_factor"):
            RLCMode(omega=omega, q_factor=123.0, r=100.0, l=1e-9, c=1e-15)

    def test_positive_fields_enforced(self):
        with pytest.raises(ValueError, match="positive"):
            RLCMode(omega=-1.0, q_factor=1.0, r=1.0, l=1.0, c=1.0)

    def test_from_rwq_satisfies_identities(self):
        mode = RLCMode.from_rwq(r=100.0, omega=TWO_PI * 5e9, q_factor=50.0)
        assert mode.omega == pytest.approx(1.0 / np.sqrt(mode.l * mode.c), rel=1e-12)
        assert mode.q_factor == pytest.approx(mode.omega * mode.r * mode.c, rel=1e-12)


class TestSynthesizeModes:
    def test_round_trip_identity(self):
        r, omega, q = 100.0, TWO_PI * 5e9, 50.0
        poles, residues = pair_from_rwq(r, omega, q)
        modes = synthesize_modes(RationalModel(poles, residues))
        assert len(modes) == 1
        mode = modes[0]
        assert abs(mode.omega - omega) / omega < 1e-12
        assert abs(mode.q_factor - q) / q < 1e-12
        assert abs(mode.r - r) / r < 1e-12
        c_expected = q / (omega * r)
        assert abs(mode.c - c_expected) / c_expected < 1e-12
        assert abs(mode.l - 1.0 / (omega**2 * c_expected)) * omega**2 * c_expected < 1e-12

    def test_pole_reconstruction_round_trip(self):
        # mode -> pole (xi = -omega/2Q, xi +/- j omega) -> mode reproduces poles
        r, omega, q = 80.0, TWO_PI * 7e9, 80.0
        poles, residues = pair_from_rwq(r, omega, q)
        mode = synthesize_modes(RationalModel(poles, residues))[0]
        xi = -mode.omega / (2.0 * mode.q_factor)
        rebuilt = complex(xi, mode.omega)
        source = poles[poles.imag > 0][0]
        assert abs(rebuilt - source) / abs(source) < 1e-9

    def test_real_pole_rejected(self):
        model = RationalModel(np.array([-1e9 + 0j]), np.array([1e10 + 0j]))
        with pytest.raises(SynthesisError, match="real pole"):
            synthesize_modes(model)

    def test_negative_residue_rejected(self):
        poles, residues = pair_from_rwq(100.0, TWO_PI * 5e9, 50.0)
        with pytest.raises(SynthesisError, match="negative resistance"):
            synthesize_modes(RationalModel(poles, -residues.real + 1j * residues.imag))

    def test_modes_sorted_by_frequency(self):
        p1, r1 = pair_from_rwq(80.0, TWO_PI * 7e9, 80.0)
        p2, r2 = pair_from_rwq(100.0, TWO_PI * 5e9, 50.0)
        model = RationalModel(np.concatenate([p1, p2]), np.concatenate([r1, r2]))
        modes = synthesize_modes(model)
        assert [m.freq_hz for m in modes] == pytest.approx([5e9, 7e9])

    def test_discarded_const_term_warns(self):
        poles, residues = pair_from_rwq(100.0, TWO_PI * 5e9, 50.0)
        model = RationalModel(poles, residues, const_term=30.0)
        with pytest.warns(UserWarning, match="discarding"):
            synthesize_modes(model)

    def test_small_const_term_silent(self):
        poles, residues = pair_from_rwq(100.0, TWO_PI * 5e9, 50.0)
        model = RationalModel(poles, residues, const_term=1e-9)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            synthesize_modes(model)


class TestModeImpedance:
    def test_on_resonance_is_purely_real_r(self):
        mode = RLCMode.from_rwq(r=100.0, omega=TWO_PI * 5e9, q_factor=50.0)
        z = mode_impedance(mode, [mode.omega / TWO_PI])[0]
        assert z.real == pytest.approx(100.0, rel=1e-12)
        assert abs(z.imag) < 1e-9 * abs(z.real)

    def test_low_frequency_inductive_short(self):
        mode = RLCMode.from_rwq(r=100.0, omega=TWO_PI * 5e9, q_factor=50.0)
        mags = np.abs(mode_impedance(mode, [1e3, 1e2, 1e1])).ravel()
        assert np.all(np.diff(mags) < 0)
        assert mags[-1] < 1e-5 * 100.0

    def test_matches_independent_rlc_oracle(self):
        mode = RLCMode.from_rwq(r=100.0, omega=TWO_PI * 5e9, q_factor=50.0)
        freq = np.linspace(1e9, 10e9, 500)
        z = mode_impedance(mode, freq)
        z_oracle = rlc_impedance_oracle(freq, 100.0, TWO_PI * 5e9, 50.0)
        assert np.max(np.abs(z - z_oracle) / np.abs(z_oracle)) < 1e-12


class TestChainReconstruction:
    def test_symmetric_form_error_is_order_inverse_q(self):
        # the symmetric two-pole approximation differs from the exact
        # partial-fraction model by at most ~1/(4Q) near resonance
        freq = np.linspace(1e9, 10e9, 2000)
        for q in (10.0, 100.0, 1000.0):
            poles, residues = pair_from_rwq(100.0, TWO_PI * 5e9, q)
            model = RationalModel(poles, residues)
            modes = synthesize_modes(model)
            z_modes = chain_impedance(modes, freq)
            z_model = evaluate_model(model, freq)
            rel = np.max(np.abs(z_modes - z_model) / np.abs(z_model))
            assert rel < 1.0 / (2.0 * q)

    def test_discrepancy_shrinks_with_q(self):
        freq = np.linspace(1e9, 10e9, 2000)
        errors = []
        for q in (10.0, 100.0, 1000.0):
            poles, residues = pair_from_rwq(100.0, TWO_PI * 5e9, q)
            model = RationalModel(poles, residues)
            z_modes = chain_impedance(synthesize_modes(model), freq)
            z_model = evaluate_model(model, freq)
            errors.append(np.max(np.abs(z_modes - z_model) / np.abs(z_model)))
        assert errors[0] > errors[1] > errors[2]

    def test_full_chain_reconstructs_input_data(self):
        # fit -> synthesize: the fitted model reproduces the data, and the
        # mode chain reproduces the fitted model up to the 1/Q form error
        freq = np.linspace(1e9, 10e9, 1000)
        z = rlc_impedance_oracle(freq, 100.0, TWO_PI * 5e9, 50.0)
        z = z + rlc_impedance_oracle(freq, 80.0, TWO_PI * 7e9, 80.0)
        resp = FrequencyResponse(freq, z, ResponseKind.IMPEDANCE)
        model, _ = fit_impedance(resp, n_pole_pairs=2)
        z_fit = evaluate_model(model, freq)
        assert np.max(np.abs(z_fit - z) / np.abs(z)) < 1e-6
        z_modes = chain_impedance(
            synthesize_modes(model), freq, model.const_term, model.slope_term
        )
        assert np.max(np.abs(z_modes - z_fit) / np.abs(z_fit)) < 1.0 / (2.0 * 50.0)


class TestSerialization:
    def test_dict_round_trip(self):
        modes = [
            RLCMode.from_rwq(r=100.0, omega=TWO_PI * 5e9, q_factor=50.0),
            RLCMode.from_rwq(r=80.0, omega=TWO_PI * 7e9, q_factor=80.0),
        ]
        docs = modes_to_dicts(modes)
        assert set(docs[0]) == {"omega_rad_s", "q", "r_ohm", "l_h", "c_f"}
        back = modes_from_dicts(docs)
        assert back == modes
