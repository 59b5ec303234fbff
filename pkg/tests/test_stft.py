import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from carleman.exceptions import GridError, WindowError
from carleman.grid import GridFunction
from carleman.multiplier import eval_P
from carleman.stft import (
    check_fundamental, check_reconstruction, default_sample_points, gaussian_window, pairing_oracle,
    quantization_pairing, stft, stft_adjoint,
)

# n = 4 L^2 makes the grid its own dual
HALF_WIDTH = 8.0
POINTS = 256


@pytest.fixture
def window():
    return gaussian_window(HALF_WIDTH, POINTS)


@pytest.fixture
def gauss():
    return GridFunction.sample(lambda x: np.exp(-np.pi * x * x), HALF_WIDTH, POINTS)


@pytest.fixture
def hermite4():
    def profile(x):
        y = np.sqrt(2.0 * np.pi) * x
        return (4.0 * y ** 4 - 12.0 * y ** 2 + 3.0) * np.exp(-np.pi * x * x)
    return GridFunction.sample(profile, HALF_WIDTH, POINTS)


class TestTransform:
    def test_window_norm(self, window):
        assert window.l2_norm() == pytest.approx(1.0, rel=1e-12)

    def test_plancherel(self, hermite4, window):
        shifted = hermite4.with_samples(hermite4.samples * np.exp(2j * np.pi * 0.75 * hermite4.x))
        V = stft(shifted, window)
        assert V.l2_norm() == pytest.approx(shifted.l2_norm() * window.l2_norm(), rel=1e-6)

    def test_strided_plancherel(self, gauss, window):
        V = stft(gauss, window, x_stride=2)
        assert V.values.shape == (POINTS // 2, POINTS)
        assert V.l2_norm() == pytest.approx(gauss.l2_norm(), rel=1e-6)

    @pytest.mark.parametrize('stride', [0, 3])
    def test_bad_stride(self, gauss, window, stride):
        with pytest.raises(GridError):
            stft(gauss, window, x_stride=stride)

    def test_zero_window(self, gauss):
        with pytest.raises(WindowError):
            stft(gauss, gauss.with_samples(np.zeros(POINTS)))

    def test_grid_mismatch(self, gauss):
        with pytest.raises(GridError):
            stft(gauss, gaussian_window(HALF_WIDTH, 2 * POINTS))

    def test_linear_in_f(self, gauss, hermite4, window):
        combined = stft(gauss.with_samples(gauss.samples + 2.0 * hermite4.samples), window)
        separate = stft(gauss, window) + 2.0 * stft(hermite4, window)
        np.testing.assert_allclose(combined.values, separate.values, atol=1e-14)

    def test_gaussian_ambiguity_function(self, window):
        V = stft(window, window)
        expected = np.exp(-np.pi * (V.x[:, None] ** 2 + V.xi[None, :] ** 2) / 2.0)
        np.testing.assert_allclose(np.abs(V.values), expected, atol=1e-12)

    def test_heat_map_frame(self, gauss, window, tmp_path):
        V = stft(gauss, window, x_stride=4)
        frame = V.to_frame()
        assert list(frame.columns) == ['x', 'xi', 'abs']
        assert len(frame) == (POINTS // 4) * POINTS
        path = tmp_path / 'v.csv'
        V.write_csv(path)
        assert len(pd.read_csv(path)) == len(frame)


class TestReconstruction:
    @pytest.mark.parametrize('name', ['gauss', 'hermite4'])
    def test_same_window(self, request, window, name):
        f = request.getfixturevalue(name)
        report = check_reconstruction(f, window, window)
        assert report.holds
        assert report.constants['error'] <= 1e-6

    def test_different_synthesis_window(self, hermite4, window):
        wide = GridFunction.sample(lambda t: np.exp(-np.pi * t * t / 4.0), HALF_WIDTH, POINTS)
        assert check_reconstruction(hermite4, window, wide).holds

    def test_adjoint_of_zero(self, window):
        zero = window.with_samples(np.zeros(POINTS))
        rebuilt = stft_adjoint(stft(zero, window), window)
        assert not np.any(rebuilt.samples)

    @hypothesis_settings(max_examples=20, deadline=None)
    @given(a=st.floats(-5.0, 5.0), b=st.floats(-5.0, 5.0))
    def test_adjoint_is_linear(self, a, b):
        window = gaussian_window(HALF_WIDTH, POINTS)
        F = stft(GridFunction.sample(lambda x: np.exp(-np.pi * x * x), HALF_WIDTH, POINTS), window)
        G = stft(GridFunction.sample(lambda x: x * np.exp(-np.pi * (x - 1.0) ** 2), HALF_WIDTH, POINTS), window)
        combined = stft_adjoint(a * F + b * G, window).samples
        separate = a * stft_adjoint(F, window).samples + b * stft_adjoint(G, window).samples
        np.testing.assert_allclose(combined, separate, atol=1e-12 * (1.0 + abs(a) + abs(b)))

    def test_orthogonal_windows(self, gauss, window):
        odd = window.with_samples(window.x * window.samples)
        with pytest.raises(WindowError):
            check_reconstruction(gauss, window, odd)

    def test_zero_synthesis_window(self, gauss, window):
        with pytest.raises(WindowError):
            check_reconstruction(gauss, window, window.with_samples(np.zeros(POINTS)))


class TestFundamentalIdentity:
    def test_sampled_points(self, hermite4, window):
        report = check_fundamental(hermite4, window)
        assert report.checked_range == 25
        assert report.holds
        assert report.constants['max_discrepancy'] <= 1e-7

    def test_explicit_points(self, gauss, window):
        points = [(POINTS // 2, POINTS // 2), (POINTS // 2 + 5, POINTS // 2 - 3)]
        assert check_fundamental(gauss, window, points).checked_range == 2

    def test_sample_points_are_seeded(self):
        np.testing.assert_array_equal(default_sample_points(POINTS, seed=3), default_sample_points(POINTS, seed=3))
        assert default_sample_points(POINTS).shape == (25, 2)


class TestQuantizationPairing:
    def test_polynomial_symbol(self, gauss, window):
        P = gauss.with_samples(1.0 + gauss.x ** 2)
        value = quantization_pairing(P, gauss, window, window)
        assert value == pytest.approx(pairing_oracle(P, gauss), rel=1e-5)

    def test_multiplier_symbol(self, multiplier1, gauss, window):
        P = gauss.with_samples(eval_P(multiplier1, gauss.x))
        phi = gauss.with_samples(gauss.samples * np.cos(2.0 * np.pi * gauss.x))
        value = quantization_pairing(P, phi, window, window)
        assert value == pytest.approx(pairing_oracle(P, phi), rel=1e-5)

    def test_phi_on_the_wrong_grid(self, gauss, window):
        phi = GridFunction.sample(lambda x: np.exp(-np.pi * x * x), 4.0, POINTS)
        with pytest.raises(GridError):
            quantization_pairing(gauss, phi, window, window)

    def test_blocks_do_not_change_the_sum(self, monkeypatch, gauss, window):
        P = gauss.with_samples(1.0 + gauss.x ** 2)
        whole = quantization_pairing(P, gauss, window, window)
        monkeypatch.setattr('carleman.stft.transform.PAIRING_CHUNK', 7)
        assert quantization_pairing(P, gauss, window, window) == pytest.approx(whole, rel=1e-12)

    @hypothesis_settings(max_examples=8, deadline=None)
    @given(a=st.floats(0.5, 2.0), b=st.floats(0.0, 2.0))
    def test_constant_symbol_evaluates_phi_at_zero(self, a, b):
        phi = GridFunction.sample(lambda x: np.exp(-np.pi * a * x * x) * np.cos(2.0 * np.pi * b * x),
                                  HALF_WIDTH, POINTS)
        window = gaussian_window(HALF_WIDTH, POINTS)
        ones = phi.with_samples(np.ones(POINTS))
        assert quantization_pairing(ones, phi, window, window) == pytest.approx(1.0, rel=1e-5)
