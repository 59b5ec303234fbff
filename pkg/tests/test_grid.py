import logging

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from carleman.exceptions import GridError, InvalidParameterError
from carleman.grid import (
    GridFunction, NormKind, WeightedNormSpec, boundary_ratio, class_norm, convolve, forward_ft, frequencies,
    grid_nodes, inverse_ft, spectral_derivative,
)


def gaussian_profile(x):
    return np.exp(-np.pi * x * x)


def small_gaussian(a=1.0):
    return GridFunction.sample(lambda x: np.exp(-np.pi * a * x * x), 8.0, 512)


class TestGridFunction:
    @pytest.mark.parametrize('n', [4, 100, 513])
    def test_power_of_two(self, n):
        with pytest.raises(GridError):
            GridFunction(8.0, np.zeros(n))

    def test_half_width(self):
        with pytest.raises(GridError):
            GridFunction(0.0, np.zeros(16))

    def test_nodes(self, gaussian):
        assert gaussian.n_points == 512
        assert gaussian.dx == pytest.approx(1.0 / 32.0)
        assert gaussian.x[0] == -8.0
        assert gaussian.x[256] == 0.0
        assert gaussian.dual_half_width == pytest.approx(16.0)

    def test_samples_are_read_only(self, gaussian):
        with pytest.raises(ValueError):
            gaussian.samples[0] = 1.0

    def test_reflected(self, gaussian):
        odd = gaussian.with_samples(gaussian.x * gaussian.samples)
        np.testing.assert_allclose(gaussian.reflected().samples, gaussian.samples, atol=1e-15)
        np.testing.assert_allclose(odd.reflected().samples[1:], -odd.samples[1:], atol=1e-15)

    def test_grid_mismatch(self, gaussian):
        other = GridFunction.sample(gaussian_profile, 8.0, 256)
        with pytest.raises(GridError):
            gaussian.inner(other)

    def test_csv_roundtrip(self, gaussian, tmp_path):
        path = tmp_path / 'f.csv'
        f = gaussian.with_samples(gaussian.samples * (1.0 + 0.5j))
        f.write_csv(path)
        back = GridFunction.read_csv(path)
        assert back.same_grid(f)
        np.testing.assert_array_equal(back.samples, f.samples)

    def test_csv_columns(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text('x,value\n0,1\n')
        with pytest.raises(GridError):
            GridFunction.read_csv(path)


class TestTransforms:
    def test_gaussian_is_self_dual(self, gaussian):
        spectrum = forward_ft(gaussian)
        np.testing.assert_allclose(spectrum.samples, gaussian_profile(frequencies(gaussian)), atol=1e-12)
        np.testing.assert_array_equal(frequencies(gaussian), grid_nodes(16.0, 512))

    def test_inverse_undoes_forward(self, gaussian):
        f = gaussian.with_samples(gaussian.samples * np.exp(2j * np.pi * 1.5 * gaussian.x))
        back = inverse_ft(forward_ft(f))
        assert back.same_grid(f)
        np.testing.assert_allclose(back.samples, f.samples, atol=1e-13)

    def test_plancherel(self, gaussian):
        f = gaussian.with_samples(gaussian.samples * (1.0 + gaussian.x ** 3))
        assert forward_ft(f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)

    def test_boundary_warning(self, caplog):
        flat = GridFunction(8.0, np.ones(64))
        with caplog.at_level(logging.WARNING, logger='carleman'):
            forward_ft(flat)
        assert 'periodized' in caplog.text
        caplog.clear()
        with caplog.at_level(logging.WARNING, logger='carleman'):
            forward_ft(flat, check_decay=False)
        assert caplog.text == ''

    def test_boundary_ratio(self, gaussian):
        assert boundary_ratio(gaussian) < 1e-50
        assert boundary_ratio(GridFunction(8.0, np.ones(64))) == 1.0
        assert boundary_ratio(GridFunction(8.0, np.zeros(64))) == 0.0

    def test_convolution_of_gaussians(self, gaussian):
        result = convolve(gaussian, gaussian)
        expected = np.exp(-np.pi * gaussian.x ** 2 / 2.0) / np.sqrt(2.0)
        np.testing.assert_allclose(result.samples, expected, atol=1e-12)

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(a=st.floats(0.5, 2.0), b=st.floats(0.5, 2.0), s=st.floats(-2.0, 2.0), c=st.floats(-3.0, 3.0))
    def test_convolution_becomes_a_product(self, a, b, s, c):
        f = GridFunction.sample(lambda x: np.exp(-np.pi * a * (x - s) ** 2), 8.0, 512)
        g = GridFunction.sample(lambda x: np.exp(-np.pi * b * x * x + 2j * np.pi * c * x), 8.0, 512)
        np.testing.assert_allclose(forward_ft(convolve(f, g)).samples,
                                   forward_ft(f).samples * forward_ft(g).samples, atol=1e-12)

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(m=st.integers(-40, 40))
    def test_translation_modulates_the_spectrum(self, m):
        f = small_gaussian()
        shifted = f.with_samples(np.roll(f.samples, m))
        expected = forward_ft(f).samples * np.exp(-2j * np.pi * m * f.dx * frequencies(f))
        np.testing.assert_allclose(forward_ft(shifted).samples, expected, atol=1e-12)

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(q=st.integers(-40, 40))
    def test_modulation_translates_the_spectrum(self, q):
        f = small_gaussian()
        b = q / (2.0 * f.half_width)
        modulated = f.with_samples(f.samples * np.exp(2j * np.pi * b * f.x))
        np.testing.assert_allclose(forward_ft(modulated).samples, np.roll(forward_ft(f).samples, q), atol=1e-12)

    def test_convolution_needs_one_grid(self, gaussian):
        with pytest.raises(GridError):
            convolve(gaussian, GridFunction.sample(gaussian_profile, 4.0, 512))


class TestSpectralDerivative:
    def test_first_and_second(self, gaussian):
        x = gaussian.x
        first = spectral_derivative(gaussian, 1)
        second = spectral_derivative(gaussian, 2)
        np.testing.assert_allclose(first.samples, -2.0 * np.pi * x * gaussian.samples, atol=1e-10)
        np.testing.assert_allclose(second.samples, (4.0 * np.pi ** 2 * x ** 2 - 2.0 * np.pi) * gaussian.samples,
                                   atol=1e-9)

    @hypothesis_settings(max_examples=20, deadline=None)
    @given(a=st.floats(0.5, 2.0))
    def test_matches_central_differences(self, a):
        f = small_gaussian(a)
        s = f.samples
        # fourth-order central difference
        difference = (np.roll(s, 2) - 8.0 * np.roll(s, 1) + 8.0 * np.roll(s, -1) - np.roll(s, -2)) / (12.0 * f.dx)
        np.testing.assert_allclose(spectral_derivative(f, 1).samples, difference, atol=1e-3)

    def test_order_zero_is_identity(self, gaussian):
        assert spectral_derivative(gaussian, 0) is gaussian

    def test_negative_order(self, gaussian):
        with pytest.raises(InvalidParameterError):
            spectral_derivative(gaussian, -1)

    def test_given_spectrum(self, gaussian):
        from_spectrum = spectral_derivative(gaussian, 3, spectrum=forward_ft(gaussian))
        np.testing.assert_allclose(from_spectrum.samples, spectral_derivative(gaussian, 3).samples, atol=1e-10)

    def test_spectrum_on_the_wrong_grid(self, gaussian):
        with pytest.raises(GridError):
            spectral_derivative(gaussian, 1, spectrum=gaussian)


class TestClassNorms:
    def test_norm_kind(self):
        assert NormKind.from_string('gs') is NormKind.GS
        with pytest.raises(ValueError):
            NormKind.from_string('L2')

    @pytest.mark.parametrize('h,k', [(0.0, 1.0), (1.0, -1.0)])
    def test_invalid_spec(self, gevrey1, h, k):
        with pytest.raises(InvalidParameterError):
            WeightedNormSpec(gevrey1, h=h, k=k)

    def test_missing_parameters(self, gevrey1, gaussian):
        with pytest.raises(InvalidParameterError):
            class_norm(gaussian, WeightedNormSpec(gevrey1, h=1.0), NormKind.GS)
        with pytest.raises(InvalidParameterError):
            class_norm(gaussian, WeightedNormSpec(gevrey1, h=1.0), NormKind.Q)

    def test_sup_of_the_function(self, gevrey1, gaussian):
        value = class_norm(gaussian, WeightedNormSpec(gevrey1, h=1.0, kappa=0.0, alpha_max=0), NormKind.Q)
        assert value.value == pytest.approx(1.0)
        assert value.alpha == 0
        assert value.x == 0.0

    def test_exponential_weight(self, gevrey1, gaussian):
        small = class_norm(gaussian, WeightedNormSpec(gevrey1, h=0.5, k=1.0, alpha_max=4), NormKind.K)
        large = class_norm(gaussian, WeightedNormSpec(gevrey1, h=1.0, k=1.0, alpha_max=4), NormKind.K)
        assert small.value >= 1.0
        assert large.value >= small.value
        assert not small.warnings
        assert np.isfinite(large.log_value)

    def test_gelfand_shilov_weight(self, gevrey1, gevrey2, gaussian):
        value = class_norm(gaussian, WeightedNormSpec(gevrey1, h=0.5, k=1.0, alpha_max=4, A=gevrey2), NormKind.GS)
        assert np.isfinite(value.value)
        assert not value.truncated

    def test_zero_function(self, gevrey1):
        value = class_norm(GridFunction(8.0, np.zeros(64)), WeightedNormSpec(gevrey1, h=1.0, k=1.0), NormKind.K)
        assert value.value == 0.0
        assert value.alpha is None

    def test_slow_decay_under_a_fast_weight_is_truncated(self, gevrey1):
        f = GridFunction.sample(lambda x: np.exp(-2.0 * np.abs(x)))
        value = class_norm(f, WeightedNormSpec(gevrey1, h=1.0, k=3.0, alpha_max=0), NormKind.K)
        assert value.truncated
        assert any('still rising' in message for message in value.warnings)
        assert abs(value.x) > 11.0

    def test_fast_decay_under_the_same_weight_is_clean(self, gevrey1, gaussian):
        value = class_norm(gaussian, WeightedNormSpec(gevrey1, h=1.0, k=3.0, alpha_max=0), NormKind.K)
        assert not value.truncated
        assert abs(value.x) == pytest.approx(3.0 / (2.0 * np.pi), abs=gaussian.dx)
        assert value.log_value == pytest.approx(9.0 / (4.0 * np.pi), abs=2e-3)
