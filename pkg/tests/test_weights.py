import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from carleman.exceptions import InvalidParameterError, RangeError, RSequenceError, WeightSequenceError
from carleman.weights import (
    AssociatedFunction, Backend, KDirection, RSequence, check_inclusion, check_M2, check_M2star,
    check_nontriviality, check_nu_doubling, check_nu_M2_inequality, klemma_convert, load_weight,
    make_from_table, make_gevrey, merge_rsequences, read_table, shrink_r,
)


class TestWeightSequence:
    def test_gevrey_table(self):
        M = make_gevrey(1.0, 10)
        assert M.p_max == 10
        assert M.log_M(5) == pytest.approx(np.log(120.0))
        np.testing.assert_allclose(M.quotients, np.arange(1, 11))

    @pytest.mark.parametrize('sigma', [0.0, -1.0, np.nan, np.inf])
    def test_invalid_sigma(self, sigma):
        with pytest.raises(InvalidParameterError):
            make_gevrey(sigma)

    def test_generator_extends_past_table(self):
        M = make_gevrey(1.0, 10)
        assert M.log_M(20) == pytest.approx(np.sum(np.log(np.arange(1, 21))))
        assert M.extended(50).p_max == 50

    def test_table_without_generator_stops(self):
        M = make_from_table([0.0, 0.0, np.log(2.0), np.log(6.0)])
        with pytest.raises(RangeError):
            M.log_M(10)

    @pytest.mark.parametrize('preset,p_max', [('gevrey:2', 1000), ('gevrey:0.5:300', 300)])
    def test_presets(self, preset, p_max):
        assert load_weight(preset).p_max == p_max

    @pytest.mark.parametrize('preset', ['', 'gevrey', 'gevrey:x', 'gevrey:1:2:3', 'beurling:1'])
    def test_bad_presets(self, preset):
        with pytest.raises(InvalidParameterError):
            load_weight(preset)

    def test_convexity_violation_names_index(self):
        values = [0.0, 0.0, 1.0, 3.0, 4.0, 7.0]
        with pytest.raises(WeightSequenceError) as exc:
            make_from_table(values)
        assert exc.value.invariant == 'log-convexity'
        assert exc.value.index == 3
        assert 'p = 3' in str(exc.value)

    @pytest.mark.parametrize('values,invariant', [
        ([0.0, 0.0], 'length'),
        ([0.0, 0.5, 1.0, 2.0], 'normalization'),
        ([0.0, 0.0, np.inf, 1.0], 'finite'),
    ])
    def test_malformed_tables(self, values, invariant):
        with pytest.raises(WeightSequenceError) as exc:
            make_from_table(values)
        assert exc.value.invariant == invariant

    def test_read_table(self, tmp_path):
        path = tmp_path / 'factorial.txt'
        path.write_text('\n'.join(f"{v:.17g}" for v in make_gevrey(1.0, 30).log_values))
        M = read_table(path)
        assert M.name == 'factorial.txt'
        assert M.generator is None
        assert M.log_M(30) == pytest.approx(make_gevrey(1.0, 30).log_M(30))

    def test_empty_table_file(self, tmp_path):
        path = tmp_path / 'empty.txt'
        path.write_text('')
        with pytest.raises(WeightSequenceError):
            read_table(path)


class TestAssociatedFunction:
    @pytest.mark.parametrize('sigma', [0.5, 1.0, 2.0])
    def test_crossing_count_matches_brute_force(self, sigma):
        M = make_gevrey(sigma, 500)
        # keep the maximizing p inside the table
        t = np.geomspace(1.0, 400.0 ** sigma, 1000)
        fast = AssociatedFunction(M)(t)
        slow = AssociatedFunction(M, Backend.BRUTE_FORCE)(t)
        np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-10)

    def test_vanishes_up_to_one(self, gevrey1):
        t = np.linspace(0.0, 1.0, 11)
        assert np.all(AssociatedFunction(gevrey1)(t) == 0.0)

    def test_value_at_e(self, gevrey1):
        value = AssociatedFunction(gevrey1).evaluate(np.e)
        assert value.value == pytest.approx(2.0 - np.log(2.0))
        assert value.argmax == 2

    def test_negative_argument(self, gevrey1):
        with pytest.raises(InvalidParameterError):
            AssociatedFunction(gevrey1)(-1.0)

    def test_table_end_flags_truncation(self):
        M = make_from_table(make_gevrey(1.0, 20).log_values)
        assert AssociatedFunction(M).evaluate(100.0).truncated
        assert not AssociatedFunction(M).evaluate(10.0).truncated

    @pytest.mark.parametrize('sigma', [0.5, 1.0, 2.0])
    def test_gevrey_slope(self, sigma):
        t = np.geomspace(1e2, 1e6, 200)
        nu = AssociatedFunction(make_gevrey(sigma))(t)
        slope, _ = np.polyfit(np.log(t), np.log(nu), 1)
        assert slope == pytest.approx(1.0 / sigma, abs=0.05)

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(sigma=st.floats(0.5, 3.0), start=st.floats(0.0, 5.0))
    def test_non_decreasing_and_convex_in_log_t(self, sigma, start):
        log_t = np.linspace(start, start + 5.0, 200)
        nu = AssociatedFunction(make_gevrey(sigma, 2000))(np.exp(log_t))
        tol = 1e-12 * (1.0 + nu.max())
        assert np.all(np.diff(nu) >= -tol)
        assert np.all(np.diff(nu, 2) >= -tol)


class TestConditions:
    def test_M2_gevrey1(self, gevrey1):
        report = check_M2(gevrey1, 200)
        assert report.holds
        assert report.constants == {'H': 2.0, 'C0': 1.0}

    @pytest.mark.parametrize('sigma,N', [(1.0, 2), (0.5, 4)])
    def test_M2star(self, sigma, N):
        report = check_M2star(make_gevrey(sigma), 200)
        assert report.holds
        assert report.constants['N'] == N
        assert report.constants['p0'] == 1

    def test_M2star_fails_for_slow_quotients(self, slow_table):
        report = check_M2star(slow_table)
        assert not report.holds
        assert report.first_violation is not None

    def test_nu_form_of_M2(self, gevrey1):
        report = check_nu_M2_inequality(gevrey1, C0=1.0, H=2.0)
        assert report.holds
        assert report.checked_range == 401

    @pytest.mark.parametrize('sigma,L', [(1.0, 2.0), (2.0, np.sqrt(2.0))])
    def test_doubling(self, sigma, L):
        report = check_nu_doubling(make_gevrey(sigma))
        assert report.holds
        assert report.constants['L'] == pytest.approx(L, abs=0.05)

    def test_doubling_takes_the_largest_ratio_of_the_top_decade(self):
        M = make_gevrey(2.0)
        t = np.geomspace(10.0, 1e4, 31)
        report = check_nu_doubling(M, t)
        nu = AssociatedFunction(M)
        upper = t >= t[-1] / 10.0
        ratios = nu(2.0 * t[upper]) / nu(t[upper])
        assert report.constants['L'] == pytest.approx(ratios.max())
        assert report.constants['L'] > report.details['top_ratio']

    def test_M2_fails_for_quadratic_growth(self):
        p = np.arange(101)
        report = check_M2(make_from_table(p * (p - 1.0)), 100)
        assert not report.holds
        assert report.constants['C0'] == np.inf
        assert report.first_violation is not None

    def test_nu_form_of_M2_with_too_small_H(self, gevrey1):
        report = check_nu_M2_inequality(gevrey1, C0=1.0, H=1.0)
        assert not report.holds
        assert report.details['t_violation'] > 1.0
        assert report.first_violation is not None

    def test_nu_form_without_M2_constants(self):
        p = np.arange(101)
        report = check_nu_M2_inequality(make_from_table(p * (p - 1.0)))
        assert not report.holds
        assert '(M.2) constants unavailable' in report.warnings

    def test_M2star_accepts_a_late_monotone_tail(self):
        # m_p = 1 up to p = 120, then p - 119: 2 m_p <= m_{2p} from p = 61 on
        p = np.arange(1, 201)
        log_m = np.where(p <= 120, 0.0, np.log(np.maximum(p - 119.0, 1.0)))
        report = check_M2star(make_from_table(np.concatenate([[0.0], np.cumsum(log_m)])))
        assert report.holds
        assert report.constants == {'N': 2.0, 'p0': 61.0}
        assert report.details['tried'][2] == {'p0': 61, 'tail_monotone': True}

    def test_nontriviality_dip(self):
        report = check_nontriviality(make_gevrey(0.25), 1000)
        assert report.holds
        assert 50 <= report.details['argmin'] <= 60

    def test_nontriviality_fails_for_slow_quotients(self, slow_table):
        assert not check_nontriviality(slow_table).holds

    def test_inclusion(self, gevrey1, gevrey2):
        report = check_inclusion(gevrey1, gevrey2, 200)
        assert report.holds
        assert report.constants['L'] == 1.0
        assert report.details['nu_form_holds']
        assert not check_inclusion(gevrey2, gevrey1, 200).holds

    def test_range_past_table(self):
        M = make_from_table(make_gevrey(1.0, 20).log_values)
        with pytest.raises(InvalidParameterError):
            check_M2(M, 50)


class TestRSequences:
    def test_invalid(self):
        with pytest.raises(RSequenceError):
            RSequence([1.0, 2.0, 3.0])
        with pytest.raises(RSequenceError):
            RSequence([1.0, 1.0, 3.0, 2.0])

    def test_shrink_identity_rule(self):
        result = shrink_r(make_gevrey(1.0, 10000), RSequence.from_rule(lambda j: j, 10000))
        j = np.arange(10001, dtype=float)
        np.testing.assert_allclose(result.r_prime.values[1:], np.sqrt(j[1:]), rtol=1e-12)
        assert result.holds
        assert result.reports['M2'].holds
        assert result.reports['M2star'].holds

    def test_merge_is_eventually_below_inputs(self):
        inputs = [
            RSequence.from_rule(lambda j: j, 2000),
            RSequence.from_rule(np.sqrt, 2000),
            RSequence.from_rule(lambda j: 1.0 + np.log(j), 2000),
        ]
        result = merge_rsequences(inputs)
        assert len(result.crossovers) == 3
        assert all(crossover is not None for crossover in result.crossovers)
        tail = result.sequence.values[max(result.crossovers):]
        for r in inputs:
            assert np.all(tail <= r.values[max(result.crossovers):] * (1.0 + 1e-12))

    def test_merge_needs_input(self):
        with pytest.raises(RSequenceError):
            merge_rsequences([])

    def test_geometric_witness(self):
        a = 3.0 ** np.arange(200)
        witness = klemma_convert(a, KDirection.GEOMETRIC)
        assert witness.h == pytest.approx(3.0)
        assert np.isfinite(witness.bound)
        assert witness.sequence.diverges
        assert 'floor(log2 j)' in witness.extension_rule

    def test_decaying_witness(self):
        from scipy.special import gammaln
        log_a = -gammaln(np.arange(300) + 1.0)
        witness = klemma_convert(log_a, KDirection.DECAYING, log_scale=True)
        assert np.isfinite(witness.bound)
        assert witness.sequence.values[-1] > 1.0
        assert np.all(np.diff(witness.sequence.values) >= 0)

    @pytest.mark.parametrize('text,direction', [('i', KDirection.GEOMETRIC), ('decaying', KDirection.DECAYING)])
    def test_direction_from_string(self, text, direction):
        assert KDirection.from_string(text) is direction

    def test_direction_invalid(self):
        with pytest.raises(ValueError):
            KDirection.from_string('iii')
