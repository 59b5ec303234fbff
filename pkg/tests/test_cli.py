import json
from io import StringIO

import numpy as np
import pandas as pd
import pytest
from django.core.management import CommandError, call_command

from carleman.cli import RunConfig
from carleman.cli.management.commands.factorize import member_path
from carleman.grid import GridFunction
from carleman.multiplier import pipeline_scale

from .conftest import SMALL_HALF_WIDTH, SMALL_POINTS

SMALL_GRID = ['--grid-half-width', str(SMALL_HALF_WIDTH), '--grid-points', str(SMALL_POINTS)]


def run(name, *args):
    """stdout and stderr of one command"""
    out, err = StringIO(), StringIO()
    call_command(name, *args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


def fails(name, *args) -> CommandError:
    with pytest.raises(CommandError) as exc:
        run(name, *args)
    return exc.value


def write_table(path, log_values):
    path.write_text('\n'.join(f"{value:.17g}" for value in log_values) + '\n')
    return str(path)


class TestNu:
    def test_vanishes_up_to_one(self):
        out, _ = run('nu', '--preset', 'gevrey:1', '--tmax', '1e4')
        frame = pd.read_csv(StringIO(out))
        assert list(frame.columns) == ['t', 'nu_M', 'argmax']
        assert len(frame) == 400
        assert np.all(frame.loc[frame['t'] <= 1.0, 'nu_M'] == 0.0)
        assert np.all(frame.loc[frame['t'] > 1.5, 'nu_M'] > 0.0)

    def test_slope_of_gevrey_two(self):
        _, err = run('nu', '--preset', 'gevrey:2', '--tmax', '1e6', '--fit-slope')
        slope = float(err.split('slope')[1].split()[0])
        assert slope == pytest.approx(0.5, abs=0.05)

    def test_regularized_columns(self, tmp_path):
        out = tmp_path / 'nu.csv'
        run('nu', '--preset', 'gevrey:1', '--tmax', '1e3', '--points', '50', '--regularized', '--out', str(out))
        frame = pd.read_csv(out)
        assert list(frame.columns) == ['t', 'nu_M', 'argmax', 'nu', 'eta']
        assert len(frame) == 50

    def test_convexity_violation(self, tmp_path):
        table = write_table(tmp_path / 'bad.txt', [0.0, 0.0, 1.0, 3.0, 4.0, 7.0])
        error = fails('nu', '--table', table)
        assert error.returncode == 2
        assert 'p = ' in str(error)

    def test_preset_and_table(self, tmp_path):
        table = write_table(tmp_path / 'ok.txt', [0.0, 0.0, np.log(2.0)])
        assert fails('nu', '--preset', 'gevrey:1', '--table', table).returncode == 2


class TestCheck:
    def test_gevrey_one(self, tmp_path):
        report = tmp_path / 'check.json'
        _, err = run('check', '--preset', 'gevrey:1', '--range', '200', '--report', str(report))
        document = json.loads(report.read_text())
        assert document['all_hold']
        assert document['reports']['M2']['constants'] == {'H': 2.0, 'C0': 1.0}
        assert document['command'] == 'check'
        assert document['schema_version'] == '1.0'
        assert 'M2star: holds' in err

    def test_slow_table_fails_the_star_condition(self, tmp_path):
        p = np.arange(2, 201)
        log_values = np.concatenate([[0.0, 0.0], np.cumsum(np.log1p(np.log(p)))])
        out, err = run('check', '--table', write_table(tmp_path / 'slow.txt', log_values))
        document = json.loads(out)
        assert not document['all_hold']
        assert not document['reports']['M2star']['holds']
        assert document['reports']['M2star']['first_violation'] is not None
        assert 'M2star: fails at' in err

    def test_no_weight(self):
        error = fails('check')
        assert error.returncode == 2
        assert 'No weight given' in str(error)

    def test_reports_are_reproducible(self, tmp_path):
        first, second = tmp_path / 'a.json', tmp_path / 'b.json'
        for path in (first, second):
            run('check', '--preset', 'gevrey:2', '--range', '100', '--report', str(path))
        assert first.read_bytes() == second.read_bytes()


class TestRunFile:
    def test_keys_feed_the_run(self, tmp_path):
        config = tmp_path / 'run.env'
        config.write_text('preset=gevrey:1\nt_max=10\npoints=50\n')
        out, _ = run('nu', '--config', str(config))
        assert len(pd.read_csv(StringIO(out))) == 50

    def test_flags_win_over_the_file(self, tmp_path):
        config = tmp_path / 'run.env'
        config.write_text('preset=gevrey:1\npoints=50\n')
        out, _ = run('nu', '--config', str(config), '--points', '20')
        assert len(pd.read_csv(StringIO(out))) == 20

    @pytest.mark.parametrize('text', ['preset=gevrey:1\ncolour=blue\n', 'preset=gevrey:1\nn_points=100\n',
                                      'preset=gevrey:1\npoints=many\n'])
    def test_invalid_file(self, tmp_path, text):
        config = tmp_path / 'run.env'
        config.write_text(text)
        assert fails('nu', '--config', str(config)).returncode == 2

    def test_missing_file(self, tmp_path):
        assert fails('nu', '--config', str(tmp_path / 'absent.env')).returncode == 2

    def test_overrides_reach_settings(self):
        config = RunConfig.resolve({'preset': 'gevrey:1', 'log_tol': '1e-6', 'k_cap': 64.0})
        assert config.setting_overrides() == {'CARLEMAN_LOG_TOL': 1e-6, 'CARLEMAN_K_CAP': 64.0}
        assert config.with_grid(4.0, 64).n_points == 64


class TestRegularize:
    def test_seeded_report(self, tmp_path):
        reports = [tmp_path / 'a.json', tmp_path / 'b.json']
        for report in reports:
            run('regularize', '--preset', 'gevrey:1', '--seed', '7', '--out', str(tmp_path / 'cache.csv'),
                '--report', str(report))
        assert reports[0].read_bytes() == reports[1].read_bytes()
        document = json.loads(reports[0].read_text())
        assert document['config']['seed'] == 7
        assert document['band']['holds']
        assert document['almost_lipschitz']['holds']
        assert document['regularized']['N'] == 2
        assert list(pd.read_csv(tmp_path / 'cache.csv').columns) == ['t', 'nu', 'eta', 'nu_M']


class TestMultiplier:
    def test_two_tubes(self, tmp_path):
        report = tmp_path / 'p.json'
        out, err = run('multiplier', '--preset', 'gevrey:1', '--tube', '0', '--tube', '1',
                       '--re-min', '-10', '--re-max', '10', '--report', str(report))
        document = json.loads(report.read_text())
        assert [tube['n'] for tube in document['tubes']] == [0.0, 1.0]
        assert all(tube['C'] is not None for tube in document['tubes'])
        assert document['constants_monotone']
        assert 1.5 <= document['calibration']['K'] <= 4096
        frame = pd.read_csv(StringIO(out))
        assert list(frame.columns) == ['n', 're', 'im', 'abs_P', 'lower', 'upper']
        assert 'tube n = 1: C =' in err

    def test_negative_tube(self):
        assert fails('multiplier', '--preset', 'gevrey:1', '--tube', '-1').returncode == 2

    def test_calibration_cap(self):
        assert fails('multiplier', '--preset', 'gevrey:2', '--k-cap', '2', '--re-min', '-1',
                     '--re-max', '1').returncode == 3


class TestFactorize:
    def test_gaussian_roundtrip(self, tmp_path):
        report, u_path, psi_path = tmp_path / 'f.json', tmp_path / 'u.csv', tmp_path / 'psi.csv'
        _, err = run('factorize', '--preset', 'gevrey:1', *SMALL_GRID, '--out', str(u_path),
                     '--psi-out', str(psi_path), '--report', str(report))
        document = json.loads(report.read_text())
        assert document['roundtrip_l2'] <= 1e-6
        assert document['grid'] == {'L': SMALL_HALF_WIDTH, 'n': SMALL_POINTS}
        assert document['kit']['orientation'] == 'forward'
        assert set(document['psi_class']) == {'1', '2', '3'}
        assert GridFunction.read_csv(u_path).n_points == SMALL_POINTS
        assert GridFunction.read_csv(psi_path).half_width == SMALL_HALF_WIDTH
        assert 'roundtrip L2' in err

    def test_zero_input(self, tmp_path):
        source, u_path, report = tmp_path / 'zero.csv', tmp_path / 'u.csv', tmp_path / 'f.json'
        GridFunction(SMALL_HALF_WIDTH, np.zeros(SMALL_POINTS)).write_csv(source)
        run('factorize', '--preset', 'gevrey:1', '--input', str(source), '--out', str(u_path),
            '--report', str(report))
        assert not np.any(GridFunction.read_csv(u_path).samples)
        assert json.loads(report.read_text())['roundtrip_l2'] == 0.0

    def test_overflow_guard(self, multiplier1):
        dual_half_width = SMALL_POINTS / (4.0 * SMALL_HALF_WIDTH)
        h = 1e5 * multiplier1.K / (pipeline_scale(1.0, 2.0) * dual_half_width)
        error = fails('factorize', '--preset', 'gevrey:1', *SMALL_GRID, '--h', f"{h:.17g}")
        assert error.returncode == 4
        assert 'suggested h' in str(error)

    def test_family(self, tmp_path):
        paths = []
        for index, shift in enumerate((-1.0, 0.0, 1.0)):
            path = tmp_path / f"f{index}.csv"
            GridFunction.sample(lambda x, s=shift: np.exp(-np.pi * (x - s) ** 2),
                                SMALL_HALF_WIDTH, SMALL_POINTS).write_csv(path)
            paths.append(str(path))
        out = tmp_path / 'u.csv'
        report = tmp_path / 'family.json'
        run('factorize', '--preset', 'gevrey:1', '--family', *paths, '--out', str(out), '--report', str(report))
        document = json.loads(report.read_text())
        assert len(document['roundtrip_l2']) == 3
        assert max(document['roundtrip_l2']) <= 1e-6
        assert document['uniform_bound'] is not None
        assert all(member_path(str(out), index).is_file() for index in range(3))

    def test_input_and_family(self, tmp_path, gaussian):
        path = tmp_path / 'g.csv'
        gaussian.write_csv(path)
        error = fails('factorize', '--preset', 'gevrey:1', '--input', str(path), '--family', str(path))
        assert error.returncode == 2

    def test_bad_h(self):
        assert fails('factorize', '--preset', 'gevrey:1', '--h', '-1').returncode == 2
