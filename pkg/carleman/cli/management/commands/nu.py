import numpy as np
import pandas as pd

from carleman.cli.base import CarlemanCommand
from carleman.exceptions import InvalidParameterError
from carleman.regularize import RegularizedWeight
from carleman.weights import AssociatedFunction


def fit_slope(t: np.ndarray, values: np.ndarray, t_from: float) -> float:
    """Least-squares slope of log nu against log t over t >= t_from where nu > 0"""
    keep = (t >= t_from) & (values > 0)
    if keep.sum() < 2:
        raise InvalidParameterError(f"Too few positive samples above t = {t_from:g} to fit a slope")
    slope, _ = np.polyfit(np.log(t[keep]), np.log(values[keep]), 1)
    return float(slope)


class Command(CarlemanCommand):
    help = 'Tabulate the associated function nu_M on a log grid'

    def add_run_arguments(self, parser):
        parser.add_argument('--tmin', dest='t_min', type=float)
        parser.add_argument('--tmax', dest='t_max', type=float)
        parser.add_argument('--points', type=int)
        parser.add_argument('--regularized', action='store_true',
                            help='Add the regularized weight nu and its modulus eta')
        parser.add_argument('--fit-slope', action='store_true', help='Report the log-log slope of nu_M')
        parser.add_argument('--fit-from', type=float, default=1e2)

    def run(self, config, options):
        M = config.weight()
        t = config.t_grid()
        evaluated = AssociatedFunction(M).evaluate(t)
        frame = pd.DataFrame({'t': t, 'nu_M': evaluated.value, 'argmax': evaluated.argmax})
        warnings = []
        if evaluated.truncated:
            warnings.append(f"nu_M is truncated by the table end p_max = {M.p_max}")
        if options['regularized']:
            rw = RegularizedWeight.build(M)
            frame['nu'] = rw.nu(t)
            frame['eta'] = rw.eta(t)
            warnings.extend(rw.warnings)
        self.write_frame(frame, config.out)

        payload = {'weight': M.to_dict(), 'rows': len(frame), 'warnings': warnings}
        if options['fit_slope']:
            slope = fit_slope(t, evaluated.value, options['fit_from'])
            payload['slope'] = slope
            self.summary(f"slope {slope:.6f}")
        if config.report:
            self.write_report(config, payload, config.report)
