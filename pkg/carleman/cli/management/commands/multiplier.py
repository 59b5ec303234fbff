import numpy as np
import pandas as pd

from carleman.cli.base import CarlemanCommand
from carleman.multiplier import EntireMultiplier, TubeGrid, verify_tube_bounds
from carleman.regularize import RegularizedWeight


class Command(CarlemanCommand):
    help = 'Calibrate the entire multiplier P and sweep its two-sided bounds over tubes'

    def add_run_arguments(self, parser):
        parser.add_argument('--tube', dest='tubes', type=float, action='append',
                            help='Tube half-width n; repeat for several tubes')
        parser.add_argument('--re-min', type=float, default=-50.0)
        parser.add_argument('--re-max', type=float, default=50.0)
        parser.add_argument('--re-step', type=float, default=0.25)
        parser.add_argument('--im-step', type=float, default=0.25)
        parser.add_argument('--refine', action='store_true', help='Repeat each sweep at half the step')
        parser.add_argument('--k-cap', type=float, help='Override CARLEMAN_K_CAP')

    def run(self, config, options):
        M = config.weight()
        rw = RegularizedWeight.build(M)
        em = EntireMultiplier.build(rw)
        warnings = list(rw.warnings)

        reach = max(abs(options['re_min']), abs(options['re_max']))
        if em.associated.evaluate(reach).truncated:
            warnings.append(f"nu_M is truncated by the table end p_max = {M.p_max} on |Re z| <= {reach:g}; "
                            f"the upper bound there is a lower estimate")

        reports = []
        for n in sorted(set(config.tubes)):
            tube = TubeGrid(n, options['re_min'], options['re_max'], options['re_step'], options['im_step'])
            report = verify_tube_bounds(em, tube, refine=options['refine'])
            if report.suspicious:
                warnings.append(f"C_{n:g} moved by {100 * report.refinement_change:.1f}% under refinement")
            reports.append(report)
            self.summary(f"tube n = {n:g}: C = {report.C:.6g}")

        constants = [report.C for report in reports]
        frame = pd.concat([report.frame.assign(n=report.n) for report in reports], ignore_index=True)
        self.write_frame(frame[['n', 're', 'im', 'abs_P', 'lower', 'upper']], config.out)

        x = np.arange(options['re_min'], options['re_max'] + 0.5 * options['re_step'], options['re_step'])
        payload = {
            'weight': M.to_dict(),
            'regularized': rw.to_dict(),
            'calibration': em.calibration.to_dict(),
            'multiplier': em.to_dict(),
            'tubes': [report.to_dict() for report in reports],
            'constants_monotone': bool(np.all(np.diff(constants) >= 0)),
            'inverse_symbol_bound': em.inverse_symbol_bound(x),
            'warnings': warnings,
        }
        if config.report or config.out:
            self.write_report(config, payload, config.report)
