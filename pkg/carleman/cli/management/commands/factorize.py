from pathlib import Path

import numpy as np

from carleman.cli.base import CarlemanCommand
from carleman.exceptions import GridError
from carleman.factorizer import build_kit, factorize, factorize_bounded_family, verify_psi_class
from carleman.grid import GridFunction


def _numbers(value: str):
    return tuple(float(item) for item in value.split(',') if item.strip())


def member_path(out: str, index: int) -> Path:
    """u_3.csv style sibling of --out for the index-th family member"""
    path = Path(out)
    return path.with_name(f"{path.stem}_{index}{path.suffix or '.csv'}")


class Command(CarlemanCommand):
    help = 'Factorize f = psi * (g * f) with the multiplier symbol P_h and report the roundtrip'

    def add_run_arguments(self, parser):
        parser.add_argument('--h', help="Pipeline scale h, or 'auto'")
        parser.add_argument('--orientation', choices=['forward', 'inverse'])
        parser.add_argument('--input', help='Grid function CSV with columns x, re, im')
        parser.add_argument('--family', nargs='+', help='Several grid function CSVs sharing one psi')
        parser.add_argument('--kappa', type=float, default=1.0, help='Decay rate of the family seminorm')
        parser.add_argument('--grid-half-width', dest='half_width', type=float)
        parser.add_argument('--grid-points', dest='n_points', type=int)
        parser.add_argument('--psi-out', help='CSV path for psi')
        parser.add_argument('--psi-n', type=_numbers, default=(1.0, 2.0, 3.0),
                            help='Comma-separated decay rates n for the psi class check')
        parser.add_argument('--psi-alpha', type=int, default=8, help='Highest derivative in the psi class check')

    def _inputs(self, config, options):
        if config.input and options['family']:
            raise GridError("Give either --input or --family, not both")
        paths = options['family'] or ([config.input] if config.input else [])
        inputs = [GridFunction.read_csv(path) for path in paths]
        if not inputs:
            gaussian = GridFunction.sample(lambda x: np.exp(-np.pi * x * x), config.half_width, config.n_points)
            return [gaussian]
        for other in inputs[1:]:
            if not inputs[0].same_grid(other):
                raise GridError("Family members must share one grid")
        return inputs

    def run(self, config, options):
        M = config.weight()
        inputs = self._inputs(config, options)
        config = config.with_grid(inputs[0].half_width, inputs[0].n_points)
        kit = build_kit(M, config.h, config.half_width, config.n_points, config.orientation)
        psi_report = verify_psi_class(kit, n_list=options['psi_n'], alpha_max=options['psi_alpha'])
        if options['psi_out']:
            kit.psi.write_csv(options['psi_out'])

        if options['family']:
            outputs, family = factorize_bounded_family(kit, inputs, kappa=options['kappa'])
            if config.out:
                for index, u in enumerate(outputs):
                    u.write_csv(member_path(config.out, index))
            payload = dict(family.to_dict(), h=kit.h, delta_h=kit.delta_h,
                           grid={'L': kit.half_width, 'n': kit.n_points},
                           psi_class=psi_report.summary(), warnings=list(kit.warnings))
            self.summary(f"{len(outputs)} members, max roundtrip {family.max_roundtrip:.3e}, "
                         f"uniform bound {family.uniform_bound:.6g}")
        else:
            u, report = factorize(kit, inputs[0])
            report.psi_class = psi_report.summary()
            if config.out:
                u.write_csv(config.out)
            payload = report.to_dict()
            self.summary(f"roundtrip L2 {report.roundtrip_l2:.3e}, sup {report.roundtrip_sup:.3e}, h = {kit.h:g}")
        payload.update({
            'kit': kit.to_dict(),
            'psi': psi_report.to_dict(),
            'warnings': list(payload['warnings']) + list(psi_report.warnings),
        })
        self.write_report(config, payload, config.report)
