import numpy as np

from carleman.cli.base import CarlemanCommand
from carleman.regularize import RegularizedWeight, verify_almost_lipschitz


class Command(CarlemanCommand):
    help = 'Build the regularized weight nu with its modulus eta and export the cache'

    def add_run_arguments(self, parser):
        parser.add_argument('--exponent', type=int, help='Fix N instead of searching for it')
        parser.add_argument('--pairs', type=int, default=1000, help='Random pairs for the almost-Lipschitz check')
        parser.add_argument('--pair-max', type=float, default=100.0)

    def run(self, config, options):
        M = config.weight()
        rw = RegularizedWeight.build(M, exponent=options['exponent'])
        self.write_frame(rw.to_frame(), config.out)

        pairs = config.rng().uniform(0.0, options['pair_max'], size=(options['pairs'], 2))
        band = rw.verify_band()
        lipschitz = verify_almost_lipschitz(rw, pairs)
        top = rw.cache_t >= rw.cache_t[-1] / 10.0
        ratio = rw.cache_eta[top] / rw.cache_nu[top]
        payload = {
            'regularized': rw.to_dict(),
            'band': band.to_dict(),
            'almost_lipschitz': lipschitz.to_dict(),
            'eta_over_nu_decreasing': bool(np.all(np.diff(ratio) <= 0)),
            'warnings': list(rw.warnings),
        }
        self.summary(f"N = {rw.exponent}, L_cmp = {rw.L_cmp:.6g}, band {'holds' if band.holds else 'fails'}, "
                     f"almost-Lipschitz {'holds' if lipschitz.holds else 'fails'}")
        if config.report:
            self.write_report(config, payload, config.report)
