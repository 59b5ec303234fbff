from carleman.cli.base import CarlemanCommand
from carleman.weights import (
    check_M2, check_M2star, check_nontriviality, check_nu_doubling, check_nu_M2_inequality,
)


class Command(CarlemanCommand):
    help = 'Check (M.2), (M.2)*, the nu doubling bound and nontriviality for one weight'

    def add_run_arguments(self, parser):
        parser.add_argument('--range', dest='check_range', type=int, help='Largest p to check')

    def run(self, config, options):
        M = config.weight()
        reports = {
            'M2': check_M2(M, config.check_range),
            'M2star': check_M2star(M, config.check_range),
            'nu_doubling': check_nu_doubling(M),
            'nontriviality': check_nontriviality(M, config.check_range),
        }
        # the nu-form of (M.2) is only meaningful once the constants exist
        if reports['M2'].holds:
            reports['nu_M2'] = check_nu_M2_inequality(M, C0=reports['M2'].constants['C0'],
                                                      H=reports['M2'].constants['H'])
        for name, report in reports.items():
            status = 'holds' if report.holds else f"fails at {report.first_violation}"
            self.summary(f"{name}: {status}")
        payload = {
            'weight': M.to_dict(),
            'reports': {name: report.to_dict() for name, report in reports.items()},
            'all_hold': all(report.holds for report in reports.values()),
        }
        self.write_report(config, payload, config.report or config.out)
