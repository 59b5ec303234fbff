import json
import math
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.test.utils import override_settings

from ..exceptions import CalibrationError, NumericGuardError
from .config import RunConfig

INPUT_ERROR = 2
CALIBRATION_ERROR = 3
NUMERIC_GUARD = 4

# config fields left out of reports so that output locations do not change the bytes
PATH_FIELDS = ('out', 'report', 'input')


def jsonable(value):
    """Plain JSON values; non-finite floats become null"""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class CarlemanCommand(BaseCommand):
    """Shared flags, run-file handling and the exit-code contract"""
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--preset', help='Weight preset such as gevrey:1 or gevrey:2:5000')
        parser.add_argument('--table', help='Text table with one log M_p per line')
        parser.add_argument('--config', help='Run file with key=value lines')
        parser.add_argument('--seed', type=int, help='Seed for randomized sampling')
        parser.add_argument('--out', help='CSV output path (stdout when omitted)')
        parser.add_argument('--report', help='JSON report path')
        parser.add_argument('--log-tol', type=float, help='Override CARLEMAN_LOG_TOL')
        parser.add_argument('--growth-tol', type=float, help='Override CARLEMAN_GROWTH_TOL')
        parser.add_argument('--noise-floor', type=float, help='Override CARLEMAN_NOISE_FLOOR')
        parser.add_argument('--boundary-decay', type=float, help='Override CARLEMAN_BOUNDARY_DECAY')
        self.add_run_arguments(parser)

    def add_run_arguments(self, parser):
        pass

    def run(self, config: RunConfig, options: Dict[str, Any]):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = RunConfig.resolve(options)
            with override_settings(**config.setting_overrides()):
                self.run(config, options)
        except CalibrationError as exc:
            raise CommandError(f"Calibration failed: {exc}", returncode=CALIBRATION_ERROR)
        except NumericGuardError as exc:
            hint = f" (suggested h = {exc.suggested_h:g})" if exc.suggested_h is not None else ''
            raise CommandError(f"Numeric guard: {exc}{hint}", returncode=NUMERIC_GUARD)
        except (ValueError, OSError) as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR)

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit('.', 1)[-1]

    def write_frame(self, frame: pd.DataFrame, path: Optional[str]):
        if path:
            frame.to_csv(path, index=False, float_format='%.17g')
        else:
            self.stdout.write(frame.to_csv(index=False, float_format='%.17g'), ending='')

    def write_report(self, config: RunConfig, payload: Dict[str, Any], path: Optional[str]):
        run = {key: value for key, value in config.to_dict().items() if key not in PATH_FIELDS}
        document = dict(payload, schema_version=settings.SCHEMA_VERSION, command=self.command_name, config=run)
        text = json.dumps(jsonable(document), sort_keys=True, indent=2)
        if path:
            Path(path).write_text(text + '\n', encoding='utf-8')
        else:
            self.stdout.write(text)

    def summary(self, message: str):
        """One-line results go to stderr so stdout stays machine-readable"""
        self.stderr.write(message)
