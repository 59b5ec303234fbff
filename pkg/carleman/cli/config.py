from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from decouple import Config, Csv, RepositoryEnv, UndefinedValueError
from django.conf import settings

from ..exceptions import InvalidParameterError
from ..factorizer import Orientation
from ..weights import WeightSequence, load_weight, read_table

# run-file keys that map onto CARLEMAN_* settings for the duration of a command
SETTING_KEYS = {
    'log_tol': 'CARLEMAN_LOG_TOL',
    'growth_tol': 'CARLEMAN_GROWTH_TOL',
    'noise_floor': 'CARLEMAN_NOISE_FLOOR',
    'boundary_decay': 'CARLEMAN_BOUNDARY_DECAY',
    'k_cap': 'CARLEMAN_K_CAP',
}


def _tube_list(value: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in Csv()(value))


def _h_policy(value) -> Union[str, float]:
    if isinstance(value, str) and value.strip().lower() == 'auto':
        return 'auto'
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    """Everything one command run needs, from the run file and the flags"""
    preset: Optional[str] = None
    table: Optional[str] = None
    half_width: float = field(default_factory=lambda: settings.CARLEMAN_GRID_HALF_WIDTH)
    n_points: int = field(default_factory=lambda: settings.CARLEMAN_GRID_POINTS)
    h: Union[str, float] = 'auto'
    orientation: str = 'forward'
    tubes: Tuple[float, ...] = (0.0, 1.0)
    t_min: float = 1e-2
    t_max: float = 1e4
    points: int = 400
    check_range: Optional[int] = None
    input: Optional[str] = None
    out: Optional[str] = None
    report: Optional[str] = None
    seed: int = field(default_factory=lambda: settings.CARLEMAN_SEED)
    log_tol: Optional[float] = None
    growth_tol: Optional[float] = None
    noise_floor: Optional[float] = None
    boundary_decay: Optional[float] = None
    k_cap: Optional[float] = None

    CASTS = {
        'preset': str, 'table': str, 'half_width': float, 'n_points': int, 'h': _h_policy,
        'orientation': str, 'tubes': _tube_list, 't_min': float, 't_max': float, 'points': int,
        'check_range': int, 'input': str, 'out': str, 'report': str, 'seed': int,
        'log_tol': float, 'growth_tol': float, 'noise_floor': float, 'boundary_decay': float,
        'k_cap': float,
    }

    def __post_init__(self):
        self.validate()

    @classmethod
    def read_file(cls, path: Union[str, Path]) -> Dict[str, Any]:
        """key=value pairs of a run file, cast to their field types"""
        path = Path(path)
        if not path.is_file():
            raise InvalidParameterError(f"Invalid config path: {path}")
        repository = RepositoryEnv(str(path))
        unknown = sorted(set(repository.data) - set(cls.CASTS))
        if unknown:
            raise InvalidParameterError(f"Invalid config keys in {path}: {', '.join(unknown)}")
        source = Config(repository)
        values = {}
        for name in sorted(repository.data):
            try:
                values[name] = source(name, cast=cls.CASTS[name])
            except (ValueError, UndefinedValueError) as exc:
                raise InvalidParameterError(f"Invalid config value for {name} in {path}: {exc}") from exc
        return values

    @classmethod
    def resolve(cls, options: Dict[str, Any]) -> 'RunConfig':
        """Defaults, then the run file named by --config, then the flags that were given"""
        values = {}
        if options.get('config'):
            values.update(cls.read_file(options['config']))
        names = {item.name for item in fields(cls)}
        for name, value in options.items():
            if name in names and value is not None:
                if isinstance(value, str):
                    value = cls.CASTS[name](value)
                elif isinstance(value, list):
                    value = tuple(value)
                values[name] = value
        return cls(**values)

    def validate(self):
        if self.preset and self.table:
            raise InvalidParameterError("Give either --preset or --table, not both")
        if not self.half_width > 0:
            raise InvalidParameterError(f"Invalid grid half-width: {self.half_width}")
        n = int(self.n_points)
        if n != self.n_points or n < 8 or n & (n - 1):
            raise InvalidParameterError(f"Invalid n_points: {self.n_points} must be a power of two >= 8")
        if self.h != 'auto' and not (np.isfinite(self.h) and self.h > 0):
            raise InvalidParameterError(f"Invalid h: {self.h}")
        Orientation.from_string(self.orientation)
        if any(not n >= 0 for n in self.tubes):
            raise InvalidParameterError(f"Invalid tube list: {self.tubes}")
        if not (0 < self.t_min < self.t_max) or self.points < 2:
            raise InvalidParameterError(f"Invalid t-grid: [{self.t_min}, {self.t_max}] with {self.points} points")
        if self.check_range is not None and self.check_range < 1:
            raise InvalidParameterError(f"Invalid range: {self.check_range}")
        for name in SETTING_KEYS:
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidParameterError(f"Invalid {name}: {value} must be positive")

    def setting_overrides(self) -> Dict[str, float]:
        return {setting: getattr(self, name) for name, setting in SETTING_KEYS.items()
                if getattr(self, name) is not None}

    def with_grid(self, half_width: float, n_points: int) -> 'RunConfig':
        return replace(self, half_width=half_width, n_points=n_points)

    def weight(self) -> WeightSequence:
        if self.table:
            return read_table(self.table)
        if not self.preset:
            raise InvalidParameterError("No weight given: pass --preset or --table")
        return load_weight(self.preset)

    def t_grid(self) -> np.ndarray:
        return np.geomspace(self.t_min, self.t_max, self.points)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def to_dict(self) -> dict:
        out = {}
        for item in fields(self):
            value = getattr(self, item.name)
            out[item.name] = list(value) if isinstance(value, tuple) else value
        return out
