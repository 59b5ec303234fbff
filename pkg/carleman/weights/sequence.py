import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from django.conf import settings
from scipy.special import gammaln

from ..exceptions import InvalidParameterError, RangeError, WeightSequenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GevreyGenerator:
    """Closed form M_p = p!^sigma"""
    sigma: float

    def log_values(self, p) -> np.ndarray:
        return self.sigma * gammaln(np.asarray(p, dtype=float) + 1.0)

    def log_quotients(self, p) -> np.ndarray:
        return self.sigma * np.log(np.asarray(p, dtype=float))

    def count(self, t) -> np.ndarray:
        """Number of p >= 1 with m_p <= t"""
        log_t = np.log(np.asarray(t, dtype=float))
        p = np.floor(np.exp(log_t / self.sigma))
        p = np.where(p >= 1.0, p, 0.0)
        # float rounding at exact crossings
        p = np.where((p >= 1.0) & (self.sigma * np.log(np.maximum(p, 1.0)) > log_t), p - 1.0, p)
        p = np.where(self.sigma * np.log(p + 1.0) <= log_t, p + 1.0, p)
        return p

    def describe(self) -> str:
        return f"gevrey:{self.sigma:g}"


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Finite table of log M_p, p = 0..p_max, with an optional generator"""
    log_values: np.ndarray
    log_quotients: np.ndarray
    generator: Optional[GevreyGenerator] = None
    name: str = 'table'
    growth_onset: int = field(init=False, default=1)

    def __post_init__(self):
        values = np.array(self.log_values, dtype=float)
        quotients = np.array(self.log_quotients, dtype=float)
        values.setflags(write=False)
        quotients.setflags(write=False)
        object.__setattr__(self, 'log_values', values)
        object.__setattr__(self, 'log_quotients', quotients)
        object.__setattr__(self, 'growth_onset', _growth_onset(values))

    @property
    def p_max(self) -> int:
        return len(self.log_values) - 1

    @property
    def quotients(self) -> np.ndarray:
        """m_p = M_p / M_{p-1} for p = 1..p_max"""
        return np.exp(self.log_quotients)

    def log_M(self, p) -> np.ndarray:
        """log M_p for arbitrary p, falling back on the generator past the table"""
        p = np.asarray(p, dtype=float)
        inside = p <= self.p_max
        if np.all(inside):
            return self.log_values[p.astype(np.int64)]
        if self.generator is None:
            raise RangeError(f"p = {int(p.max())} beyond table end {self.p_max} of {self.name}")
        out = self.generator.log_values(p)
        out = np.where(inside, self.log_values[np.where(inside, p, 0).astype(np.int64)], out)
        return out

    def log_m(self, p) -> np.ndarray:
        """log m_p for arbitrary p >= 1"""
        p = np.asarray(p, dtype=float)
        inside = p <= self.p_max
        if np.all(inside):
            return self.log_quotients[p.astype(np.int64) - 1]
        if self.generator is None:
            raise RangeError(f"p = {int(p.max())} beyond table end {self.p_max} of {self.name}")
        out = self.generator.log_quotients(p)
        idx = np.where(inside, p, 1).astype(np.int64) - 1
        return np.where(inside, self.log_quotients[idx], out)

    def extended(self, p_max: int) -> 'WeightSequence':
        """Re-tabulate from the generator up to p_max"""
        if p_max <= self.p_max:
            return self
        if self.generator is None:
            raise RangeError(f"{self.name} has no generator to extend past p = {self.p_max}")
        return _from_generator(self.generator, p_max)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'p_max': self.p_max,
            'generator': self.generator.describe() if self.generator else None,
            'growth_onset': self.growth_onset,
        }

    def __repr__(self) -> str:
        return f"WeightSequence({self.name}, p_max={self.p_max})"


def _growth_onset(log_values: np.ndarray) -> int:
    """First index beyond which (log M_p)/p is non-decreasing on the table"""
    p = np.arange(1, len(log_values))
    ratio = log_values[1:] / p
    drops = np.nonzero(np.diff(ratio) < 0)[0]
    if len(drops) == 0:
        return 1
    return int(drops[-1]) + 2


def _from_generator(generator: GevreyGenerator, p_max: int) -> WeightSequence:
    p = np.arange(1, p_max + 1)
    quotients = generator.log_quotients(p)
    values = generator.log_values(np.arange(p_max + 1))
    return WeightSequence(values, quotients, generator, generator.describe())


def make_gevrey(sigma: float, p_max: Optional[int] = None) -> WeightSequence:
    """Gevrey sequence p!^sigma tabulated up to p_max"""
    if p_max is None:
        p_max = settings.CARLEMAN_P_MAX
    if not np.isfinite(sigma) or sigma <= 0:
        raise InvalidParameterError(f"Invalid Gevrey exponent: {sigma}")
    if p_max < 2:
        raise InvalidParameterError(f"Invalid table length: p_max = {p_max}")
    return _from_generator(GevreyGenerator(float(sigma)), int(p_max))


def make_from_table(log_values, name: str = 'table') -> WeightSequence:
    """Validate a table of log M_p and wrap it"""
    values = np.asarray(log_values, dtype=float).ravel()
    tol = settings.CARLEMAN_LOG_TOL
    if len(values) < 3:
        raise WeightSequenceError(
            f"Table needs at least 3 entries, got {len(values)}", invariant='length')
    if not np.all(np.isfinite(values)):
        bad = int(np.nonzero(~np.isfinite(values))[0][0])
        raise WeightSequenceError(f"Non-finite log M_{bad}", invariant='finite', index=bad)
    for p in (0, 1):
        if abs(values[p]) > tol:
            raise WeightSequenceError(
                f"M_{p} must equal 1 (log M_{p} = {values[p]:g})", invariant='normalization', index=p)
    second = values[:-2] + values[2:] - 2.0 * values[1:-1]
    scale = tol * (1.0 + np.abs(values[1:-1]))
    bad = np.nonzero(second < -scale)[0]
    if len(bad):
        p = int(bad[0]) + 1
        raise WeightSequenceError(
            f"log-convexity fails at p = {p}: "
            f"log M_{p - 1} + log M_{p + 1} < 2 log M_{p}",
            invariant='log-convexity', index=p)
    values[:2] = 0.0
    return WeightSequence(values, np.diff(values), None, name)


def read_table(path: Union[str, Path]) -> WeightSequence:
    """Load a plain-text table with one log M_p per line"""
    path = Path(path)
    if not path.is_file():
        raise InvalidParameterError(f"Invalid table path: {path}")
    text = path.read_text().split()
    if not text:
        raise WeightSequenceError(f"Empty table: {path}", invariant='length')
    try:
        values = [float(token) for token in text]
    except ValueError as exc:
        raise WeightSequenceError(f"Unreadable table {path}: {exc}", invariant='format') from exc
    return make_from_table(values, name=path.name)


def load_weight(spec: str, p_max: Optional[int] = None) -> WeightSequence:
    """Resolve a preset such as gevrey:1 or gevrey:2:5000, or a table path"""
    spec = (spec or '').strip()
    if spec.lower().startswith('gevrey:'):
        parts = spec.split(':')
        try:
            sigma = float(parts[1])
            if len(parts) > 2:
                p_max = int(parts[2])
        except (IndexError, ValueError):
            raise InvalidParameterError(f"Invalid preset: {spec}")
        if len(parts) > 3:
            raise InvalidParameterError(f"Invalid preset: {spec}")
        return make_gevrey(sigma, p_max)
    if spec and Path(spec).is_file():
        return read_table(spec)
    raise InvalidParameterError(f"Invalid preset: {spec}")
