import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..exceptions import InvalidParameterError
from .sequence import WeightSequence

logger = logging.getLogger(__name__)


class Backend(Enum):
    """Evaluation strategies for the associated function"""
    BRUTE_FORCE = ("brute-force", "supremum of p log t - log M_p over the table")
    CROSSING_COUNT = ("crossing-count", "sum of log(t/m_p) over quotients below t")

    def __init__(self, short_name: str, description: str):
        self.short_name = short_name
        self.description = description

    def __str__(self) -> str:
        return self.short_name

    @classmethod
    def from_string(cls, backend_str: str):
        for backend in cls:
            if backend.short_name == backend_str.lower().replace('_', '-'):
                return backend
        raise ValueError(f"Invalid backend: {backend_str}")


@dataclass(frozen=True, eq=False)
class AssociatedValue:
    """nu_M values with their maximizing p"""
    value: np.ndarray
    argmax: np.ndarray
    truncated: bool

    def to_dict(self) -> dict:
        return {
            'value': np.atleast_1d(self.value).tolist(),
            'argmax': np.atleast_1d(self.argmax).tolist(),
            'truncated': self.truncated,
        }


class AssociatedFunction:
    """nu_M(t) = sup_p (p log t - log M_p)"""

    # rows per block of the brute-force table
    BLOCK = 512

    def __init__(self, source: WeightSequence, backend: Backend = Backend.CROSSING_COUNT):
        self.source = source
        self.backend = backend

    def evaluate(self, t) -> AssociatedValue:
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if np.any(t < 0) or np.any(np.isnan(t)):
            raise InvalidParameterError("Invalid argument: nu_M needs t >= 0")
        if self.backend is Backend.BRUTE_FORCE:
            value, argmax = self._brute_force(t)
            truncated = bool(np.any((argmax == self.source.p_max) & (t > 1.0)))
        else:
            value, argmax, truncated = self._crossing_count(t)
        if truncated:
            logger.warning("nu_M argmax reached p_max = %d of %s; values there are lower bounds",
                           self.source.p_max, self.source.name)
        if scalar:
            return AssociatedValue(float(value[0]), float(argmax[0]), truncated)
        return AssociatedValue(value, argmax, truncated)

    def __call__(self, t):
        return self.evaluate(t).value

    def _brute_force(self, t: np.ndarray):
        log_M = self.source.log_values
        p = np.arange(len(log_M), dtype=float)
        value = np.zeros_like(t)
        argmax = np.zeros_like(t)
        positive = t > 0
        log_t = np.log(t[positive])
        out_value = np.empty_like(log_t)
        out_argmax = np.empty_like(log_t)
        for start in range(0, len(log_t), self.BLOCK):
            rows = np.outer(log_t[start:start + self.BLOCK], p) - log_M
            # p = 0 contributes 0, never 0 * log t
            rows[:, 0] = 0.0
            best = rows.argmax(axis=1)
            out_argmax[start:start + self.BLOCK] = best
            out_value[start:start + self.BLOCK] = rows[np.arange(len(best)), best]
        value[positive] = out_value
        argmax[positive] = out_argmax
        return value, argmax

    def _crossing_count(self, t: np.ndarray):
        source = self.source
        positive = t > 0
        log_t = np.log(np.where(positive, t, 1.0))
        count = np.searchsorted(source.log_quotients, log_t, side='right').astype(float)
        count = np.where(positive, count, 0.0)
        saturated = count >= source.p_max
        truncated = False
        if np.any(saturated):
            if source.generator is not None:
                extended = source.generator.count(np.where(saturated, t, 1.0))
                count = np.where(saturated, np.maximum(extended, count), count)
            else:
                truncated = bool(np.any(saturated & (t > np.exp(source.log_quotients[-1]))))
        value = np.where(count > 0, count * log_t - source.log_M(count), 0.0)
        return np.maximum(value, 0.0), count, truncated


def associated_nu(af: AssociatedFunction, t) -> AssociatedValue:
    """Value and argmax of nu_M at t"""
    return af.evaluate(t)
