import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from django.conf import settings

from ..exceptions import RSequenceError
from .conditions import ConditionReport, check_M2, check_M2star
from .sequence import WeightSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RSequence:
    """Non-decreasing table r_j, j = 0..j_max, with r_0 = r_1 = 1"""
    values: np.ndarray
    tail_rule: Optional[str] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if len(values) < 2:
            raise RSequenceError(f"Invalid r-sequence: needs j_max >= 1, got {len(values) - 1}")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise RSequenceError("Invalid r-sequence: entries must be positive and finite")
        if abs(values[0] - 1.0) > 1e-12 or abs(values[1] - 1.0) > 1e-12:
            raise RSequenceError(f"Invalid r-sequence: r_0 = {values[0]:g}, r_1 = {values[1]:g}")
        drops = np.nonzero(np.diff(values) < -1e-12 * values[1:])[0]
        if len(drops):
            raise RSequenceError(f"Invalid r-sequence: decreases at j = {int(drops[0]) + 1}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def j_max(self) -> int:
        return len(self.values) - 1

    @property
    def diverges(self) -> bool:
        """r_{j_max} above the configured divergence threshold"""
        return bool(self.values[-1] >= settings.CARLEMAN_DIVERGENCE_THRESHOLD)

    @classmethod
    def from_rule(cls, rule: Callable[[np.ndarray], np.ndarray], j_max: int,
                  tail_rule: Optional[str] = None) -> 'RSequence':
        """r_j = rule(j) for j >= 2"""
        j = np.arange(2, j_max + 1, dtype=float)
        return cls(np.concatenate([[1.0, 1.0], rule(j)]), tail_rule)

    def to_dict(self) -> dict:
        return {
            'j_max': self.j_max,
            'last': float(self.values[-1]),
            'diverges': self.diverges,
            'tail_rule': self.tail_rule,
        }


@dataclass(frozen=True, eq=False)
class MergeResult:
    sequence: RSequence
    knots: List[int]
    crossovers: List[Optional[int]]
    stalled: bool

    def to_dict(self) -> dict:
        return {
            'sequence': self.sequence.to_dict(),
            'knots': self.knots,
            'crossovers': self.crossovers,
            'stalled': self.stalled,
        }


def _crossover(output: np.ndarray, bound: np.ndarray) -> Optional[int]:
    """First index from which output stays at or below bound"""
    above = np.nonzero(output > bound * (1.0 + 1e-12))[0]
    if len(above) == 0:
        return 0
    if above[-1] + 1 >= len(output):
        return None
    return int(above[-1]) + 1


def merge_rsequences(inputs: Sequence[RSequence], j_max: Optional[int] = None) -> MergeResult:
    """One r eventually below every input, by the knot recursion j_1 < j_2 < ..."""
    if not inputs:
        raise RSequenceError("merge needs at least one r-sequence")
    for r in inputs:
        if not isinstance(r, RSequence):
            raise RSequenceError(f"Invalid r-sequence: {r!r}")
    j_max = j_max or min(r.j_max for r in inputs)
    if any(r.j_max < j_max for r in inputs):
        raise RSequenceError(f"inputs shorter than j_max = {j_max}")
    tables = [r.values[:j_max + 1] for r in inputs]
    prefix = [tables[0]]
    for table in tables[1:]:
        prefix.append(np.minimum(prefix[-1], table))
    last = len(tables) - 1

    # the finite family repeats its last member
    def member(l: int) -> np.ndarray:
        return tables[min(l, last)]

    def running_min(l: int) -> np.ndarray:
        return prefix[min(l, last)]

    output = np.ones(j_max + 1)
    knots = [1]
    k = 1
    stalled = False
    while True:
        j_k = knots[-1]
        candidates = np.arange(j_k + 1, j_max + 1)
        ok = (member(k + 1)[j_k + 1:] >= member(k)[j_k]) & (running_min(k + 1)[j_k + 1:] >= k + 1)
        hits = np.nonzero(ok)[0]
        if len(hits) == 0:
            stalled = True
            break
        j_next = int(candidates[hits[0]])
        if k >= 2:
            output[j_k:j_next] = running_min(k)[j_k]
        knots.append(j_next)
        k += 1
    if k >= 2:
        output[knots[-1]:] = running_min(k)[knots[-1]]
    if stalled:
        logger.info("merge stalled after %d knots at j = %d", len(knots), knots[-1])
    merged = RSequence(output, tail_rule=f"constant {output[-1]:g} past j = {knots[-1]}")
    crossovers = [_crossover(output, table) for table in tables]
    return MergeResult(merged, knots, crossovers, stalled)


@dataclass
class ShrinkResult:
    r_prime: RSequence
    weight: WeightSequence
    r_double_prime: np.ndarray
    reports: Dict[str, ConditionReport] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return all(report.holds for report in self.reports.values())

    def to_dict(self) -> dict:
        return {
            'holds': self.holds,
            'r_prime': self.r_prime.to_dict(),
            'weight': self.weight.to_dict(),
            'reports': {name: report.to_dict() for name, report in self.reports.items()},
        }


def shrink_r(M: WeightSequence, r: RSequence) -> ShrinkResult:
    """r''_j = min{r_j, r''_{j-1} m_j/m_{j-1}}, r' = sqrt(r''), N_p = M_p / prod r'_j"""
    J = min(M.p_max, r.j_max)
    log_m = M.log_quotients[:J]
    log_r = np.log(r.values[1:J + 1])
    # log r''_j - log m_j is a running minimum
    start = np.concatenate([[-log_m[0]], log_r[1:] - log_m[1:]])
    log_r2 = np.concatenate([[0.0], np.minimum.accumulate(start) + log_m])
    log_r1 = 0.5 * log_r2
    r_prime = RSequence(np.exp(log_r1), tail_rule="sqrt of the r'' recursion")
    log_n = log_m - log_r1[1:]
    log_N = np.concatenate([[0.0], np.cumsum(log_n)])
    weight = WeightSequence(log_N, log_n, None, f"{M.name} shrunk")

    reports = {}
    tol = settings.CARLEMAN_LOG_TOL
    below = r_prime.values <= r.values[:J + 1] * (1.0 + 1e-12)
    reports['r_prime_below_r'] = ConditionReport(
        bool(below.all()), {}, J,
        first_violation=None if below.all() else (int(np.nonzero(~below)[0][0]),))
    drops = np.nonzero(np.diff(log_n) < -tol * (1.0 + np.abs(log_n[1:])))[0]
    reports['log_convex'] = ConditionReport(
        len(drops) == 0, {}, J, first_violation=None if len(drops) == 0 else (int(drops[0]) + 2,))
    # n_p inherits monotonicity from m_p / r''_p
    ratio_up = np.diff(log_m - log_r2[1:]) >= 0
    n_down = np.diff(log_n) < -tol * (1.0 + np.abs(log_n[1:]))
    inherited = ~(ratio_up & n_down)
    reports['quotients_inherit'] = ConditionReport(
        bool(inherited.all()), {}, J,
        first_violation=None if inherited.all() else (int(np.nonzero(~inherited)[0][0]) + 2,))
    reports['M2'] = check_M2(weight)
    reports['M2star'] = check_M2star(weight)
    for name, report in reports.items():
        if not report.holds:
            logger.warning("shrink_r: %s fails on the table (first violation %s)",
                           name, report.first_violation)
    return ShrinkResult(r_prime, weight, np.exp(log_r2), reports)


class KDirection(Enum):
    """The two growth conversions between h^p and prod r_j"""
    GEOMETRIC = ("i", "sup a_p / h^p finite gives sup a_p / prod r_j finite")
    DECAYING = ("ii", "sup h^p a_p finite for all h gives sup a_p prod r_j finite")

    def __init__(self, short_name: str, description: str):
        self.short_name = short_name
        self.description = description

    @classmethod
    def from_string(cls, direction_str: str):
        for direction in cls:
            if direction.short_name == direction_str.lower() or direction.name.lower() == direction_str.lower():
                return direction
        raise ValueError(f"Invalid direction: {direction_str}")


@dataclass(frozen=True, eq=False)
class KWitness:
    sequence: RSequence
    bound: float
    direction: KDirection
    h: Optional[float]
    extension_rule: str

    def to_dict(self) -> dict:
        return {
            'direction': self.direction.short_name,
            'bound': self.bound,
            'h': self.h,
            'extension_rule': self.extension_rule,
            'sequence': self.sequence.to_dict(),
        }


def klemma_convert(a, direction: KDirection, h: Optional[float] = None,
                   log_scale: bool = False) -> KWitness:
    """Staircase witness r for a positive sequence a_p on its finite table"""
    log_a = np.asarray(a, dtype=float) if log_scale else np.log(np.asarray(a, dtype=float))
    if log_a.ndim != 1 or len(log_a) < 2:
        raise RSequenceError("klemma_convert needs at least a_0 and a_1")
    P = len(log_a) - 1
    j = np.arange(2, P + 1, dtype=float)
    if direction is KDirection.GEOMETRIC:
        if h is None:
            p = np.arange(1, P + 1)
            h = float(np.exp(np.max(log_a[1:] / p)))
        base = max(1.0, h)
        steps = np.maximum(1.0, np.floor(np.log2(j)))
        log_r = np.concatenate([[0.0, 0.0], np.log(base) + np.log(steps)])
        log_bound = float(np.max(log_a - np.cumsum(log_r)))
        rule = f"r_j = {base:g} * max(1, floor(log2 j))"
    else:
        decay = log_a[:-1] - log_a[1:]
        floor = np.minimum.accumulate(decay[::-1])[::-1]
        log_r = np.concatenate([[0.0, 0.0], np.maximum(0.0, floor[1:] - np.log(2.0))])
        log_bound = float(np.max(log_a + np.cumsum(log_r)))
        rule = f"r_j = {np.exp(log_r[-1]):g} for j > {P}"
    sequence = RSequence(np.exp(log_r), tail_rule=rule)
    return KWitness(sequence, float(np.exp(log_bound)), direction, h, rule)
