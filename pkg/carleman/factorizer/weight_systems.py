import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from django.conf import settings

from ..exceptions import InvalidParameterError
from ..grid import GridFunction, NormKind, WeightedNormSpec, class_norm
from ..weights import AssociatedFunction, ConditionReport, WeightSequence

logger = logging.getLogger(__name__)

LogWeight = Callable[[np.ndarray], np.ndarray]

# log C may rise this much between the half and the full sampled range
GROWTH_LOG = 1.0

DEFAULT_KAPPAS = (0.25, 0.5, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0)
DEFAULT_THETAS = tuple(np.round(np.linspace(0.05, 0.95, 19), 2))


def default_x_grid(radius: float = 20.0, points: int = 161) -> np.ndarray:
    return np.linspace(-radius, radius, points)


def exponential_weight(rate: float) -> LogWeight:
    """log of e^{rate |x|}"""
    return lambda x: rate * np.abs(np.asarray(x, dtype=float))


def nu_weight(A: WeightSequence, scale: float) -> LogWeight:
    """log of e^{nu_A(scale |x|)}"""
    nu_A = AssociatedFunction(A)
    return lambda x: nu_A(scale * np.abs(np.asarray(x, dtype=float)))


def gaussian_weight(scale: float) -> LogWeight:
    return lambda x: scale * np.asarray(x, dtype=float) ** 2


def unit_weight() -> LogWeight:
    return lambda x: np.zeros_like(np.asarray(x, dtype=float))


class SystemKind(Enum):
    INCREASING = ("increasing", "w_n <= w_{n+1} pointwise")
    DECREASING = ("decreasing", "v_n >= v_{n+1} pointwise")

    def __init__(self, short_name: str, description: str):
        self.short_name = short_name
        self.description = description

    @classmethod
    def from_string(cls, kind_str: str):
        for kind in cls:
            if kind.short_name == kind_str.lower():
                return kind
        raise ValueError(f"Invalid weight system kind: {kind_str}")


@dataclass(frozen=True, eq=False)
class WeightSystem:
    """Finitely many log-weights, monotone across members on the grid"""
    kind: SystemKind
    members: Tuple[LogWeight, ...]
    x: np.ndarray = field(default_factory=default_x_grid)

    def __post_init__(self):
        if not self.members:
            raise InvalidParameterError("a weight system needs at least one member")
        object.__setattr__(self, 'members', tuple(self.members))
        object.__setattr__(self, 'x', np.asarray(self.x, dtype=float))
        values = self.log_values()
        steps = np.diff(values, axis=0)
        if self.kind is SystemKind.DECREASING:
            steps = -steps
        tol = settings.CARLEMAN_LOG_TOL * (1.0 + np.abs(values[1:]))
        if np.any(steps < -tol):
            bad = int(np.nonzero(np.any(steps < -tol, axis=1))[0][0])
            raise InvalidParameterError(f"Invalid weight system: members {bad} and {bad + 1} "
                                        f"are not {self.kind.short_name}")

    @classmethod
    def from_nu(cls, A: WeightSequence, kind: SystemKind, count: int = 8,
                x: Optional[np.ndarray] = None) -> 'WeightSystem':
        """(e^{nu_A(n .)}) increasing or (e^{nu_A(. / n)}) decreasing, n = 1..count"""
        scales = [n if kind is SystemKind.INCREASING else 1.0 / n for n in range(1, count + 1)]
        members = tuple(nu_weight(A, scale) for scale in scales)
        return cls(kind, members, default_x_grid() if x is None else x)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.x)))

    def log_values(self) -> np.ndarray:
        return np.vstack([member(self.x) for member in self.members])


def _pointwise_excess(diff: np.ndarray, x: np.ndarray) -> Tuple[float, float]:
    half = np.abs(x) <= 0.5 * np.max(np.abs(x))
    return float(diff.max()), float(diff[half].max())


def _pair_excess(left: LogWeight, right: LogWeight, extra: Callable[[np.ndarray], np.ndarray],
                 x: np.ndarray) -> Tuple[float, float]:
    """max over (x, y) of left(x + y) - right(x) - extra(|y|), full and half range"""
    X, Y = np.meshgrid(x, x, indexing='ij')
    diff = left(X + Y) - right(X) - extra(np.abs(Y))
    radius = np.max(np.abs(x))
    half = (np.abs(X) <= 0.5 * radius) & (np.abs(Y) <= 0.5 * radius)
    return float(diff.max()), float(diff[half].max())


def _bounded(full: float, half: float) -> bool:
    return full - half <= GROWTH_LOG


def check_tib_weight(w: LogWeight, A: WeightSequence, x_grid=None, kappa_grid=None) -> ConditionReport:
    """Smallest kappa on the grid with w(x + y) <= C w(x) e^{nu_A(kappa y)} on sampled pairs"""
    x = default_x_grid() if x_grid is None else np.asarray(x_grid, dtype=float)
    kappas = DEFAULT_KAPPAS if kappa_grid is None else tuple(kappa_grid)
    nu_A = AssociatedFunction(A)
    tried = {}
    for kappa in sorted(kappas):
        full, half = _pair_excess(w, w, lambda y: nu_A(kappa * y), x)
        tried[f"{kappa:g}"] = {'log_C': full, 'log_C_half': half}
        if _bounded(full, half):
            return ConditionReport(True, {'kappa': float(kappa), 'C': float(np.exp(max(full, 0.0)))},
                                   len(x) ** 2, details={'tried': tried})
    worst = max(kappas)
    X, Y = np.meshgrid(x, x, indexing='ij')
    diff = w(X + Y) - w(X) - nu_A(worst * np.abs(Y))
    i, j = np.unravel_index(int(diff.argmax()), diff.shape)
    report = ConditionReport(False, {'kappa': float('inf'), 'C': float('inf')}, len(x) ** 2,
                             details={'tried': tried, 'x': float(x[i]), 'y': float(x[j])},
                             warnings=["log C keeps growing with the sampled range for every kappa"])
    report.first_violation = (int(i), int(j))
    return report


def _check_dn(values: np.ndarray, x: np.ndarray) -> ConditionReport:
    """exists n, for all m >= n exists k >= m: w_m^2 <= C w_n w_k"""
    count = len(values)
    for n in range(count):
        found = {}
        top = n + (count - 1 - n) // 2
        for m in range(n, top + 1):
            for k in range(m, count):
                full, half = _pointwise_excess(2.0 * values[m] - values[n] - values[k], x)
                if _bounded(full, half):
                    found[m] = {'k': k, 'log_C': max(full, 0.0)}
                    break
            if m not in found:
                break
        if len(found) == top - n + 1:
            log_c = max(entry['log_C'] for entry in found.values())
            return ConditionReport(True, {'n': float(n), 'C': float(np.exp(log_c))}, count,
                                   details={'m': found, 'tested_m': [n, top]})
    return ConditionReport(False, {}, count, first_violation=(0,),
                           warnings=["no n with a k for every tested m"])


def _check_omega(values: np.ndarray, x: np.ndarray, thetas: Sequence[float]) -> ConditionReport:
    """for all n exists m >= n, for all k >= m exists theta: v_m <= C v_n^{1-theta} v_k^theta"""
    count = len(values)
    fitted = {}
    for n in range(count - 1):
        misses = {}
        for m in range(n, count):
            row = _omega_row(values, x, thetas, n, m)
            if isinstance(row, dict):
                fitted[n] = {'m': m, 'k': row}
                break
            misses[m] = row
        else:
            m, k = min(misses.items())
            return ConditionReport(False, {}, count, first_violation=(n, m, k),
                                   details={'fitted': fitted, 'failing_k': misses},
                                   warnings=[f"no m >= {n} with a theta for every k >= m"])
    return ConditionReport(True, {}, count, details={'fitted': fitted})


def _omega_row(values: np.ndarray, x: np.ndarray, thetas: Sequence[float], n: int, m: int):
    """theta and log C for every k >= m, or the first k without a passing theta"""
    row = {}
    for k in range(m, len(values)):
        passing = []
        for theta in thetas:
            diff = values[m] - (1.0 - theta) * values[n] - theta * values[k]
            full, half = _pointwise_excess(diff, x)
            if _bounded(full, half):
                passing.append((theta, full))
        if not passing:
            return k
        theta, log_c = max(passing)
        row[k] = {'theta': float(theta), 'log_C': max(log_c, 0.0)}
    return row


def check_weight_system_regularity(ws: WeightSystem, thetas: Sequence[float] = DEFAULT_THETAS) -> ConditionReport:
    """The condition that makes the weighted inductive limit regular, searched on the grid"""
    values = ws.log_values()
    if ws.kind is SystemKind.INCREASING:
        report = _check_dn(values, ws.x)
    else:
        report = _check_omega(values, ws.x, thetas)
    if len(ws) == 1:
        report.warnings.append("single member: the condition holds vacuously")
    return report


def check_weight_system_axioms(ws: WeightSystem, kappa_grid=None) -> ConditionReport:
    """Properness and exponential boundedness of a finite system"""
    values = ws.log_values()
    count = len(ws)
    kappas = DEFAULT_KAPPAS if kappa_grid is None else tuple(kappa_grid)
    increasing = ws.kind is SystemKind.INCREASING
    proper = {}
    for n in range(count - 1):
        for m in range(n + 1, count):
            gap = values[m] - values[n] if increasing else values[n] - values[m]
            full = float(gap[np.abs(ws.x) >= 0.95 * ws.radius].min())
            half = float(gap[np.abs(ws.x - 0.5 * ws.radius) <= 0.05 * ws.radius].min())
            if full - half > settings.CARLEMAN_GROWTH_TOL:
                proper[n] = m
                break
    exp_bounded = {}
    for n in range(count):
        for m in range(n, count):
            left, right = (ws.members[n], ws.members[m]) if increasing else (ws.members[m], ws.members[n])
            hit = None
            for kappa in sorted(kappas):
                full, half = _pair_excess(left, right, lambda y: kappa * y, ws.x)
                if _bounded(full, half):
                    hit = {'m': m, 'kappa': float(kappa), 'log_C': max(full, 0.0)}
                    break
            if hit:
                exp_bounded[n] = hit
                break
    holds = len(proper) == count - 1 and len(exp_bounded) == count
    report = ConditionReport(holds, {}, count, details={'proper': proper, 'exp_bounded': exp_bounded,
                                                        'untested_proper': [count - 1]})
    if not holds:
        missing = ([n for n in range(count - 1) if n not in proper]
                   + [n for n in range(count) if n not in exp_bounded])
        report.first_violation = (int(min(missing)),)
    return report


@dataclass
class GSMembership:
    h_grid: List[float]
    k_grid: List[float]
    norms: np.ndarray
    clean: np.ndarray
    roumieu: bool
    beurling: bool
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'h_grid': list(self.h_grid),
            'k_grid': list(self.k_grid),
            'norms': self.norms.tolist(),
            'clean': self.clean.tolist(),
            'roumieu': self.roumieu,
            'beurling': self.beurling,
            'warnings': list(self.warnings),
        }


def gelfand_shilov_membership(f: GridFunction, M: WeightSequence, A: WeightSequence,
                              h_grid: Sequence[float], k_grid: Sequence[float],
                              alpha_max: int = 8) -> GSMembership:
    """GS norms over (h, k); Roumieu if some h = k is clean, Beurling if all are"""
    h_grid, k_grid = list(h_grid), list(k_grid)
    norms = np.zeros((len(h_grid), len(k_grid)))
    clean = np.zeros((len(h_grid), len(k_grid)), dtype=bool)
    warnings = []
    for i, h in enumerate(h_grid):
        for j, k in enumerate(k_grid):
            value = class_norm(f, WeightedNormSpec(M, h=h, k=k, alpha_max=alpha_max, A=A), NormKind.GS)
            norms[i, j] = value.value
            clean[i, j] = np.isfinite(value.value) and not value.warnings
            warnings.extend(f"h = {h:g}, k = {k:g}: {message}" for message in value.warnings)
    diagonal = [clean[i, k_grid.index(h)] for i, h in enumerate(h_grid) if h in k_grid]
    return GSMembership(h_grid, k_grid, norms, clean, bool(any(diagonal)),
                        bool(diagonal) and bool(all(diagonal)), warnings)
