import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from django.conf import settings

from ..exceptions import InvalidParameterError
from .associated import AssociatedFunction
from .sequence import WeightSequence

logger = logging.getLogger(__name__)


@dataclass
class ConditionReport:
    """Outcome of a condition check on a finite range"""
    holds: bool
    constants: Dict[str, float]
    checked_range: int
    first_violation: Optional[Tuple[int, ...]] = None
    details: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        """Convert report to dictionary for JSON serialization"""
        return {
            'holds': bool(self.holds),
            'constants': {key: float(value) for key, value in self.constants.items()},
            'checked_range': int(self.checked_range),
            'first_violation': list(self.first_violation) if self.first_violation is not None else None,
            'details': _plain(self.details),
            'warnings': list(self.warnings),
        }


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


def _tolerance(values: np.ndarray) -> np.ndarray:
    return settings.CARLEMAN_LOG_TOL * (1.0 + np.abs(values))


def _resolve_range(M: WeightSequence, check_range: Optional[int], needed: int = 1) -> WeightSequence:
    """Make sure M is tabulated far enough for check_range * needed"""
    if check_range is None:
        return M
    if check_range < 1:
        raise InvalidParameterError(f"Invalid range: {check_range}")
    top = check_range * needed
    if top > M.p_max:
        if M.generator is None:
            if check_range > M.p_max:
                raise InvalidParameterError(f"Invalid range: {check_range} exceeds p_max = {M.p_max}")
            return M
        return M.extended(top)
    return M


def default_t_grid(t_min: float = 1e-2, t_max: float = 1e3, points: int = 400) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(t_min, t_max, points)])


def check_M2(M: WeightSequence, check_range: Optional[int] = None,
             h_cap: Optional[int] = None, c_cap: Optional[float] = None) -> ConditionReport:
    """Minimal integer H, then C_0, with M_{p+q} <= C_0 H^{p+q} M_p M_q for p+q <= range"""
    check_range = check_range or M.p_max
    M = _resolve_range(M, check_range)
    h_cap = h_cap or settings.CARLEMAN_H_CAP
    log_c_cap = np.log(c_cap or settings.CARLEMAN_C_CAP)
    n = np.arange(check_range + 1)
    half = n // 2
    log_M = M.log_M(n)
    # log-convex tables are worst at the balanced split p = n // 2
    excess = log_M - log_M[half] - log_M[n - half]
    tol = _tolerance(log_M)
    worst = None
    for H in range(1, h_cap + 1):
        slack = excess - n * np.log(H) - tol
        worst = int(slack.argmax())
        if slack[worst] <= log_c_cap:
            c0 = float(np.exp(max(slack[worst], 0.0)))
            return ConditionReport(
                holds=True, constants={'H': float(H), 'C0': c0}, checked_range=check_range,
                details={'worst_split': [int(half[worst]), int(worst - half[worst])]})
    return ConditionReport(
        holds=False, constants={'H': float(h_cap), 'C0': float(np.inf)}, checked_range=check_range,
        first_violation=(int(half[worst]), int(worst - half[worst])),
        details={'h_cap': h_cap, 'log_c_cap': float(log_c_cap)})


def check_M2star(M: WeightSequence, check_range: Optional[int] = None,
                 n_cap: Optional[int] = None) -> ConditionReport:
    """Smallest (N, p_0) with 2 m_p <= m_{Np} for p_0 <= p <= range

    The tail past p_0 must hold at two or more points, with log(m_{Np} / m_p) monotone there.
    """
    n_cap = n_cap or settings.CARLEMAN_N_CAP
    check_range = check_range or M.p_max
    M = _resolve_range(M, check_range, needed=n_cap)
    log_two = np.log(2.0)
    last_bad = None
    checked = 0
    tried = {}
    for N in range(2, n_cap + 1):
        top = min(check_range, M.p_max // N)
        if top < 2:
            continue
        p = np.arange(1, top + 1)
        lhs = log_two + M.log_m(p)
        rhs = M.log_m(N * p)
        bad = np.nonzero(lhs > rhs + _tolerance(rhs))[0]
        p0 = 1 if len(bad) == 0 else int(p[bad[-1]]) + 1
        checked = top
        tail = (rhs - lhs)[p0 - 1:]
        steps = np.diff(tail)
        slack = _tolerance(tail[1:])
        monotone = bool(len(tail) >= 2 and (np.all(steps >= -slack) or np.all(steps <= slack)))
        tried[N] = {'p0': p0, 'tail_monotone': monotone}
        if monotone:
            return ConditionReport(
                holds=True, constants={'N': float(N), 'p0': float(p0)}, checked_range=top,
                details={'tried': tried, 'tail_margin': float(tail[-1])})
        if len(bad):
            last_bad = (N, int(p[bad[-1]]))
    return ConditionReport(
        holds=False, constants={'N': float(n_cap)}, checked_range=checked,
        first_violation=last_bad, details={'n_cap': n_cap, 'tried': tried})


def check_nu_M2_inequality(M: WeightSequence, t_grid=None, C0: Optional[float] = None,
                           H: Optional[float] = None) -> ConditionReport:
    """2 nu_M(t) <= nu_M(H t) + log C_0 on the grid"""
    if C0 is None or H is None:
        report = check_M2(M)
        if not report.holds:
            return ConditionReport(False, report.constants, 0, report.first_violation,
                                   warnings=["(M.2) constants unavailable"])
        C0 = report.constants['C0'] if C0 is None else C0
        H = report.constants['H'] if H is None else H
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    nu = AssociatedFunction(M)
    left = 2.0 * nu(t)
    right = nu(H * t) + np.log(C0)
    slack = left - right
    bad = np.nonzero(slack > _tolerance(right))[0]
    report = ConditionReport(
        holds=len(bad) == 0, constants={'H': float(H), 'C0': float(C0)}, checked_range=len(t),
        details={'max_slack': float(slack.max())})
    if len(bad):
        report.first_violation = (int(bad[0]),)
        report.details['t_violation'] = float(t[bad[0]])
    return report


def check_nu_doubling(M: WeightSequence, t_grid=None) -> ConditionReport:
    """nu_M(2t) <= L nu_M(t) + log C, L the largest ratio over the top decade of the grid"""
    t = np.geomspace(1.0, 1e4, 400) if t_grid is None else np.asarray(t_grid, dtype=float)
    nu = AssociatedFunction(M)
    base = nu(t)
    doubled = nu(2.0 * t)
    active = np.nonzero(base > 0)[0]
    if len(active) == 0:
        # nu vanishes on the whole grid
        return ConditionReport(True, {'L': 1.0, 'C': float(np.exp(doubled.max()))}, len(t))
    top = active[-1]
    upper = (t >= t[top] / 10.0) & (base > 0)
    upper_ratios = doubled[upper] / base[upper]
    L = float(upper_ratios.max())
    log_c = max(float(np.max(doubled - L * base)), 0.0)
    ratios = doubled[active] / base[active]
    return ConditionReport(
        holds=bool(np.isfinite(L) and L <= settings.CARLEMAN_L_CAP),
        constants={'L': L, 'C': float(np.exp(log_c))}, checked_range=len(t),
        details={'top_ratio': float(doubled[top] / base[top]), 'ratio_min': float(ratios.min()),
                 'top_decade_from': float(t[upper][0])})


def check_inclusion(M: WeightSequence, N: WeightSequence, check_range: Optional[int] = None,
                    t_grid=None) -> ConditionReport:
    """M_p <= C L^p N_p on the range, minimal L on a quarter-step grid then C"""
    check_range = check_range or min(M.p_max, N.p_max)
    M = _resolve_range(M, check_range)
    N = _resolve_range(N, check_range)
    p = np.arange(check_range + 1)
    gap = M.log_M(p) - N.log_M(p)
    log_c_cap = np.log(settings.CARLEMAN_C_CAP)
    rate = gap[1:] / p[1:]
    growth = float(rate[-1] - rate[max(check_range // 2 - 1, 0)])
    details = {'growth_rate': float(rate[-1]), 'growth': growth}
    if growth > settings.CARLEMAN_GROWTH_TOL:
        worst = int(np.argmax(gap - p * np.log(settings.CARLEMAN_L_CAP)))
        return ConditionReport(False, {'L': float('inf'), 'C': float('inf')}, check_range,
                               first_violation=(worst,), details=details,
                               warnings=["(log M_p - log N_p)/p keeps growing"])
    for L in np.arange(1.0, settings.CARLEMAN_L_CAP + 0.25, 0.25):
        slack = gap - p * np.log(L) - _tolerance(gap)
        worst = float(slack.max())
        if worst <= log_c_cap:
            C = float(np.exp(max(worst, 0.0)))
            t = np.geomspace(1e-1, 1e2, 200) if t_grid is None else np.asarray(t_grid, dtype=float)
            nu_form = AssociatedFunction(N)(t) - AssociatedFunction(M)(L * t) - np.log(C)
            details.update({'nu_form_max_slack': float(nu_form.max()),
                            'nu_form_holds': bool(np.all(nu_form <= _tolerance(nu_form)))})
            return ConditionReport(True, {'L': float(L), 'C': C}, check_range, details=details)
    worst_p = int(np.argmax(gap - p * np.log(settings.CARLEMAN_L_CAP)))
    return ConditionReport(False, {'L': float('inf'), 'C': float('inf')}, check_range,
                           first_violation=(worst_p,), details=details)


def check_nontriviality(M: WeightSequence, check_range: Optional[int] = None) -> ConditionReport:
    """Tail behaviour of m_p / log p"""
    check_range = check_range or M.p_max
    M = _resolve_range(M, check_range)
    p = np.arange(2, check_range + 1)
    ratio = np.exp(M.log_m(p)) / np.log(p)
    window = p >= check_range // 2
    tail = ratio[window]
    trend = float(tail[-1] / tail[0] - 1.0)
    holds = trend > 1e-3
    report = ConditionReport(
        holds=holds,
        constants={'tail_min': float(tail.min()), 'trend': trend},
        checked_range=check_range,
        details={'argmin': int(p[ratio.argmin()]), 'global_min': float(ratio.min())})
    if not holds:
        report.first_violation = (int(p[window][tail.argmin()]),)
    return report
