import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from django.conf import settings
from scipy import integrate
from scipy.interpolate import PchipInterpolator
from scipy.special import comb

from ..exceptions import CalibrationError, InvalidParameterError
from ..weights import AssociatedFunction, ConditionReport, WeightSequence

logger = logging.getLogger(__name__)


class _TailIntegral:
    """
    J(t) = int_t^inf nu_M(s) s^{-1-N} ds.

    On [m_p, m_{p+1}) nu_M(s) = p log s - log M_p, so every segment has a
    closed-form antiderivative; segments are summed from the top of the
    table down. Past the table nu_M follows the fitted power law c s^a.
    """

    def __init__(self, table: WeightSequence, exponent: int, growth: 'PowerGrowth'):
        if growth.exponent >= exponent:
            raise CalibrationError(
                f"nu_M grows like t^{growth.exponent:.3f}; the integral diverges for N = {exponent}")
        self.exponent = exponent
        self.table = table
        self.growth = growth
        self.log_b = table.log_quotients
        P = len(self.log_b)
        p = np.arange(1, P, dtype=float)
        lo, hi = self.log_b[:-1], self.log_b[1:]
        log_M = table.log_values[1:P]
        pieces = p * (self._A(hi) - self._A(lo)) - log_M * (self._B(hi) - self._B(lo))
        self.top_log_b = float(self.log_b[-1])
        self.model_tail = self._model(self.top_log_b)
        suffix = np.cumsum(pieces[::-1])[::-1]
        self.suffix = np.concatenate([suffix, [0.0]]) + self.model_tail

    def _A(self, log_s):
        N = self.exponent
        return -np.exp(-N * log_s) * (N * log_s + 1.0) / N**2

    def _B(self, log_s):
        N = self.exponent
        return -np.exp(-N * log_s) / N

    def _model(self, log_s):
        a, N = self.growth.exponent, self.exponent
        return np.exp(self.growth.log_coefficient + (a - N) * log_s) / (N - a)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.suffix[0])
        positive = t > 0
        log_t = np.log(np.where(positive, t, 1.0))
        count = np.searchsorted(self.log_b, log_t, side='right')
        count = np.where(positive, count, 0)
        P = len(self.log_b)
        inner = (count >= 1) & (count < P)
        if np.any(inner):
            p = count[inner]
            lt = log_t[inner]
            upper = self.log_b[p]
            partial = p * (self._A(upper) - self._A(lt)) - self.table.log_values[p] * (self._B(upper) - self._B(lt))
            out[inner] = partial + self.suffix[p]
        beyond = count >= P
        if np.any(beyond):
            out[beyond] = self._model(log_t[beyond])
        return out

    def share_of_model(self, t: np.ndarray) -> np.ndarray:
        """Fraction of J(t) carried by the power-law tail"""
        t = np.asarray(t, dtype=float)
        full = self(t)
        share = np.where(np.log(np.maximum(t, 1e-300)) >= self.top_log_b, 1.0, self.model_tail / full)
        return share


@dataclass(frozen=True)
class PowerGrowth:
    """nu_M(s) ~ c s^a fitted over the last decade of the table"""
    exponent: float
    log_coefficient: float
    misfit: float
    fitted_from: float

    @classmethod
    def fit(cls, table: WeightSequence) -> 'PowerGrowth':
        top = float(table.log_quotients[-1])
        log_s = np.linspace(top - np.log(10.0), top, 64)
        count = np.searchsorted(table.log_quotients, log_s, side='right')
        nu = count * log_s - table.log_values[count]
        usable = nu > 0
        if usable.sum() < 2:
            raise CalibrationError(f"{table.name}: table too short to fit the growth of nu_M")
        slope, intercept = np.polyfit(log_s[usable], np.log(nu[usable]), 1)
        misfit = float(np.max(np.abs(np.log(nu[usable]) - (slope * log_s[usable] + intercept))))
        return cls(float(slope), float(intercept), misfit, float(np.exp(top)))


def _regularize_table(M: WeightSequence) -> WeightSequence:
    if M.generator is not None:
        return M.extended(settings.CARLEMAN_REGULARIZE_TABLE)
    return M


def _band_gap(nu: np.ndarray, nu_M: np.ndarray, L: float) -> float:
    log_L = np.log(L)
    upper = nu - L * nu_M - log_L
    lower = nu_M / L - log_L - nu
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class ExponentChoice:
    exponent: int
    L: float
    C: float

    def to_dict(self) -> dict:
        return {'N': self.exponent, 'L': self.L, 'C': self.C}


def _fit_bound(integral: _TailIntegral, t: np.ndarray, nu_M: np.ndarray) -> ExponentChoice:
    """Fitted (L, C) with integral <= L nu_M + log C on the grid"""
    N = integral.exponent
    nu = t**N * integral(t)
    fit_rows = nu_M >= 1.0
    L = max(1.0, float(np.max(nu[fit_rows] / nu_M[fit_rows]))) if np.any(fit_rows) else 1.0
    log_c = max(0.0, float(np.max(nu - L * nu_M)))
    return ExponentChoice(N, L, float(np.exp(log_c)))


def _default_fit_grid() -> np.ndarray:
    return np.geomspace(1e-2, 1e4, 256)


def choose_exponent(M: WeightSequence, t_grid=None) -> ExponentChoice:
    """Smallest N whose regularizing integral stays below L nu_M + log C on the grid"""
    table = _regularize_table(M)
    growth = PowerGrowth.fit(table)
    t = _default_fit_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    nu_M = AssociatedFunction(M)(t)
    for N in range(1, settings.CARLEMAN_EXPONENT_CAP + 1):
        if growth.exponent >= N - 0.05:
            logger.debug("N = %d skipped: nu_M ~ t^%.3f", N, growth.exponent)
            continue
        choice = _fit_bound(_TailIntegral(table, N, growth), t, nu_M)
        if choice.L <= settings.CARLEMAN_L_CAP:
            return choice
    raise CalibrationError(
        f"No exponent N <= {settings.CARLEMAN_EXPONENT_CAP} bounds the integral for {M.name}; "
        f"check (M.2)* or refine the grid")


class RegularizedWeight:
    """
    The pair (nu, eta) built from nu_M:

        nu(t)  = t^N int_t^inf nu_M(s) s^{-1-N} ds
        eta(t) = (sum_{j<N} C(N, j) t^j) int_t^inf nu_M(s) s^{-1-N} ds
    """

    def __init__(self, source: WeightSequence, exponent: int, integral: _TailIntegral,
                 choice: ExponentChoice):
        self.source = source
        self.exponent = exponent
        self._integral = integral
        self.growth = integral.growth
        self.C_fit = choice.C
        self.L_fit = choice.L
        self.warnings: List[str] = []
        self.associated = AssociatedFunction(source)

        self.cache_t = np.geomspace(settings.CARLEMAN_CACHE_T_MIN, settings.CARLEMAN_CACHE_T_MAX,
                                    settings.CARLEMAN_CACHE_POINTS)
        self.cache_nu = self.nu(self.cache_t)
        self.cache_eta = self.eta(self.cache_t)
        self._interpolant = PchipInterpolator(np.log(self.cache_t), self.cache_nu)
        self.cache_nu_M = self.associated(self.cache_t)
        self.L_cmp = self._comparison_constant()
        self.C_cmp = self.L_cmp

        self.extrapolated = bool(self.cache_t[-1] >= np.exp(integral.top_log_b))
        if self.extrapolated:
            self._warn(f"nu past t = {np.exp(integral.top_log_b):.4g} uses the fitted power law "
                       f"t^{self.growth.exponent:.4f}")
        budget = np.max(integral.share_of_model(self.cache_t) * np.expm1(self.growth.misfit))
        if budget > settings.CARLEMAN_QUAD_RTOL:
            self._warn(f"tail model error up to {budget:.2e} relative exceeds the quadrature tolerance")

    @classmethod
    def build(cls, M: WeightSequence, exponent: Optional[int] = None, t_grid=None) -> 'RegularizedWeight':
        table = _regularize_table(M)
        growth = PowerGrowth.fit(table)
        if exponent is None:
            exponent = choose_exponent(M, t_grid).exponent
        integral = _TailIntegral(table, int(exponent), growth)
        t = _default_fit_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
        choice = _fit_bound(integral, t, AssociatedFunction(M)(t))
        return cls(M, choice.exponent, integral, choice)

    def _warn(self, message: str):
        logger.warning("%s: %s", self.source.name, message)
        self.warnings.append(message)

    def _comparison_constant(self) -> float:
        """Smallest L >= 1 with nu_M/L - log L <= nu <= L nu_M + log L on the cache"""
        tol = settings.CARLEMAN_LOG_TOL
        lo, hi = 1.0, float(settings.CARLEMAN_L_CAP)
        if _band_gap(self.cache_nu, self.cache_nu_M, lo) <= tol:
            return lo
        if _band_gap(self.cache_nu, self.cache_nu_M, hi) > tol:
            raise CalibrationError(f"nu and nu_M are not comparable with L <= {hi:g}")
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if _band_gap(self.cache_nu, self.cache_nu_M, mid) <= tol:
                hi = mid
            else:
                lo = mid
        return hi

    def tail_integral(self, t) -> np.ndarray:
        return self._integral(np.asarray(t, dtype=float))

    def nu(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidParameterError("Invalid argument: nu needs t >= 0")
        return t**self.exponent * self._integral(t)

    def eta(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidParameterError("Invalid argument: eta needs t >= 0")
        N = self.exponent
        polynomial = sum(comb(N, j, exact=True) * t**j for j in range(N))
        return polynomial * self._integral(t)

    def nu_cached(self, t):
        """Monotone interpolation of nu between cache nodes"""
        t = np.asarray(t, dtype=float)
        inside = (t >= self.cache_t[0]) & (t <= self.cache_t[-1])
        direct = self.nu(np.where(inside, self.cache_t[0], t))
        interpolated = self._interpolant(np.log(np.where(inside, t, self.cache_t[0])))
        return np.where(inside, interpolated, direct)

    def nu_substituted(self, t: float) -> float:
        """int_1^inf nu_M(ts) s^{-1-N} ds by adaptive quadrature in u = log s"""
        if t <= 0:
            return 0.0
        N = self.exponent
        table = self._integral.table
        log_t = np.log(t)
        top = self._integral.top_log_b
        growth = self.growth

        def integrand(u):
            log_s = log_t + u
            count = int(np.searchsorted(table.log_quotients, log_s, side='right'))
            if count == 0:
                return 0.0
            return (count * log_s - table.log_values[count]) * np.exp(-N * u)

        u_break = max(top - log_t, 0.0)
        value = 0.0
        if u_break > 0:
            breaks = table.log_quotients[(table.log_quotients > log_t) & (table.log_quotients < top)] - log_t
            points = breaks[:: max(1, len(breaks) // 200)][:200]
            value, _ = integrate.quad(integrand, 0.0, u_break, points=points if len(points) else None,
                                      limit=4000, epsabs=0.0, epsrel=1e-11)
        a = growth.exponent
        value += np.exp(growth.log_coefficient + a * log_t + (a - N) * u_break) / (N - a)
        return float(value)

    def verify_band(self) -> ConditionReport:
        gap = _band_gap(self.cache_nu, self.cache_nu_M, self.L_cmp)
        return ConditionReport(
            holds=gap <= settings.CARLEMAN_LOG_TOL,
            constants={'L_cmp': self.L_cmp},
            checked_range=len(self.cache_t),
            details={'max_gap': gap})

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.cache_t, 'nu': self.cache_nu, 'eta': self.cache_eta,
                             'nu_M': self.cache_nu_M})

    def write_csv(self, path: Union[str, Path]):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    def to_dict(self) -> dict:
        return {
            'source': self.source.name,
            'N': self.exponent,
            'L_cmp': self.L_cmp,
            'C_cmp': self.C_cmp,
            'L_fit': self.L_fit,
            'C_fit': self.C_fit,
            'growth_exponent': self.growth.exponent,
            'extrapolated': self.extrapolated,
            'warnings': list(self.warnings),
        }


def nu_reg(rw: RegularizedWeight, t):
    return rw.nu(t)


def eta(rw: RegularizedWeight, t):
    return rw.eta(t)


def verify_almost_lipschitz(rw: RegularizedWeight, pairs) -> ConditionReport:
    """|nu(t1) - nu(t2)| <= eta(t2) (1 + |t1 - t2|)^N on sample pairs"""
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    t1, t2 = pairs[:, 0], pairs[:, 1]
    left = np.abs(rw.nu(t1) - rw.nu(t2))
    right = rw.eta(t2) * (1.0 + np.abs(t1 - t2)) ** rw.exponent
    slack = left - right
    ok = slack <= settings.CARLEMAN_LOG_TOL * (1.0 + right)
    forward = t1 >= t2
    report = ConditionReport(
        holds=bool(ok.all()),
        constants={'N': float(rw.exponent)},
        checked_range=len(pairs),
        details={
            'max_slack': float(slack.max()) if len(slack) else 0.0,
            't1_ge_t2_holds': bool(ok[forward].all()),
            't1_lt_t2_holds': bool(ok[~forward].all()),
        })
    if not ok.all():
        report.first_violation = (int(np.nonzero(~ok)[0][0]),)
    return report
