import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from django.conf import settings
from scipy import integrate

from ..exceptions import CalibrationError, InvalidParameterError, RangeError
from ..regularize import RegularizedWeight
from ..weights import AssociatedFunction, ConditionReport, check_nu_M2_inequality
from ..weights.conditions import default_t_grid

logger = logging.getLogger(__name__)

# Gauss-Legendre nodes per panel
GAUSS_ORDER = 16

# rows of the smoothing kernel per block
BLOCK = 1024

# relative change of C_n under grid halving that marks a sweep suspicious
SUSPICIOUS_CHANGE = 0.05


@lru_cache(maxsize=64)
def _panel_rule(lo: float, hi: float, panel_width: float) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [lo, hi]"""
    panels = max(1, int(round((hi - lo) / panel_width)))
    edges = np.linspace(lo, hi, panels + 1)
    base_x, base_w = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _radial(source) -> Tuple[Callable[[np.ndarray], np.ndarray], float]:
    """Radial profile and the largest radius it may be evaluated at"""
    if isinstance(source, RegularizedWeight):
        return source.nu, float(source.cache_t[-1])
    if callable(source):
        return source, np.inf
    raise InvalidParameterError(f"Invalid radial weight: {source!r}")


def _panel_width() -> float:
    return 2.0 * settings.CARLEMAN_GAUSS_RADIUS / settings.CARLEMAN_GAUSS_PANELS


def _folded_kernel(z: np.ndarray, x: np.ndarray) -> np.ndarray:
    """e^{-(z-x)^2} + e^{-(z+x)^2} for every pair (z, x)"""
    zz = z[:, None]
    xx = x[None, :]
    return np.exp(-(zz - xx) ** 2) + np.exp(-(zz + xx) ** 2)


def _chunks(a: np.ndarray, radius: float):
    """Runs of the sorted real parts at most BLOCK long and 4 radius wide"""
    start = 0
    for stop in range(1, len(a) + 1):
        if stop == len(a) or stop - start == BLOCK or a[stop] - a[start] > 4.0 * radius:
            yield slice(start, stop)
            start = stop


def nu_tilde(source, z) -> np.ndarray:
    """pi^{-1/2} int nu(|x|) e^{-(z-x)^2} dx for complex z"""
    nu, reach = _radial(source)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    flat = np.atleast_1d(z).ravel()
    radius = settings.CARLEMAN_GAUSS_RADIUS
    x_max = float(np.max(np.abs(flat.real))) + radius if len(flat) else radius
    if x_max > reach:
        raise RangeError(f"Invalid argument: |Re z| + {radius:g} = {x_max:.4g} is past the "
                         f"tabulated range t <= {reach:.4g}")
    width = _panel_width()
    # the integrand is even in z; fold every argument onto Re z >= 0
    folded = np.where(flat.real < 0, -flat, flat)
    order = np.argsort(folded.real, kind='stable')
    out = np.empty(len(flat), dtype=complex)
    for chunk in _chunks(folded.real[order], radius):
        rows = order[chunk]
        a = folded.real[rows]
        # whole panels keep the rule cacheable across nearby calls
        lo = width * np.floor(max(0.0, a[0] - radius) / width)
        hi = width * np.ceil((a[-1] + radius) / width)
        x, w = _panel_rule(float(lo), float(hi), width)
        weighted = np.asarray(nu(x), dtype=float) * w / np.sqrt(np.pi)
        out[rows] = _folded_kernel(folded[rows], x) @ weighted
    if scalar:
        return out[0]
    return out.reshape(z.shape)


def nu_tilde_2d(source, z1, z2) -> np.ndarray:
    """pi^{-1} int int nu(|x|) e^{-(z1-x1)^2 - (z2-x2)^2} dx for a radial nu on R^2"""
    nu, reach = _radial(source)
    z1 = np.atleast_1d(np.asarray(z1, dtype=complex)).ravel()
    z2 = np.atleast_1d(np.asarray(z2, dtype=complex)).ravel()
    if z1.shape != z2.shape:
        raise InvalidParameterError("nu_tilde_2d needs z1 and z2 of the same length")
    # e^{-64} is far below the quadrature noise
    radius = min(settings.CARLEMAN_GAUSS_RADIUS, 8.0)
    x_max = max(float(np.max(np.abs(z1.real))), float(np.max(np.abs(z2.real)))) + radius
    if np.sqrt(2.0) * x_max > reach:
        raise RangeError(f"Invalid argument: radius {np.sqrt(2.0) * x_max:.4g} is past the tabulated range")
    width = 2.0 * _panel_width()
    x_max = width * np.ceil(x_max / width)
    x, w = _panel_rule(0.0, float(x_max), width)
    r = np.hypot(x[:, None], x[None, :])
    V = np.asarray(nu(r.ravel()), dtype=float).reshape(r.shape) * np.outer(w, w) / np.pi
    G1 = _folded_kernel(z1, x)
    G2 = _folded_kernel(z2, x)
    return np.einsum('ki,ij,kj->k', G1, V, G2)


@lru_cache(maxsize=16)
def smoothing_constant(N: int) -> float:
    """A = pi^{-1/2} int (1 + |x|)^N e^{-x^2} dx"""
    value, _ = integrate.quad(lambda x: (1.0 + x) ** N * np.exp(-x * x), 0.0, np.inf, epsrel=1e-12)
    return float(2.0 * value / np.sqrt(np.pi))


@dataclass(frozen=True)
class Calibration:
    L: float
    K: float
    t_checked: int

    @property
    def delta(self) -> float:
        return 1.0 / self.K ** 2

    def to_dict(self) -> dict:
        return {'L': self.L, 'K': self.K, 'delta': self.delta, 't_checked': self.t_checked}


def _calibration_holds(nu_M: AssociatedFunction, t: np.ndarray, target: np.ndarray, K: float) -> bool:
    right = nu_M(K * t) + np.log(K)
    return bool(np.all(target <= right + settings.CARLEMAN_LOG_TOL * (1.0 + np.abs(right))))


def calibrate(rw: RegularizedWeight, t_grid=None, k_cap: Optional[float] = None) -> Calibration:
    """Smallest K on {1.5, 2, 2.5, ...} with 2 L nu_M(t) <= nu_M(K t) + log K"""
    report = check_nu_M2_inequality(rw.source)
    if not report.holds:
        raise CalibrationError(f"{rw.source.name}: 2 nu_M(t) <= nu_M(H t) + log C_0 fails "
                               f"at {report.details.get('t_violation')}")
    t = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    L = rw.L_cmp
    k_cap = k_cap or settings.CARLEMAN_K_CAP
    nu_M = rw.associated
    target = 2.0 * L * nu_M(t)
    candidates = np.arange(1.5, k_cap + 0.25, 0.5)
    if len(candidates) == 0 or not _calibration_holds(nu_M, t, target, candidates[-1]):
        raise CalibrationError(f"{rw.source.name}: no K <= {k_cap:g} with 2L nu_M(t) <= nu_M(Kt) + log K "
                               f"(L = {L:.4g})")
    # the right-hand side grows with K
    lo, hi = -1, len(candidates) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _calibration_holds(nu_M, t, target, candidates[mid]):
            hi = mid
        else:
            lo = mid
    K = float(candidates[hi])
    logger.info("%s: calibrated L = %.4g, K = %g", rw.source.name, L, K)
    return Calibration(L, K, len(t))


@dataclass(frozen=True)
class TubeGrid:
    """Nodes a + ib with a on [re_min, re_max] and |b| <= n"""
    n: float
    re_min: float = -50.0
    re_max: float = 50.0
    re_step: float = 0.25
    im_step: float = 0.25

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError(f"Invalid tube half-width: {self.n}")
        if self.re_step <= 0 or self.im_step <= 0 or self.re_max < self.re_min:
            raise InvalidParameterError("Invalid tube grid steps or range")

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        count = int(round((self.re_max - self.re_min) / self.re_step)) + 1
        re = np.linspace(self.re_min, self.re_min + (count - 1) * self.re_step, count)
        rows = int(np.floor(self.n / self.im_step + 1e-9))
        im = self.im_step * np.arange(-rows, rows + 1, dtype=float)
        return re, im

    def nodes(self) -> np.ndarray:
        re, im = self.axes()
        return (re[None, :] + 1j * im[:, None]).ravel()

    def refined(self) -> 'TubeGrid':
        return TubeGrid(self.n, self.re_min, self.re_max, self.re_step / 2, self.im_step / 2)


@dataclass
class TubeReport:
    n: float
    C: float
    log_C: float
    upper_violation: float
    lower_violation: float
    nodes: int
    frame: pd.DataFrame = field(repr=False, default=None)
    refinement_change: Optional[float] = None
    suspicious: bool = False

    def write_csv(self, path: Union[str, Path]):
        self.frame.to_csv(path, index=False, float_format='%.17g')

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'C': self.C,
            'log_C': self.log_C,
            'upper_violation': self.upper_violation,
            'lower_violation': self.lower_violation,
            'nodes': self.nodes,
            'refinement_change': self.refinement_change,
            'suspicious': self.suspicious,
        }


class EntireMultiplier:
    """P(z) = exp(nu_tilde(scale z / K)), zero free and conjugate symmetric"""

    def __init__(self, weight: RegularizedWeight, calibration: Calibration,
                 scale: float = 1.0, dimension: int = 1):
        if scale <= 0:
            raise InvalidParameterError(f"Invalid scale: {scale}")
        if dimension not in (1, 2):
            raise InvalidParameterError(f"Invalid dimension: {dimension}")
        self.weight = weight
        self.calibration = calibration
        self.K = calibration.K
        self.L = calibration.L
        self.delta = calibration.delta
        self.scale = float(scale)
        self.dimension = dimension
        self.tube_constants: Dict[float, float] = {}
        self._memo: Dict[TubeGrid, np.ndarray] = {}

    @classmethod
    def build(cls, weight: RegularizedWeight, dimension: int = 1) -> 'EntireMultiplier':
        return cls(weight, calibrate(weight), dimension=dimension)

    @property
    def associated(self) -> AssociatedFunction:
        return self.weight.associated

    @property
    def class_index(self) -> float:
        """P belongs to the multiplier class indexed by this factor"""
        return self.scale

    def log_P(self, z) -> np.ndarray:
        return nu_tilde(self.weight, self.scale * np.asarray(z, dtype=complex) / self.K)

    def log_abs_P(self, z) -> np.ndarray:
        return np.real(self.log_P(z))

    def __call__(self, z):
        return np.exp(self.log_P(z))

    def eval_P_2d(self, z1, z2) -> np.ndarray:
        s = self.scale / self.K
        return np.exp(nu_tilde_2d(self.weight, s * np.asarray(z1, dtype=complex),
                                  s * np.asarray(z2, dtype=complex)))

    def rescaled(self, factor: float) -> 'EntireMultiplier':
        return EntireMultiplier(self.weight, self.calibration, self.scale * factor, self.dimension)

    def _tube_log_P(self, tube: TubeGrid) -> np.ndarray:
        if tube not in self._memo:
            self._memo[tube] = self.log_P(tube.nodes())
        return self._memo[tube]

    def tube_bounds(self, tube: TubeGrid) -> TubeReport:
        z = tube.nodes()
        log_abs = np.real(self._tube_log_P(tube))
        a = np.abs(z.real)
        upper = self.associated(self.scale * a)
        lower = self.associated(self.delta * self.scale * a)
        upper_violation = float(np.max(log_abs - upper))
        lower_violation = float(np.max(lower - log_abs))
        log_C = max(0.0, upper_violation, lower_violation)
        frame = pd.DataFrame({
            're': z.real,
            'im': z.imag,
            'abs_P': np.exp(log_abs),
            'lower': np.exp(lower - log_C),
            'upper': np.exp(upper + log_C),
        })
        return TubeReport(tube.n, float(np.exp(log_C)), log_C, upper_violation, lower_violation,
                          len(z), frame)

    def inverse_symbol_bound(self, x) -> float:
        """sup |1/P(x)| e^{nu_M(delta scale |x|)} over real samples"""
        x = np.asarray(x, dtype=float)
        log_abs = self.log_abs_P(x)
        return float(np.exp(np.max(self.associated(self.delta * self.scale * np.abs(x)) - log_abs)))

    def to_dict(self) -> dict:
        return {
            'weight': self.weight.source.name,
            'N': self.weight.exponent,
            'L': self.L,
            'K': self.K,
            'delta': self.delta,
            'scale': self.scale,
            'dimension': self.dimension,
            'tube_constants': {str(n): C for n, C in sorted(self.tube_constants.items())},
        }


def eval_P(em: EntireMultiplier, z):
    return em(z)


def refinement_change(coarse_log_C: float, fine_log_C: float) -> float:
    """|C_fine / C_coarse - 1| from the two log constants"""
    return float(np.expm1(abs(fine_log_C - coarse_log_C)))


def verify_tube_bounds(em: EntireMultiplier, tube: TubeGrid, refine: bool = False) -> TubeReport:
    """Smallest C_n with both tube inequalities at every node, stored on the multiplier"""
    report = em.tube_bounds(tube)
    if refine:
        fine = em.tube_bounds(tube.refined())
        report.refinement_change = refinement_change(report.log_C, fine.log_C)
        report.suspicious = report.refinement_change > SUSPICIOUS_CHANGE
        if report.suspicious:
            logger.warning("C_%g moved by %.1f%% when the tube grid was halved",
                           tube.n, 100 * report.refinement_change)
        report = TubeReport(fine.n, max(report.C, fine.C), max(report.log_C, fine.log_C),
                            fine.upper_violation, fine.lower_violation, fine.nodes, fine.frame,
                            report.refinement_change, report.suspicious)
    em.tube_constants[tube.n] = report.C
    logger.info("C_%g = %.6g on %d nodes", tube.n, report.C, report.nodes)
    return report


def pipeline_scale(h: float, H: float, d: int = 1) -> float:
    return float(np.pi * h / (4.0 * np.sqrt(d) * H ** 3))


def scale_for_pipeline(em: EntireMultiplier, h: float, H: float, d: int = 1) -> EntireMultiplier:
    """P_h(z) = P(pi h z / (4 sqrt(d) H^3))"""
    if h <= 0:
        raise InvalidParameterError(f"Invalid h: {h}")
    if H < 1:
        raise InvalidParameterError(f"Invalid H: {H}")
    return em.rescaled(pipeline_scale(h, H, d))


def verify_smoothing_bound(rw: RegularizedWeight, z) -> ConditionReport:
    """|nu_tilde(z) - nu(Re z)| <= A e^{(Im z)^2} eta(|Re z|)"""
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    A = smoothing_constant(rw.exponent)
    a = np.abs(z.real)
    left = np.abs(nu_tilde(rw, z) - rw.nu(a))
    right = A * np.exp(z.imag ** 2) * rw.eta(a)
    ok = left <= right * (1.0 + 1e-9) + 1e-9
    report = ConditionReport(
        holds=bool(ok.all()), constants={'A': A}, checked_range=len(z),
        details={'max_ratio': float(np.max(left / np.maximum(right, 1e-300)))})
    if not ok.all():
        report.first_violation = (int(np.nonzero(~ok)[0][0]),)
    return report
