import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings

from ..exceptions import GridError, NumericGuardError, WeightSequenceError
from ..grid import (
    GridFunction, NormKind, WeightedNormSpec, class_norm, convolve, forward_ft, grid_nodes, inverse_ft,
)
from ..grid.functions import _require_same_grid
from ..multiplier import EntireMultiplier, scale_for_pipeline
from ..regularize import RegularizedWeight
from ..weights import WeightSequence, check_M2, check_M2star

logger = logging.getLogger(__name__)

# factors of two tried below CARLEMAN_H_START
H_LADDER_STEPS = 60

# roundtrip errors below this are round-off and never decide the orientation
ROUNDTRIP_FLOOR = 1e-9

CONTINUUM_NOTE = "weighted sups on a finite (n, h') grid; continuum membership is not certified"


class Orientation(Enum):
    """How psi is obtained from the samples of 1/P_h"""
    FORWARD = ("forward", "psi = F(1/P_h)")
    INVERSE = ("inverse", "psi = F^-1(1/P_h)")

    def __init__(self, short_name: str, description: str):
        self.short_name = short_name
        self.description = description

    def __str__(self) -> str:
        return self.short_name

    @classmethod
    def from_string(cls, orientation_str: str):
        for orientation in cls:
            if orientation.short_name == orientation_str.lower():
                return orientation
        raise ValueError(f"Invalid orientation: {orientation_str}")


@dataclass(frozen=True, eq=False)
class FactorizationKit:
    """psi with F(psi) = 1/P_h and the symbol P_h on the dual grid"""
    M: WeightSequence
    multiplier: EntireMultiplier
    psi: GridFunction
    fourier_symbol: GridFunction
    inverse_symbol: GridFunction
    log_symbol: np.ndarray
    h: float
    H: float
    orientation: Orientation
    warnings: Tuple[str, ...] = ()

    @property
    def delta_h(self) -> float:
        """Scale in the lower bound e^{nu_M(delta_h xi)} of |P_h|"""
        return self.multiplier.delta * self.multiplier.scale

    @property
    def half_width(self) -> float:
        return self.psi.half_width

    @property
    def n_points(self) -> int:
        return self.psi.n_points

    @property
    def log_range(self) -> float:
        return float(self.log_symbol.max() - self.log_symbol.min())

    def to_dict(self) -> dict:
        return {
            'weight': self.M.name,
            'h': self.h,
            'H': self.H,
            'delta_h': self.delta_h,
            'orientation': self.orientation.short_name,
            'grid': {'L': self.half_width, 'n': self.n_points},
            'log_range': self.log_range,
            'multiplier': self.multiplier.to_dict(),
            'warnings': list(self.warnings),
        }


def _require_pipeline_conditions(M: WeightSequence) -> float:
    m2 = check_M2(M)
    if not m2.holds:
        raise WeightSequenceError(f"{M.name} fails (M.2) at split {m2.first_violation}", 'M.2')
    m2star = check_M2star(M)
    if not m2star.holds:
        raise WeightSequenceError(f"{M.name} fails (M.2)* (last violation {m2star.first_violation})", 'M.2*')
    return m2.constants['H']


def _log_symbol(multiplier: EntireMultiplier, xi: np.ndarray) -> np.ndarray:
    return np.real(multiplier.log_P(xi))


def _auto_h(base: EntireMultiplier, H: float, xi_max: float) -> float:
    """Largest h on the halving ladder whose symbol stays within the resolution budget

    The ladder starts at CARLEMAN_H_START, so h > 1 comes back whenever the grid resolves it;
    set CARLEMAN_H_START=1 to search downward from 1.
    """
    h = float(settings.CARLEMAN_H_START)
    ends = np.array([0.0, xi_max])
    for _ in range(H_LADDER_STEPS):
        low, high = _log_symbol(scale_for_pipeline(base, h, H), ends)
        if high - low < settings.CARLEMAN_RESOLUTION_LOG:
            logger.info("auto h = %g (symbol log-range %.3g)", h, high - low)
            return h
        h /= 2.0
    return h


def _suggest_h(h: float, log_peak: float) -> float:
    steps = max(1, int(np.ceil(np.log2(max(log_peak, 1.0) / settings.CARLEMAN_RESOLUTION_LOG))))
    return h / 2.0 ** steps


def build_kit(M: WeightSequence, h: Union[str, float] = 'auto', half_width: Optional[float] = None,
              n_points: Optional[int] = None, orientation: Union[str, Orientation] = Orientation.FORWARD,
              multiplier: Optional[EntireMultiplier] = None) -> FactorizationKit:
    """Scale the multiplier to P_h and realize psi from the samples of 1/P_h"""
    H = _require_pipeline_conditions(M)
    if isinstance(orientation, str):
        orientation = Orientation.from_string(orientation)
    half_width = half_width or settings.CARLEMAN_GRID_HALF_WIDTH
    n_points = n_points or settings.CARLEMAN_GRID_POINTS
    base = multiplier or EntireMultiplier.build(RegularizedWeight.build(M))
    dual_half_width = n_points / (4.0 * half_width)
    if h == 'auto':
        h = _auto_h(base, H, dual_half_width)
    h = float(h)
    scaled = scale_for_pipeline(base, h, H)

    xi = grid_nodes(dual_half_width, n_points)
    log_symbol = _log_symbol(scaled, xi)
    log_peak = float(log_symbol.max())
    if log_peak > settings.CARLEMAN_OVERFLOW_LOG:
        suggested = _suggest_h(h, log_peak)
        raise NumericGuardError(f"log P_h reaches {log_peak:.4g} on |xi| <= {dual_half_width:g}; "
                                f"try h <= {suggested:g} or a smaller grid", suggested_h=suggested)
    warnings = []
    if log_peak - log_symbol.min() > 2.0 * settings.CARLEMAN_RESOLUTION_LOG:
        warnings.append(f"symbol log-range {log_peak - log_symbol.min():.3g} loses accuracy in psi * u")
    symbol = GridFunction(dual_half_width, np.exp(log_symbol))
    inverse_symbol = GridFunction(dual_half_width, np.exp(-log_symbol))
    # 1/P_h stops at the grid edge by construction
    if orientation is Orientation.FORWARD:
        psi = forward_ft(inverse_symbol, check_decay=False)
    else:
        psi = inverse_ft(inverse_symbol, check_decay=False)

    peak = np.max(np.abs(psi.samples))
    imaginary = float(np.max(np.abs(psi.samples.imag)) / peak)
    odd = float(np.max(np.abs(psi.samples - psi.reflected().samples)) / peak)
    if imaginary > 1e-10 or odd > 1e-10:
        raise GridError(f"psi is not real and even on the grid (imaginary {imaginary:.2e}, odd {odd:.2e})")
    for message in warnings:
        logger.warning("build_kit: %s", message)
    return FactorizationKit(M, scaled, psi, symbol, inverse_symbol, log_symbol, h, H, orientation,
                            tuple(warnings))


@dataclass
class FactorizationReport:
    roundtrip_l2: float
    roundtrip_sup: float
    fourier_roundtrip: float
    h: float
    delta_h: float
    grid: Dict[str, float]
    psi_class: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'roundtrip_l2': self.roundtrip_l2,
            'roundtrip_sup': self.roundtrip_sup,
            'fourier_roundtrip': self.fourier_roundtrip,
            'h': self.h,
            'delta_h': self.delta_h,
            'grid': dict(self.grid),
            'psi_class': dict(self.psi_class),
            'warnings': list(self.warnings),
        }


def _relative(difference: np.ndarray, reference: np.ndarray, dx: float) -> Tuple[float, float]:
    norm = np.sqrt(dx * np.sum(np.abs(reference) ** 2))
    peak = np.max(np.abs(reference))
    l2 = np.sqrt(dx * np.sum(np.abs(difference) ** 2))
    sup = np.max(np.abs(difference))
    return (float(l2 / norm) if norm > 0 else float(l2),
            float(sup / peak) if peak > 0 else float(sup))


def factorize(kit: FactorizationKit, f: GridFunction) -> Tuple[GridFunction, FactorizationReport]:
    """u = g * f through P_h on the Fourier side, with the roundtrip psi * u = f"""
    _require_same_grid(f, kit.psi)
    spectrum = forward_ft(f)
    with np.errstate(divide='ignore'):
        log_magnitude = np.log(np.abs(spectrum.samples))
    log_peak = float(np.max(log_magnitude + kit.log_symbol))
    if log_peak > settings.CARLEMAN_OVERFLOW_LOG:
        suggested = _suggest_h(kit.h, log_peak)
        raise NumericGuardError(f"|P_h f^| reaches e^{log_peak:.4g}; try h <= {suggested:g}",
                                suggested_h=suggested)
    product = spectrum.samples * kit.fourier_symbol.samples
    # the spectral tail of f is round-off lifted by P_h
    u = inverse_ft(spectrum.with_samples(product), check_decay=False)
    back = convolve(kit.psi, u)
    roundtrip_l2, roundtrip_sup = _relative(back.samples - f.samples, f.samples, f.dx)
    cancelled = product * kit.inverse_symbol.samples
    peak = np.max(np.abs(spectrum.samples))
    fourier_roundtrip = float(np.max(np.abs(cancelled - spectrum.samples)) / peak) if peak > 0 else 0.0
    report = FactorizationReport(
        roundtrip_l2, roundtrip_sup, fourier_roundtrip, kit.h, kit.delta_h,
        {'L': kit.half_width, 'n': kit.n_points}, warnings=list(kit.warnings))
    return u, report


@dataclass
class PsiClassReport:
    norms: Dict[float, Dict[float, float]]
    clean: Dict[float, List[float]]
    tail_onsets: Dict[float, float]
    member: bool
    warnings: List[str] = field(default_factory=list)
    note: str = CONTINUUM_NOTE

    def summary(self) -> Dict[str, float]:
        """Norm per n at the largest boundary-clean h'"""
        out = {}
        for n, values in self.norms.items():
            candidates = self.clean.get(n) or list(values)
            out[f"{n:g}"] = values[max(candidates)]
        return out

    def to_dict(self) -> dict:
        return {
            'norms': {f"{n:g}": {f"{h:g}": value for h, value in row.items()} for n, row in self.norms.items()},
            'clean': {f"{n:g}": list(hs) for n, hs in self.clean.items()},
            'tail_onsets': {f"{n:g}": x0 for n, x0 in self.tail_onsets.items()},
            'member': self.member,
            'warnings': list(self.warnings),
            'note': self.note,
        }


def tail_onset(psi: GridFunction, n: float) -> float:
    """Smallest x_0 >= 0 past which e^{n|x|}|psi(x)| does not increase, down to the round-off floor

    inf when the weighted tail is still rising where psi meets the floor.
    """
    x = psi.x
    magnitude = np.abs(psi.samples)
    right = x >= 0
    x, magnitude = x[right], magnitude[right]
    above = magnitude > settings.CARLEMAN_NOISE_FLOOR * magnitude.max()
    stop = len(magnitude) if above.all() else int(np.argmin(above))
    weighted = np.exp(n * x[:stop]) * magnitude[:stop]
    rises = np.nonzero(np.diff(weighted) > 1e-12 * weighted[:-1])[0]
    if len(rises) == 0:
        return 0.0
    if rises[-1] == len(weighted) - 2:
        logger.warning("tail_onset: e^{%g|x|}|psi| still rising at x = %.4g", n, x[stop - 1])
        return float('inf')
    return float(x[rises[-1] + 1])


def verify_psi_class(kit: FactorizationKit, n_list: Sequence[float] = (1, 2, 3),
                     h_candidates: Sequence[float] = (0.25, 0.5, 1.0), alpha_max: int = 8) -> PsiClassReport:
    """K-norms of psi over n and h'; member if some h' is clean for every n and every tail onset is finite"""
    norms: Dict[float, Dict[float, float]] = {}
    clean: Dict[float, List[float]] = {}
    onsets: Dict[float, float] = {}
    warnings = []
    for n in n_list:
        norms[n], clean[n] = {}, []
        for h_prime in h_candidates:
            spec = WeightedNormSpec(kit.M, h=h_prime, k=float(n) if n > 0 else 1.0, alpha_max=alpha_max)
            if n > 0:
                value = class_norm(kit.psi, spec, NormKind.K, spectrum=kit.inverse_symbol)
            else:
                value = class_norm(kit.psi, WeightedNormSpec(kit.M, h=h_prime, kappa=0.0, alpha_max=alpha_max),
                                   NormKind.Q, spectrum=kit.inverse_symbol)
            norms[n][h_prime] = value.value
            if value.warnings or not np.isfinite(value.value):
                warnings.append(f"n = {n:g}, h' = {h_prime:g}: boundary-dominated; enlarge the grid")
            else:
                clean[n].append(h_prime)
        onsets[n] = tail_onset(kit.psi, n)
        if not np.isfinite(onsets[n]):
            warnings.append(f"n = {n:g}: e^(n|x|)|psi| does not settle before the noise floor")
    shared = set(h_candidates)
    for n in n_list:
        shared &= set(clean[n])
    settled = all(np.isfinite(x0) for x0 in onsets.values())
    return PsiClassReport(norms, clean, onsets, bool(shared) and settled, warnings)


@dataclass
class FamilyReport:
    roundtrip_l2: List[float]
    roundtrip_sup: List[float]
    u_seminorms: List[float]
    uniform_bound: float
    h_family: float
    kappa: float

    @property
    def max_roundtrip(self) -> float:
        return max(self.roundtrip_l2) if self.roundtrip_l2 else 0.0

    def to_dict(self) -> dict:
        return {
            'roundtrip_l2': list(self.roundtrip_l2),
            'roundtrip_sup': list(self.roundtrip_sup),
            'u_seminorms': list(self.u_seminorms),
            'uniform_bound': self.uniform_bound,
            'h_family': self.h_family,
            'kappa': self.kappa,
        }


def factorize_bounded_family(kit: FactorizationKit, family: Iterable[GridFunction], kappa: float = 1.0,
                             alpha_max: int = 4) -> Tuple[List[GridFunction], FamilyReport]:
    """One psi for every member; the Q-seminorms of u at h/H bound the family g * B"""
    h_family = kit.h / kit.H
    spec = WeightedNormSpec(kit.M, h=h_family, kappa=kappa, alpha_max=alpha_max)
    outputs, l2, sup, seminorms = [], [], [], []
    for f in family:
        u, report = factorize(kit, f)
        outputs.append(u)
        l2.append(report.roundtrip_l2)
        sup.append(report.roundtrip_sup)
        seminorms.append(class_norm(u, spec, NormKind.Q).value)
    bound = max(seminorms) if seminorms else 0.0
    return outputs, FamilyReport(l2, sup, seminorms, bound, h_family, kappa)


def matching_orientation(M: WeightSequence, h: Union[str, float] = 'auto',
                         f: Optional[GridFunction] = None,
                         multiplier: Optional[EntireMultiplier] = None,
                         **grid) -> Tuple[Orientation, Dict[str, float]]:
    """Orientation whose roundtrip psi * (g * f) = f is closest, forward on ties"""
    base = multiplier or EntireMultiplier.build(RegularizedWeight.build(M))
    errors = {}
    for orientation in Orientation:
        kit = build_kit(M, h, orientation=orientation, multiplier=base, **grid)
        if f is None:
            f = GridFunction.sample(lambda x: np.exp(-np.pi * x * x), kit.half_width, kit.n_points)
        _, report = factorize(kit, f)
        errors[orientation.short_name] = report.roundtrip_l2
    if errors['forward'] > ROUNDTRIP_FLOOR and errors['inverse'] < 0.5 * errors['forward']:
        return Orientation.INVERSE, errors
    return Orientation.FORWARD, errors
