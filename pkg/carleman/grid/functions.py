import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, List, Optional, Union

import numpy as np
import pandas as pd
from django.conf import settings
from scipy import fft

from ..exceptions import GridError, InvalidParameterError
from ..weights import AssociatedFunction, WeightSequence

logger = logging.getLogger(__name__)

# share of nodes at each end treated as the boundary
BOUNDARY_SHARE = 0.01
WRAP_SHARE = 0.05
NORM_BAND = 0.95


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples on x_k = -L + k 2L/n, k = 0..n-1"""
    half_width: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex).ravel()
        n = len(samples)
        if n < 8 or n & (n - 1):
            raise GridError(f"Invalid grid: n_points = {n} must be a power of two >= 8")
        if not self.half_width > 0:
            raise GridError(f"Invalid grid: half-width {self.half_width}")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'half_width', float(self.half_width))

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray], np.ndarray], half_width: Optional[float] = None,
               n_points: Optional[int] = None) -> 'GridFunction':
        half_width = half_width or settings.CARLEMAN_GRID_HALF_WIDTH
        n_points = n_points or settings.CARLEMAN_GRID_POINTS
        x = grid_nodes(half_width, n_points)
        return cls(half_width, fn(x))

    @property
    def n_points(self) -> int:
        return len(self.samples)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def x(self) -> np.ndarray:
        return grid_nodes(self.half_width, self.n_points)

    @property
    def dual_half_width(self) -> float:
        """Half-width of the frequency grid, spacing 1 / (2L)"""
        return self.n_points / (4.0 * self.half_width)

    def same_grid(self, other: 'GridFunction') -> bool:
        return self.n_points == other.n_points and np.isclose(self.half_width, other.half_width, rtol=1e-12)

    def with_samples(self, samples) -> 'GridFunction':
        return GridFunction(self.half_width, samples)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.dx * np.sum(np.abs(self.samples) ** 2)))

    def inner(self, other: 'GridFunction') -> complex:
        """(self, other) = sum self conj(other) dx"""
        _require_same_grid(self, other)
        return complex(self.dx * np.sum(self.samples * np.conj(other.samples)))

    def reflected(self) -> 'GridFunction':
        """f(-x); node -L has no mirror and keeps its value"""
        return self.with_samples(np.roll(self.samples[::-1], 1))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'x': self.x, 're': self.samples.real, 'im': self.samples.imag})

    def write_csv(self, path: Union[str, Path]):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> 'GridFunction':
        frame = pd.read_csv(path)
        missing = {'x', 're', 'im'} - set(frame.columns)
        if missing:
            raise GridError(f"Invalid grid file {path}: missing columns {sorted(missing)}")
        return cls(-float(frame['x'].iloc[0]), frame['re'].to_numpy() + 1j * frame['im'].to_numpy())


def grid_nodes(half_width: float, n_points: int) -> np.ndarray:
    return -half_width + np.arange(n_points) * (2.0 * half_width / n_points)


def _require_same_grid(f: GridFunction, g: GridFunction):
    if not f.same_grid(g):
        raise GridError(f"Grid mismatch: ({f.half_width:g}, {f.n_points}) vs ({g.half_width:g}, {g.n_points})")


def boundary_ratio(f: GridFunction, share: float = BOUNDARY_SHARE) -> float:
    """Largest boundary magnitude relative to the overall maximum"""
    magnitude = np.abs(f.samples)
    peak = magnitude.max()
    if peak == 0:
        return 0.0
    width = max(1, int(np.ceil(share * f.n_points)))
    edge = max(magnitude[:width].max(), magnitude[-width:].max())
    return float(edge / peak)


def _check_decay(f: GridFunction, label: str):
    ratio = boundary_ratio(f)
    if ratio > settings.CARLEMAN_BOUNDARY_DECAY:
        logger.warning("%s: boundary values at %.2e of the peak; the transform sees a periodized input",
                       label, ratio)


def forward_ft(f: GridFunction, check_decay: bool = True) -> GridFunction:
    """int f(x) e^{-2 pi i x xi} dx on the dual grid"""
    if check_decay:
        _check_decay(f, 'forward_ft')
    spectrum = f.dx * fft.fftshift(fft.fft(fft.ifftshift(f.samples)))
    return GridFunction(f.dual_half_width, spectrum)


def inverse_ft(F: GridFunction, check_decay: bool = True) -> GridFunction:
    """int F(xi) e^{2 pi i x xi} dxi on the dual grid"""
    if check_decay:
        _check_decay(F, 'inverse_ft')
    values = F.n_points * F.dx * fft.fftshift(fft.ifft(fft.ifftshift(F.samples)))
    return GridFunction(F.dual_half_width, values)


def _wrap_mass(f: GridFunction) -> float:
    magnitude = np.abs(f.samples)
    total = magnitude.sum()
    if total == 0:
        return 0.0
    width = max(1, int(np.ceil(WRAP_SHARE * f.n_points)))
    return float((magnitude[:width].sum() + magnitude[-width:].sum()) / total)


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """int f(t) g(x - t) dt, periodic on the grid"""
    _require_same_grid(f, g)
    spectrum = f.dx * fft.fft(fft.ifftshift(f.samples)) * fft.fft(fft.ifftshift(g.samples))
    result = f.with_samples(fft.fftshift(fft.ifft(spectrum)))
    mass = _wrap_mass(result)
    if mass > settings.CARLEMAN_WRAP_MASS:
        logger.warning("convolve: %.2e of the mass sits near the boundary; wrap-around likely", mass)
    return result


def frequencies(f: GridFunction) -> np.ndarray:
    """Dual grid nodes matching forward_ft(f)"""
    return grid_nodes(f.dual_half_width, f.n_points)


def spectral_derivative(f: GridFunction, order: int, spectrum: Optional[GridFunction] = None) -> GridFunction:
    """inverse_ft((2 pi i xi)^order forward_ft(f)); spectrum, when given, stands in for forward_ft(f)"""
    if order < 0:
        raise InvalidParameterError(f"Invalid derivative order: {order}")
    if order == 0:
        return f
    if spectrum is None:
        spectrum = fft.fft(fft.ifftshift(f.samples))
    else:
        if spectrum.n_points != f.n_points or not np.isclose(spectrum.half_width, f.dual_half_width, rtol=1e-12):
            raise GridError("spectrum must live on the dual grid")
        spectrum = fft.ifftshift(spectrum.samples) / f.dx
    xi = fft.fftfreq(f.n_points, d=f.dx)
    factor = (2j * np.pi * xi) ** order
    if order % 2:
        # the Nyquist mode has no real derivative
        factor[f.n_points // 2] = 0.0
    values = fft.fftshift(fft.ifft(spectrum * factor))
    peak = np.max(np.abs(values))
    if not np.isfinite(peak) or (peak > 0 and np.log(peak) > settings.CARLEMAN_OVERFLOW_LOG):
        logger.warning("spectral_derivative: order %d amplified samples to %.3g", order, peak)
    return f.with_samples(values)


class NormKind(Enum):
    """Weighted sup-norms of the test-function classes"""
    K = ("K", "h^a |D^a f(x)| e^{k|x|} / M_a")
    GS = ("GS", "h^a |D^a f(x)| e^{nu_A(k x)} / M_a")
    Q = ("Q", "h^a |D^a f(x)| e^{-kappa |x|} / M_a")

    def __init__(self, short_name: str, description: str):
        self.short_name = short_name
        self.description = description

    @classmethod
    def from_string(cls, kind_str: str):
        for kind in cls:
            if kind.short_name.lower() == kind_str.lower():
                return kind
        raise ValueError(f"Invalid norm kind: {kind_str}")


@dataclass(frozen=True, eq=False)
class WeightedNormSpec:
    M: WeightSequence
    h: float
    k: float = 1.0
    alpha_max: int = 8
    A: Optional[WeightSequence] = None
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.alpha_max < 0:
            raise InvalidParameterError(f"Invalid alpha_max: {self.alpha_max}")
        if not (self.h > 0 and self.k > 0):
            raise InvalidParameterError(f"Invalid norm parameters: h = {self.h}, k = {self.k}")

    def log_weight(self, kind: NormKind, x: np.ndarray) -> np.ndarray:
        if kind is NormKind.K:
            return self.k * np.abs(x)
        if kind is NormKind.GS:
            if self.A is None:
                raise InvalidParameterError("GS norm needs the sequence A")
            return AssociatedFunction(self.A)(self.k * np.abs(x))
        if self.kappa is None:
            raise InvalidParameterError("Q norm needs kappa")
        return -self.kappa * np.abs(x)


@dataclass
class NormValue:
    value: float
    log_value: float
    alpha: Optional[int]
    x: Optional[float]
    warnings: List[str] = field(default_factory=list)

    @property
    def truncated(self) -> bool:
        return bool(self.warnings)

    def to_dict(self) -> dict:
        return {'value': self.value, 'log_value': self.log_value, 'alpha': self.alpha, 'x': self.x,
                'warnings': list(self.warnings)}


def _rising_into_floor(row: np.ndarray, keep: np.ndarray) -> Optional[int]:
    """Outermost kept index where the row still grows outward, if any"""
    kept = np.flatnonzero(keep)
    if len(kept) < 2:
        return None
    if row[kept[0]] > row[kept[1]]:
        return int(kept[0])
    if row[kept[-1]] > row[kept[-2]]:
        return int(kept[-1])
    return None


def class_norm(f: GridFunction, spec: WeightedNormSpec, kind: NormKind,
               spectrum: Optional[GridFunction] = None) -> NormValue:
    """sup over alpha <= alpha_max and grid x of the weighted derivative, in log space"""
    x = f.x
    log_weight = spec.log_weight(kind, x)
    band = np.abs(x) >= NORM_BAND * f.half_width
    best = (-np.inf, None, None)
    warnings = []
    for alpha in range(spec.alpha_max + 1):
        magnitude = np.abs(spectral_derivative(f, alpha, spectrum).samples)
        peak = magnitude.max()
        if peak == 0:
            continue
        # FFT noise times a growing weight is not part of the norm; a row that
        # still rises where the samples drop below the floor is reported as truncated
        keep = magnitude > settings.CARLEMAN_NOISE_FLOOR * peak
        row = np.full(len(x), -np.inf)
        row[keep] = (alpha * np.log(spec.h) + np.log(magnitude[keep]) + log_weight[keep]
                     - float(spec.M.log_M(alpha)))
        j = int(row.argmax())
        if band[j]:
            warnings.append(f"alpha = {alpha}: supremum at x = {x[j]:.4g} in the boundary band")
        edge = _rising_into_floor(row, keep)
        if edge is not None:
            warnings.append(f"alpha = {alpha}: weighted row still rising at x = {x[edge]:.4g}, "
                            f"where |D^a f| meets the noise floor")
        if row[j] > best[0]:
            best = (float(row[j]), alpha, float(x[j]))
    for message in warnings:
        logger.warning("class_norm %s: %s", kind.short_name, message)
    log_value, alpha, at = best
    if alpha is None:
        return NormValue(0.0, -np.inf, None, None, warnings)
    return NormValue(float(np.exp(log_value)), log_value, alpha, at, warnings)
