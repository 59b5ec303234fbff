import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from django.conf import settings
from scipy import fft

from ..exceptions import GridError, WindowError
from ..grid import GridFunction, boundary_ratio, forward_ft, grid_nodes, inverse_ft
from ..grid.functions import _require_same_grid
from ..weights import ConditionReport

logger = logging.getLogger(__name__)

# |(gamma, psi)| below this is treated as orthogonal
ORTHOGONAL_PAIRING = 1e-6

# u rows per block of the pairing sum
PAIRING_CHUNK = 128


def gaussian_window(half_width: Optional[float] = None, n_points: Optional[int] = None) -> GridFunction:
    """2^{1/4} e^{-pi t^2}, unit L2 norm"""
    return GridFunction.sample(lambda t: 2.0 ** 0.25 * np.exp(-np.pi * t * t), half_width, n_points)


@dataclass(frozen=True, eq=False)
class TimeFrequencyGrid:
    """V(x_k, xi_j) over every x_stride-th base node and the whole dual grid"""
    half_width: float
    n_points: int
    x_stride: int
    values: np.ndarray

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def dxi(self) -> float:
        return 1.0 / (2.0 * self.half_width)

    @property
    def x(self) -> np.ndarray:
        return grid_nodes(self.half_width, self.n_points)[::self.x_stride]

    @property
    def xi(self) -> np.ndarray:
        return grid_nodes(self.n_points / (4.0 * self.half_width), self.n_points)

    def l2_norm(self) -> float:
        return float(np.sqrt(self.x_stride * self.dx * self.dxi * np.sum(np.abs(self.values) ** 2)))

    def __add__(self, other: 'TimeFrequencyGrid') -> 'TimeFrequencyGrid':
        return self._like(self.values + other.values)

    def __mul__(self, scalar) -> 'TimeFrequencyGrid':
        return self._like(self.values * scalar)

    __rmul__ = __mul__

    def _like(self, values) -> 'TimeFrequencyGrid':
        return TimeFrequencyGrid(self.half_width, self.n_points, self.x_stride, values)

    def to_frame(self) -> pd.DataFrame:
        """|V| as long-format heat-map data"""
        x, xi = np.meshgrid(self.x, self.xi, indexing='ij')
        return pd.DataFrame({'x': x.ravel(), 'xi': xi.ravel(), 'abs': np.abs(self.values).ravel()})

    def write_csv(self, path: Union[str, Path]):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')


def _shifts(n: int, stride: int) -> np.ndarray:
    """Roll amounts taking psi(t) to psi(t - x_k)"""
    return np.arange(0, n, stride) - n // 2


def _translates(window: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    n = len(window)
    index = (np.arange(n)[None, :] - shifts[:, None]) % n
    return window[index]


def _row_ft(rows: np.ndarray, dx: float) -> np.ndarray:
    return dx * fft.fftshift(fft.fft(fft.ifftshift(rows, axes=1), axis=1), axes=1)


def _require_window(psi: GridFunction, label: str = 'window'):
    if not np.any(psi.samples):
        raise WindowError(f"Invalid {label}: identically zero")


def stft(f: GridFunction, psi: GridFunction, x_stride: int = 1) -> TimeFrequencyGrid:
    """V_psi f(x, xi) = int f(t) conj(psi(t - x)) e^{-2 pi i xi t} dt"""
    _require_same_grid(f, psi)
    _require_window(psi)
    if x_stride < 1 or f.n_points % x_stride:
        raise GridError(f"Invalid x stride {x_stride} for {f.n_points} points")
    values = _stft_rows(f, psi, _shifts(f.n_points, x_stride))
    return TimeFrequencyGrid(f.half_width, f.n_points, x_stride, values)


def _stft_rows(f: GridFunction, psi: GridFunction, shifts: np.ndarray) -> np.ndarray:
    windows = np.conj(_translates(psi.samples, shifts))
    return _row_ft(f.samples[None, :] * windows, f.dx)


def stft_adjoint(F: TimeFrequencyGrid, gamma: GridFunction) -> GridFunction:
    """V*_gamma F(t) = sum over x of gamma(t - x) int F(x, xi) e^{2 pi i xi t} dxi"""
    if F.n_points != gamma.n_points or not np.isclose(F.half_width, gamma.half_width, rtol=1e-12):
        raise GridError("Grid mismatch between the time-frequency samples and the window")
    n = F.n_points
    slices = n * F.dxi * fft.fftshift(fft.ifft(fft.ifftshift(F.values, axes=1), axis=1), axes=1)
    windows = _translates(gamma.samples, _shifts(n, F.x_stride))
    return gamma.with_samples(F.x_stride * F.dx * np.sum(slices * windows, axis=0))


def _pairing(gamma: GridFunction, psi: GridFunction) -> complex:
    pairing = gamma.inner(psi)
    if abs(pairing) < ORTHOGONAL_PAIRING:
        raise WindowError(f"Invalid window pair: |(gamma, psi)| = {abs(pairing):.2e}")
    return pairing


def check_reconstruction(f: GridFunction, psi: GridFunction, gamma: GridFunction,
                         x_stride: int = 1) -> ConditionReport:
    """Relative L2 error of (gamma, psi)^{-1} V*_gamma V_psi f - f"""
    _require_window(gamma, 'synthesis window')
    pairing = _pairing(gamma, psi)
    rebuilt = stft_adjoint(stft(f, psi, x_stride), gamma).samples / pairing
    norm = f.l2_norm()
    difference = f.with_samples(rebuilt - f.samples).l2_norm()
    error = difference / norm if norm > 0 else difference
    return ConditionReport(
        holds=error <= 1e-6, constants={'error': error, 'pairing_abs': abs(pairing)},
        checked_range=f.n_points, details={'pairing': [pairing.real, pairing.imag]})


def stft_point(f: GridFunction, psi: GridFunction, k: int, j: int) -> complex:
    """V_psi f at base node k and dual node j"""
    n = f.n_points
    window = np.conj(np.roll(psi.samples, k - n // 2))
    xi = (j - n // 2) / (2.0 * f.half_width)
    return complex(f.dx * np.sum(f.samples * window * np.exp(-2j * np.pi * f.x * xi)))


def default_sample_points(n_points: int, count: int = 25, spread: Optional[int] = None,
                          seed: Optional[int] = None) -> np.ndarray:
    """Random (k, j) index pairs around the grid centre"""
    rng = np.random.default_rng(settings.CARLEMAN_SEED if seed is None else seed)
    spread = spread or max(1, n_points // 16)
    offsets = rng.integers(-spread, spread + 1, size=(count, 2))
    return offsets + n_points // 2


def check_fundamental(f: GridFunction, psi: GridFunction,
                      points: Optional[Iterable[Tuple[int, int]]] = None) -> ConditionReport:
    """V_psi f(x, xi) = e^{-2 pi i x xi} V_{psi^} f^(xi, -x) at sampled index pairs"""
    _require_same_grid(f, psi)
    _require_window(psi)
    n = f.n_points
    points = default_sample_points(n) if points is None else np.asarray(list(points), dtype=int).reshape(-1, 2)
    f_hat = forward_ft(f)
    psi_hat = forward_ft(psi)
    discrepancy = np.empty(len(points))
    for row, (k, j) in enumerate(points):
        x = (k - n // 2) * f.dx
        xi = (j - n // 2) * f_hat.dx
        left = stft_point(f, psi, k, j)
        right = np.exp(-2j * np.pi * x * xi) * stft_point(f_hat, psi_hat, j, (n - k) % n)
        discrepancy[row] = abs(left - right)
    worst = int(discrepancy.argmax()) if len(discrepancy) else 0
    report = ConditionReport(
        holds=bool(np.all(discrepancy <= 1e-7)),
        constants={'max_discrepancy': float(discrepancy.max()) if len(discrepancy) else 0.0},
        checked_range=len(points))
    if not report.holds:
        report.first_violation = tuple(int(v) for v in points[worst])
    return report


def quantization_pairing(P: GridFunction, phi: GridFunction, psi: GridFunction,
                         gamma: GridFunction) -> complex:
    """<F~(P), phi> as the double sum of V_psi P(u, xi) V_{F^-1(conj gamma)} phi(xi, u) e^{2 pi i u xi}

    P lives on the u-grid, phi on its dual grid; the value equals sum P(u) phi^(u) du.
    """
    _require_same_grid(P, psi)
    _require_same_grid(P, gamma)
    if phi.n_points != P.n_points or not np.isclose(phi.half_width, P.dual_half_width, rtol=1e-12):
        raise GridError("phi must live on the dual grid of the symbol")
    gamma = gamma.with_samples(gamma.samples / _pairing(gamma, psi))
    synthesis = inverse_ft(gamma.with_samples(np.conj(gamma.samples)))
    phi_hat = forward_ft(phi)
    if boundary_ratio(P.with_samples(P.samples * phi_hat.samples)) > settings.CARLEMAN_BOUNDARY_DECAY:
        logger.warning("quantization_pairing: the symbol outgrows the test function decay on the truncated grid")
    n = P.n_points
    shifts = _shifts(n, 1)
    u, xi = P.x, phi.x
    synthesis_spectrum = np.conj(fft.fft(synthesis.samples))
    total = 0j
    for start in range(0, n, PAIRING_CHUNK):
        rows = slice(start, start + PAIRING_CHUNK)
        A = _stft_rows(P, psi, shifts[rows])
        phase = np.exp(2j * np.pi * np.outer(u[rows], xi))
        # V_synthesis phi(xi_j, u_k) for every j: a circular correlation of the modulated phi
        modulated = fft.fft(phi.samples[None, :] * np.conj(phase), axis=1)
        B = phi.dx * np.roll(fft.ifft(modulated * synthesis_spectrum[None, :], axis=1), n // 2, axis=1)
        total += np.sum(A * B * phase)
    return complex(P.dx * phi.dx * total)


def pairing_oracle(P: GridFunction, phi: GridFunction) -> complex:
    """sum P(u) phi^(u) du"""
    phi_hat = forward_ft(phi)
    _require_same_grid(P, phi_hat)
    return complex(P.dx * np.sum(P.samples * phi_hat.samples))
