# Discrete short-time Fourier transform and the quantization pairing
from .transform import (
    TimeFrequencyGrid, check_fundamental, check_reconstruction, default_sample_points, gaussian_window,
    pairing_oracle, quantization_pairing, stft, stft_adjoint, stft_point,
)

__all__ = [
    'TimeFrequencyGrid', 'check_fundamental', 'check_reconstruction', 'default_sample_points',
    'gaussian_window', 'pairing_oracle', 'quantization_pairing', 'stft', 'stft_adjoint', 'stft_point',
]
