# Uniform-grid Fourier calculus and weighted class norms
from .functions import (
    GridFunction, NormKind, NormValue, WeightedNormSpec, boundary_ratio, class_norm, convolve,
    forward_ft, frequencies, grid_nodes, inverse_ft, spectral_derivative,
)

__all__ = [
    'GridFunction', 'NormKind', 'NormValue', 'WeightedNormSpec', 'boundary_ratio', 'class_norm',
    'convolve', 'forward_ft', 'frequencies', 'grid_nodes', 'inverse_ft', 'spectral_derivative',
]
