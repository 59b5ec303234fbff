# Entire multiplier P built by Gaussian smoothing of nu
from .entire import (
    Calibration, EntireMultiplier, TubeGrid, TubeReport, calibrate, eval_P, nu_tilde, nu_tilde_2d,
    pipeline_scale, refinement_change, scale_for_pipeline, smoothing_constant, verify_smoothing_bound,
    verify_tube_bounds,
)

__all__ = [
    'Calibration', 'EntireMultiplier', 'TubeGrid', 'TubeReport', 'calibrate', 'eval_P', 'nu_tilde',
    'nu_tilde_2d', 'pipeline_scale', 'refinement_change', 'scale_for_pipeline', 'smoothing_constant',
    'verify_smoothing_bound', 'verify_tube_bounds',
]
