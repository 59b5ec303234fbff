# Regularized weight nu and its modulus eta
from .weight import (
    ExponentChoice, PowerGrowth, RegularizedWeight, choose_exponent, eta, nu_reg,
    verify_almost_lipschitz,
)

__all__ = [
    'ExponentChoice', 'PowerGrowth', 'RegularizedWeight', 'choose_exponent', 'eta', 'nu_reg',
    'verify_almost_lipschitz',
]
