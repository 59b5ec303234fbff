# Management commands nu, check, regularize, multiplier and factorize
from .config import RunConfig

__all__ = ['RunConfig']
