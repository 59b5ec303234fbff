from typing import Optional


class InvalidParameterError(ValueError):
    """A numeric parameter outside its admissible range"""


class WeightSequenceError(ValueError):
    """A table that is not a weight sequence"""

    def __init__(self, message: str, invariant: str, index: Optional[int] = None):
        super().__init__(message)
        self.invariant = invariant
        self.index = index

    def to_dict(self) -> dict:
        return {'error': str(self), 'invariant': self.invariant, 'index': self.index}


class RSequenceError(ValueError):
    """A table that is not in the class of r-sequences"""


class GridError(ValueError):
    """Incompatible or malformed grids"""


class WindowError(ValueError):
    """Zero window or near-orthogonal window pair"""


class RangeError(ValueError):
    """Evaluation requested outside the tabulated range"""


class CalibrationError(ArithmeticError):
    """A constant search exhausted its cap"""


class NumericGuardError(ArithmeticError):
    """Floating-point exponent budget exceeded"""

    def __init__(self, message: str, suggested_h: Optional[float] = None):
        super().__init__(message)
        self.suggested_h = suggested_h
