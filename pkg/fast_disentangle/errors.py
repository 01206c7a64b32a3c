"""Exception hierarchy shared by every module.

Value-like failures also subclass ValueError/ArithmeticError so callers that
only know the builtin families still catch them.
"""

from __future__ import annotations


class DisentangleError(Exception):
    """Base class for every error raised by fast_disentangle."""


class DimensionError(DisentangleError, ValueError):
    """Shapes or index descriptors that do not fit together."""


class RegimeError(DisentangleError, ValueError):
    """No dimension regime of the algorithm applies to the input."""


class ZeroTensorError(DisentangleError, ValueError):
    """The input (tensor, matrix or spectrum) is identically zero."""


class NonFiniteError(DisentangleError, ValueError):
    """NaN or Inf entries were offered to a tensor."""


class NormalizationError(DisentangleError, ValueError):
    """A state vector is not normalized to unit 2-norm."""


class SvdConvergenceError(DisentangleError, ArithmeticError):
    """LAPACK did not converge with any of the available drivers."""


class ConfigError(DisentangleError, ValueError):
    """A run or CLI configuration is invalid."""
