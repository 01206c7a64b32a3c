"""Entanglement across the (i, a) | (j, b) cut of U . A.

Entropies are in nats. Truncation errors follow the squared-probability
convention eps_chi = sum_{i >= chi} p_i**2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import entr, logsumexp

from .errors import DimensionError, NonFiniteError, ZeroTensorError
from .tensors import Tensor3, svd_values

if TYPE_CHECKING:
    from .disentangle import Disentangler

logger = logging.getLogger(__name__)

#: Singular values at or below this fraction of the largest count as zero.
ZERO_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """Non-increasing, non-negative singular values with derived probabilities."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if vals.size == 0:
            raise DimensionError("a spectrum needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise NonFiniteError("spectrum contains NaN or Inf")
        vals = np.sort(np.abs(vals))[::-1].copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @cached_property
    def probs(self) -> np.ndarray:
        squares = self.values**2
        total = squares.sum()
        if total == 0:
            raise ZeroTensorError("probabilities of an all-zero spectrum are undefined")
        probs = squares / total
        probs.flags.writeable = False
        return probs


@dataclass(frozen=True, eq=False)
class Tensor4:
    """(U . A)_{ij,ab} with dims (chi1, chi2, chi3, chi4)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.complex128, copy=True)
        if arr.ndim != 4:
            raise DimensionError(f"Tensor4 needs 4 axes, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("Tensor4 contains NaN or Inf entries")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        c1, c2, c3, c4 = self.data.shape
        return c1, c2, c3, c4

    def cut_matrix(self) -> np.ndarray:
        """Rows (i, a), columns (j, b)."""
        c1, c2, c3, c4 = self.dims
        return self.data.transpose(0, 2, 1, 3).reshape(c1 * c3, c2 * c4)


def apply_disentangler(u: Disentangler, a: Tensor3) -> Tensor4:
    """(U . A)_{ij,ab} = sum_k U_{ij,k} A_{k,ab}."""
    if u.data.shape[2] != a.dims[0]:
        raise DimensionError(
            f"disentangler acts on a leg of size {u.data.shape[2]}, tensor has {a.dims[0]}"
        )
    return Tensor4(np.tensordot(u.data, a.data, axes=1))


def cut_spectrum(t: Tensor4) -> SingularSpectrum:
    """Singular values of t viewed as a (chi1 chi3) x (chi2 chi4) matrix."""
    return SingularSpectrum(svd_values(t.cut_matrix()))


def von_neumann_entropy(s: SingularSpectrum) -> float:
    """S = -sum_i p_i ln p_i with 0 ln 0 = 0."""
    value = float(np.sum(entr(s.probs)))
    return min(max(value, 0.0), math.log(len(s)))


def renyi_entropy(s: SingularSpectrum, alpha: float) -> float:
    """S_alpha = ln(sum_i p_i**alpha) / (1 - alpha) for alpha > 0, alpha != 1."""
    if not (alpha > 0 and alpha != 1 and math.isfinite(alpha)):
        raise ValueError(f"Renyi index must be positive, finite and != 1, got {alpha}")
    probs = s.probs[s.probs > 0]
    value = float(logsumexp(alpha * np.log(probs)) / (1.0 - alpha))
    return max(value, 0.0)


def truncation_error(s: SingularSpectrum, chi: int) -> float:
    """eps_chi = sum of squared probabilities beyond the first ``chi`` values."""
    if not 0 <= chi <= len(s):
        raise DimensionError(f"chi={chi} outside 0..{len(s)}")
    tail = s.probs[chi:]
    return float(np.dot(tail, tail))


def zero_count(s: SingularSpectrum, rel_tol: float = ZERO_REL_TOL) -> int:
    """Number of singular values <= rel_tol * largest."""
    if s.values[0] == 0:
        return len(s)
    return int(np.count_nonzero(s.values <= rel_tol * s.values[0]))


def to_bits(nats: float) -> float:
    return nats / math.log(2)


def entanglement_entropy(u: Disentangler, a: Tensor3) -> float:
    """Von Neumann entropy of U . A across the cut."""
    return von_neumann_entropy(cut_spectrum(apply_disentangler(u, a)))
