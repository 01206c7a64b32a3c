"""Fast tensor disentangling: unitaries that cut the entanglement of a 3-leg tensor."""

from fast_disentangle.disentangle import (
    Dims,
    Disentangler,
    DisentangleOptions,
    disentangle_auto,
    extended_disentangle,
    fast_disentangle,
)
from fast_disentangle.entanglement import entanglement_entropy
from fast_disentangle.tensors import Tensor3, make_rng

__version__ = "0.1.0"

__all__ = [
    "Dims",
    "DisentangleOptions",
    "Disentangler",
    "Tensor3",
    "disentangle_auto",
    "entanglement_entropy",
    "extended_disentangle",
    "fast_disentangle",
    "make_rng",
]
