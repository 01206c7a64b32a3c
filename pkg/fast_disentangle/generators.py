"""Tensor families for benchmarking plus random qubit states.

Spectra passed to spectrum_tensor / outer_product_tensor are used as given;
none of the reported metrics depend on the overall scale.
"""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .disentangle import Dims
from .errors import DimensionError
from .tensors import Tensor3, complex_gaussian, random_isometry

if TYPE_CHECKING:
    from .wavefunction import QubitState

#: Largest qubit count random_state will allocate (2^24 amplitudes).
MAX_QUBITS = 24


class SpectrumKind(str, Enum):
    GAUSSIAN = "gaussian"
    HARMONIC_SPECTRUM = "lambda-harmonic"
    GEOMETRIC_SPECTRUM = "lambda-geometric"
    HARMONIC_OUTER = "mu-harmonic"
    ANSATZ = "ansatz"

    @classmethod
    def parse(cls, value: SpectrumKind | str) -> SpectrumKind:
        try:
            return cls(value)
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise DimensionError(f"unknown tensor kind {value!r} (choose from {choices})") from None


def harmonic(count: int) -> np.ndarray:
    """1, 1/2, ..., 1/count."""
    return 1.0 / np.arange(1, count + 1)


def geometric(count: int) -> np.ndarray:
    """2^-1, 2^-2, ..., 2^-count."""
    return 2.0 ** -np.arange(1, count + 1, dtype=float)


def gaussian_tensor(d: Dims, rng: np.random.Generator) -> Tensor3:
    return Tensor3(complex_gaussian(rng, (d.chi1 * d.chi2, d.chi3, d.chi4)))


def _check_symmetric(d: Dims, weights: np.ndarray, what: str) -> np.ndarray:
    if d.chi1 != d.chi2 or d.chi3 != d.chi4:
        raise DimensionError(f"{what} needs chi1 == chi2 and chi3 == chi4, got {d}")
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.size != d.chi1**2:
        raise DimensionError(f"{what} needs {d.chi1**2} weights, got {weights.size}")
    return weights


def spectrum_tensor(d: Dims, lam: np.ndarray, rng: np.random.Generator) -> Tensor3:
    """A_{(k1 k2),ab} = sum_i lam_i W_{k1 a,i} V_{k2 b,i} with Haar isometries W, V.

    Across the (k1 a) | (k2 b) cut the singular values are exactly ``lam``.
    """
    lam = _check_symmetric(d, lam, "spectrum_tensor")
    chi, chi3 = d.chi1, d.chi3
    if lam.size > chi * chi3:
        raise DimensionError(f"{lam.size} singular values do not fit a {chi * chi3}-dim cut")
    w = random_isometry(chi * chi3, lam.size, rng).reshape(chi, chi3, lam.size)
    v = random_isometry(chi * chi3, lam.size, rng).reshape(chi, chi3, lam.size)
    a = np.einsum("kai,lbi,i->klab", w, v, lam, optimize=True)
    return Tensor3(a.reshape(chi * chi, chi3, chi3))


def _unit_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    v = complex_gaussian(rng, n)
    return v / np.linalg.norm(v)


def outer_product_tensor(d: Dims, mu: np.ndarray, rng: np.random.Generator) -> Tensor3:
    """A = sum_i mu_i v1 (x) v2 (x) v3 (x) v4, fresh unit vectors for every term."""
    mu = _check_symmetric(d, mu, "outer_product_tensor")
    chi, chi3 = d.chi1, d.chi3
    a = np.zeros((chi, chi, chi3, chi3), dtype=np.complex128)
    for weight in mu:
        v1, v2 = _unit_vector(rng, chi), _unit_vector(rng, chi)
        v3, v4 = _unit_vector(rng, chi3), _unit_vector(rng, chi3)
        a += weight * np.einsum("p,q,x,y->pqxy", v1, v2, v3, v4)
    return Tensor3(a.reshape(chi * chi, chi3, chi3))


def ansatz_tensor(m1: np.ndarray, m2: np.ndarray, m3: np.ndarray) -> Tensor3:
    """A_{(k1 k2),(a1 a2),(b1 b2)} = m1_{k1 a1} m2_{k2 b2} m3_{a2 b1}.

    The identity disentangler splits it into an m1 block left of the cut, an
    m2 block right of it, and m3 straddling it.
    """
    m1, m2, m3 = (np.atleast_2d(np.asarray(m)) for m in (m1, m2, m3))
    if any(m.ndim != 2 for m in (m1, m2, m3)):
        raise DimensionError("ansatz factors must be matrices")
    chi1, chi3a = m1.shape
    chi2, chi4b = m2.shape
    chi3b, chi4a = m3.shape
    a = np.einsum("px,qw,yz->pqxyzw", m1, m2, m3, optimize=True)
    return Tensor3(a.reshape(chi1 * chi2, chi3a * chi3b, chi4a * chi4b))


class Ansatz(NamedTuple):
    tensor: Tensor3
    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray

    def cut_values(self) -> np.ndarray:
        """Singular values the ideal disentangler leaves across the cut, descending."""
        scale = np.linalg.norm(self.m1) * np.linalg.norm(self.m2)
        return scale * np.linalg.svd(self.m3, compute_uv=False)


def random_ansatz(
    d: Dims, rng: np.random.Generator, *, inner: tuple[int, int] | None = None, rank1: bool = False
) -> Ansatz:
    """Gaussian ansatz factors with chi3 = chi3' chi3'' and chi4 = chi4' chi4''.

    By default chi3' = chi1 and chi4'' = chi2; ``inner`` overrides (chi3'', chi4').
    ``rank1`` makes m3 an outer product, so the ideal cut entropy is zero.
    """
    if inner is None:
        if d.chi3 % d.chi1 or d.chi4 % d.chi2:
            raise DimensionError(
                f"ansatz tensors need chi1 | chi3 and chi2 | chi4, got {d}"
            )
        inner = (d.chi3 // d.chi1, d.chi4 // d.chi2)
    chi3b, chi4a = inner
    if d.chi3 % chi3b or d.chi4 % chi4a:
        raise DimensionError(f"inner dims {inner} do not divide ({d.chi3}, {d.chi4})")
    m1 = complex_gaussian(rng, (d.chi1, d.chi3 // chi3b))
    m2 = complex_gaussian(rng, (d.chi2, d.chi4 // chi4a))
    if rank1:
        m3 = np.outer(complex_gaussian(rng, chi3b), complex_gaussian(rng, chi4a))
    else:
        m3 = complex_gaussian(rng, (chi3b, chi4a))
    return Ansatz(ansatz_tensor(m1, m2, m3), m1, m2, m3)


def make_tensor(
    kind: SpectrumKind | str, d: Dims, rng: np.random.Generator, *, rank1: bool = False
) -> Tensor3:
    """Draw one tensor of ``kind`` with dims ``d``."""
    kind = SpectrumKind.parse(kind)
    if kind is SpectrumKind.GAUSSIAN:
        return gaussian_tensor(d, rng)
    if kind is SpectrumKind.HARMONIC_SPECTRUM:
        return spectrum_tensor(d, harmonic(d.chi1**2), rng)
    if kind is SpectrumKind.GEOMETRIC_SPECTRUM:
        return spectrum_tensor(d, geometric(d.chi1**2), rng)
    if kind is SpectrumKind.HARMONIC_OUTER:
        return outer_product_tensor(d, harmonic(d.chi1**2), rng)
    return random_ansatz(d, rng, rank1=rank1).tensor


def check_kind_dims(kind: SpectrumKind | str, d: Dims) -> None:
    """Raise DimensionError if ``kind`` cannot be drawn with dims ``d``."""
    kind = SpectrumKind.parse(kind)
    if kind is SpectrumKind.GAUSSIAN:
        return
    if kind is SpectrumKind.ANSATZ:
        if d.chi3 % d.chi1 or d.chi4 % d.chi2:
            raise DimensionError(f"ansatz tensors need chi1 | chi3 and chi2 | chi4, got {d}")
        return
    if d.chi1 != d.chi2 or d.chi3 != d.chi4:
        raise DimensionError(f"{kind.value} tensors need chi1 == chi2 and chi3 == chi4, got {d}")
    if kind is not SpectrumKind.HARMONIC_OUTER and d.chi1 > d.chi3:
        raise DimensionError(f"{kind.value} tensors need chi1 <= chi3, got {d}")


def random_state(n: int, rng: np.random.Generator) -> QubitState:
    """Normalized vector of 2^n complex Gaussian amplitudes."""
    from .wavefunction import QubitState

    if not 2 <= n <= MAX_QUBITS:
        raise DimensionError(f"qubit count must be in 2..{MAX_QUBITS}, got {n}")
    psi = complex_gaussian(rng, 2**n)
    return QubitState(psi / np.linalg.norm(psi))
