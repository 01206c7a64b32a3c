"""The fast disentangling algorithm, its chi1 > chi3 extension and the dispatcher.

Given A_{k,ab} with dims (chi1*chi2, chi3, chi4) the algorithm returns a
unitary U_{ij,k} (chi1 x chi2 x chi1*chi2) that roughly minimizes the
entanglement of U . A across the (i, a) | (j, b) cut:

1. r <- complex Gaussian vector of length chi1*chi2
2. alpha3*, alpha4 <- dominant left/right singular vectors of (r . A)_{ab}
3. V3 <- top-chi1 right singular vectors of sum_b A_{k,ab} alpha4_b
4. V4 <- top-chi2 right singular vectors of sum_a A_{k,ab} alpha3_a
5. B_{k,ij} = sum_ab A_{k,ab} V3_{ai} V4_{bj}
6. U <- ordered Gram-Schmidt of the rows of B^H

Every function is a pure function of its inputs and the Generator it is
handed; concurrent calls need independent generators.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .entanglement import entanglement_entropy
from .errors import DimensionError, RegimeError, ZeroTensorError
from .tensors import (
    Tensor3,
    complex_gaussian,
    dominant_singular_pair,
    gram_schmidt_rows,
    lapack_svd,
    make_rng,
    svd_truncated,
    unitarity_error,
)

logger = logging.getLogger(__name__)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Dims:
    """(chi1, chi2) are the output legs of U; (chi3, chi4) the retained legs of A."""

    chi1: int
    chi2: int
    chi3: int
    chi4: int

    def __post_init__(self) -> None:
        for name in ("chi1", "chi2", "chi3", "chi4"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise DimensionError(f"{name} must be a positive integer, got {value!r}")

    @classmethod
    def of(cls, a: Tensor3, chi1: int, chi2: int) -> Dims:
        d0, chi3, chi4 = a.dims
        if chi1 * chi2 != d0:
            raise DimensionError(f"tensor leg of size {d0} cannot split into {chi1} x {chi2}")
        return cls(chi1, chi2, chi3, chi4)

    @property
    def chi4to3(self) -> int:
        return _ceil_div(self.chi1, self.chi3)

    @property
    def chi4_prime(self) -> int:
        return _ceil_div(self.chi4, self.chi4to3)

    @property
    def is_base(self) -> bool:
        return self.chi1 <= self.chi3 and self.chi2 <= self.chi4

    def swapped(self) -> Dims:
        return Dims(self.chi2, self.chi1, self.chi4, self.chi3)


@dataclass(frozen=True, eq=False)
class Disentangler:
    """Unitary tensor U_{ij,k} stored with shape (chi1, chi2, chi1*chi2)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=np.complex128, copy=True)
        if arr.ndim != 3 or arr.shape[2] != arr.shape[0] * arr.shape[1]:
            raise DimensionError(f"a disentangler has shape (chi1, chi2, chi1*chi2), got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_matrix(cls, u: np.ndarray, chi1: int, chi2: int) -> Disentangler:
        """Rows of ``u`` are the grouped (i, j) index, columns the k index."""
        return cls(np.asarray(u).reshape(chi1, chi2, chi1 * chi2))

    @classmethod
    def identity(cls, chi1: int, chi2: int) -> Disentangler:
        return cls.from_matrix(np.eye(chi1 * chi2), chi1, chi2)

    @property
    def chi1(self) -> int:
        return self.data.shape[0]

    @property
    def chi2(self) -> int:
        return self.data.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        n = self.data.shape[2]
        return self.data.reshape(n, n)

    def unitarity_error(self) -> float:
        return unitarity_error(self.matrix)

    def swap_legs(self) -> Disentangler:
        return Disentangler(self.data.transpose(1, 0, 2))


class Ordering(str, Enum):
    """How step 6 linearizes (i, j): ROW is chi2*i + j, COLUMN is chi1*j + i."""

    ROW = "row"
    COLUMN = "column"

    @classmethod
    def default_for(cls, chi1: int, chi2: int) -> Ordering:
        return cls.ROW if chi1 <= chi2 else cls.COLUMN

    def keys(self, chi1: int, chi2: int) -> np.ndarray:
        """Key of each natural row index r = chi2*i + j."""
        i, j = np.divmod(np.arange(chi1 * chi2), chi2)
        return chi2 * i + j if self is Ordering.ROW else chi1 * j + i


class Regime(str, Enum):
    BASE = "base"
    EXTENDED = "extended"
    SWAPPED = "swapped"
    PADDED = "padded"


class DisentangleOptions(BaseModel):
    """Best-of settings for disentangle_auto."""

    model_config = ConfigDict(frozen=True)

    trials: int = Field(1, ge=1)
    try_both_orderings: bool = False
    seed: int | None = None
    pad_unsupported: bool = False


@dataclass(frozen=True, eq=False)
class AlgorithmSteps:
    """Intermediate quantities of one run of the base algorithm."""

    r: np.ndarray | None
    alpha3: np.ndarray | None
    alpha4: np.ndarray | None
    v3: np.ndarray
    v4: np.ndarray
    b: np.ndarray
    ordering: Ordering
    unitary: Disentangler

    def triangular_residual(self) -> float:
        """Largest |(U . B)_{ij,i'j'}| with key(i,j) > key(i',j'), relative to ||B||_F."""
        chi1, chi2 = self.unitary.chi1, self.unitary.chi2
        n = chi1 * chi2
        ub = self.unitary.matrix @ self.b.reshape(n, n)
        keys = self.ordering.keys(chi1, chi2)
        below = keys[:, None] > keys[None, :]
        scale = np.linalg.norm(self.b) or 1.0
        return float(np.max(np.abs(ub[below]), initial=0.0) / scale)


def zero_singular_lower_bound(d: Dims) -> int:
    """Guaranteed number of zero singular values of U . A across the cut.

    max(0, chi1(chi1-1)/2 - max(chi1 chi3, chi2 chi4) + chi2^2) for chi1 <= chi2;
    the legs are swapped first when chi1 > chi2.
    """
    if d.chi1 > d.chi2:
        d = d.swapped()
    bound = d.chi1 * (d.chi1 - 1) // 2 - max(d.chi1 * d.chi3, d.chi2 * d.chi4) + d.chi2**2
    return max(0, bound)


# ---- base algorithm ----------------------------------------------------------


def fast_disentangle_steps(
    a: Tensor3,
    chi1: int,
    chi2: int,
    rng: np.random.Generator,
    *,
    ordering: Ordering | None = None,
    skip_projection: bool = False,
) -> AlgorithmSteps:
    """Run the base algorithm and keep every intermediate.

    ``skip_projection`` feeds B = A straight into step 6 (only when chi1 = chi3
    and chi2 = chi4); it still solves the product ansatz but is typically worse.
    """
    dims = Dims.of(a, chi1, chi2)
    if not dims.is_base:
        raise RegimeError(
            f"base algorithm needs chi1 <= chi3 and chi2 <= chi4, got {dims}; "
            "use disentangle_auto"
        )
    if not np.any(a.data):
        raise ZeroTensorError("cannot disentangle a zero tensor")
    tensor = a.data
    n = chi1 * chi2

    r = alpha3 = alpha4 = None
    if skip_projection:
        if (dims.chi3, dims.chi4) != (chi1, chi2):
            raise RegimeError("skip_projection needs chi1 == chi3 and chi2 == chi4")
        v3, v4, b = np.eye(chi1), np.eye(chi2), tensor
    else:
        r = complex_gaussian(rng, n)
        pair = dominant_singular_pair(np.tensordot(r, tensor, axes=1))
        alpha3, alpha4 = pair.left.conj(), pair.right
        v3 = svd_truncated(np.tensordot(tensor, alpha4, axes=1), chi1).v
        v4 = svd_truncated(np.tensordot(tensor, alpha3, axes=(1, 0)), chi2).v
        b = np.einsum("kab,ai,bj->kij", tensor, v3, v4, optimize=True)

    ordering = ordering or Ordering.default_for(chi1, chi2)
    b_dag = b.reshape(n, n).conj().T
    order = np.argsort(ordering.keys(chi1, chi2), kind="stable")
    g = gram_schmidt_rows(b_dag, order, rng)
    return AlgorithmSteps(
        r=r,
        alpha3=alpha3,
        alpha4=alpha4,
        v3=v3,
        v4=v4,
        b=b,
        ordering=ordering,
        unitary=Disentangler.from_matrix(g, chi1, chi2),
    )


def fast_disentangle(
    a: Tensor3,
    chi1: int,
    chi2: int,
    rng: np.random.Generator,
    *,
    ordering: Ordering | None = None,
) -> Disentangler:
    """Base algorithm for chi1 <= chi3 and chi2 <= chi4."""
    return fast_disentangle_steps(a, chi1, chi2, rng, ordering=ordering).unitary


# ---- chi1 > chi3 extension -------------------------------------------------


def extended_tensor(a: Tensor3, dims: Dims) -> Tensor3:
    """A'_{k,(a a') b'} = sum_b A_{k,ab} V~_{b,a'b'} with i = a' chi4' + b'."""
    tensor = a.data
    n, chi3, chi4 = tensor.shape
    # thin SVD: columns of V~ past rank(A) are null vectors and contribute zeros
    _, _, vh = lapack_svd(tensor.reshape(n * chi3, chi4))
    projected = np.tensordot(tensor, vh.conj().T, axes=1)
    width = dims.chi4to3 * dims.chi4_prime
    padded = np.pad(projected, ((0, 0), (0, 0), (0, width - projected.shape[2])))
    return Tensor3(padded.reshape(n, chi3 * dims.chi4to3, dims.chi4_prime))


def extended_disentangle(a: Tensor3, chi1: int, chi2: int, rng: np.random.Generator) -> Disentangler:
    """Fast disentangling for chi1 > chi3, valid while chi2 <= ceil(chi4 / ceil(chi1/chi3))."""
    dims = Dims.of(a, chi1, chi2)
    if dims.chi1 <= dims.chi3:
        raise RegimeError(f"extended path is for chi1 > chi3, got {dims}")
    if dims.chi2 > dims.chi4_prime:
        raise RegimeError(
            f"chi2={dims.chi2} exceeds chi4'={dims.chi4_prime} "
            f"(chi4->3={dims.chi4to3}); no extension applies"
        )
    if not np.any(a.data):
        raise ZeroTensorError("cannot disentangle a zero tensor")
    reduced = extended_tensor(a, dims)
    return fast_disentangle(reduced, chi1, chi2, rng, ordering=Ordering.ROW)


def _swapped_disentangle(
    a: Tensor3, chi1: int, chi2: int, rng: np.random.Generator
) -> Disentangler:
    transposed = Tensor3(a.data.transpose(0, 2, 1))
    return extended_disentangle(transposed, chi2, chi1, rng).swap_legs()


def _padded_disentangle(
    a: Tensor3, chi1: int, chi2: int, rng: np.random.Generator, ordering: Ordering | None
) -> Disentangler:
    _, chi3, chi4 = a.dims
    padded = np.pad(a.data, ((0, 0), (0, max(chi1 - chi3, 0)), (0, max(chi2 - chi4, 0))))
    return fast_disentangle(Tensor3(padded), chi1, chi2, rng, ordering=ordering)


# ---- dispatch ----------------------------------------------------------------


def select_regime(dims: Dims) -> Regime:
    """Which variant of the algorithm applies to ``dims``."""
    if dims.is_base:
        return Regime.BASE
    if dims.chi1 > dims.chi3 and dims.chi2 <= dims.chi4_prime:
        return Regime.EXTENDED
    flipped = dims.swapped()
    if dims.chi2 > dims.chi4 and flipped.chi2 <= flipped.chi4_prime:
        return Regime.SWAPPED
    raise RegimeError(
        f"no regime applies to {dims}: need chi2 <= ceil(chi4/ceil(chi1/chi3)) "
        "or chi1 <= ceil(chi3/ceil(chi2/chi4))"
    )


def _run_once(
    regime: Regime,
    a: Tensor3,
    dims: Dims,
    rng: np.random.Generator,
    ordering: Ordering | None,
) -> Disentangler:
    if regime is Regime.BASE:
        return fast_disentangle(a, dims.chi1, dims.chi2, rng, ordering=ordering)
    if regime is Regime.EXTENDED:
        return extended_disentangle(a, dims.chi1, dims.chi2, rng)
    if regime is Regime.SWAPPED:
        return _swapped_disentangle(a, dims.chi1, dims.chi2, rng)
    return _padded_disentangle(a, dims.chi1, dims.chi2, rng, ordering)


def disentangle_auto(
    a: Tensor3,
    chi1: int,
    chi2: int,
    opts: DisentangleOptions | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[Disentangler, float]:
    """Dispatch on the dimension regime and keep the lowest-entropy attempt.

    Each of ``opts.trials`` attempts draws from its own child stream of
    ``rng`` (``rng.spawn``); ties go to the earliest attempt. The selection
    metric is the Von Neumann entropy across the cut.
    """
    opts = opts or DisentangleOptions()
    if rng is None:
        rng = make_rng(opts.seed)
    dims = Dims.of(a, chi1, chi2)
    if not np.any(a.data):
        raise ZeroTensorError("cannot disentangle a zero tensor")
    try:
        regime = select_regime(dims)
    except RegimeError:
        if not opts.pad_unsupported:
            raise
        logger.warning("no regime applies to %s; zero-padding the retained legs", dims)
        regime = Regime.PADDED
    logger.debug("disentangling %s via the %s regime", dims, regime.value)

    orderings: list[Ordering | None] = [None]
    if opts.try_both_orderings and regime in (Regime.BASE, Regime.PADDED):
        orderings = [Ordering.ROW, Ordering.COLUMN]

    best: tuple[Disentangler, float] | None = None
    for trial, trial_rng in enumerate(rng.spawn(opts.trials)):
        for ordering in orderings:
            stream = copy.deepcopy(trial_rng) if len(orderings) > 1 else trial_rng
            unitary = _run_once(regime, a, dims, stream, ordering)
            entropy = entanglement_entropy(unitary, a)
            logger.debug("attempt %d (%s): S=%.6g", trial, ordering, entropy)
            if best is None or entropy < best[1]:
                best = (unitary, entropy)
    assert best is not None
    return best
