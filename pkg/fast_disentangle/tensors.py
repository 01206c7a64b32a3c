"""Dense tensor storage and the linear-algebra kernels the disentangler consumes.

Tensor3 stores its entries row-major over (k, a, b); every index formula in the
package is 0-based. Values are read-only after construction, so they can be
shared between threads. Stochastic kernels take an explicit numpy Generator.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, svds

from .errors import DimensionError, NonFiniteError, SvdConvergenceError, ZeroTensorError

logger = logging.getLogger(__name__)

#: Per-component variance of complex Gaussian samples, so that E|z|^2 = 1.
COMPONENT_VARIANCE = 0.5

#: Relative tolerance (w.r.t. ||B||_F / sqrt(n)) below which a Gram-Schmidt
#: residual counts as linearly dependent.
DEPENDENCE_TOL = 1e-12

#: Smaller side from which dominant_singular_pair switches to ARPACK. Below it
#: ARPACK's fixed per-call cost loses to a dense gesdd.
ITERATIVE_MIN_DIM = 512

_ARPACK_SEED = 0x5EED


def make_rng(seed: int | np.random.SeedSequence | None = None) -> np.random.Generator:
    """Return the package's generator (PCG64) seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(seed))


def complex_gaussian(rng: np.random.Generator, shape: int | Sequence[int]) -> np.ndarray:
    """I.i.d. standard complex Gaussian samples of the given shape."""
    scale = np.sqrt(COMPONENT_VARIANCE)
    return rng.normal(scale=scale, size=shape) + 1j * rng.normal(scale=scale, size=shape)


def _frozen_complex(values: np.ndarray | Sequence, *, ndim: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.ndim != ndim or 0 in arr.shape:
        raise DimensionError(f"{what} needs {ndim} non-empty axes, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} contains NaN or Inf entries")
    arr.flags.writeable = False
    return arr


# ---- tensors ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Tensor3:
    """Order-3 complex tensor A_{k,ab} with dims (d0, d1, d2) = (chi1*chi2, chi3, chi4)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _frozen_complex(self.data, ndim=3, what="Tensor3"))

    @classmethod
    def from_flat(cls, dims: Sequence[int], values: Sequence[complex] | np.ndarray) -> Tensor3:
        """Build from a flat row-major (k, a, b) sequence."""
        flat = np.asarray(values)
        if flat.size != int(np.prod(dims)):
            raise DimensionError(f"{flat.size} values do not fill dims {tuple(dims)}")
        return cls(flat.reshape(tuple(dims)))

    @property
    def dims(self) -> tuple[int, int, int]:
        d0, d1, d2 = self.data.shape
        return d0, d1, d2

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)


class Grouping(str, Enum):
    """Which adjacent pair of Tensor3 indices becomes the matrix row or column."""

    LEFT = "(ka)b"
    RIGHT = "k(ab)"

    @classmethod
    def parse(cls, value: Grouping | str) -> Grouping:
        if isinstance(value, Grouping):
            return value
        key = _GROUPING_ALIASES.get(str(value).strip().lower(), value)
        try:
            return cls(key)
        except ValueError:
            raise DimensionError(
                f"invalid grouping {value!r}; use one of "
                f"{[g.value for g in cls]} (or 'first'/'last')"
            ) from None


_GROUPING_ALIASES = {"first": "(ka)b", "ka": "(ka)b", "last": "k(ab)", "ab": "k(ab)"}


@dataclass(frozen=True, eq=False)
class MatrixView:
    """A Tensor3 read as a matrix with one declared index grouping."""

    tensor: Tensor3
    grouping: Grouping

    @property
    def rows(self) -> int:
        d0, d1, _ = self.tensor.dims
        return d0 * d1 if self.grouping is Grouping.LEFT else d0

    @property
    def cols(self) -> int:
        _, d1, d2 = self.tensor.dims
        return d2 if self.grouping is Grouping.LEFT else d1 * d2

    @property
    def matrix(self) -> np.ndarray:
        # row-major storage makes both groupings a zero-copy reshape
        return self.tensor.data.reshape(self.rows, self.cols)


def group_indices(t: Tensor3, grouping: Grouping | str) -> MatrixView:
    """View ``t`` as a matrix, merging the two indices named by ``grouping``."""
    return MatrixView(t, Grouping.parse(grouping))


def ungroup(view: MatrixView) -> Tensor3:
    """Inverse of group_indices."""
    return Tensor3(view.matrix.reshape(view.tensor.dims))


def _as_matrix(m: MatrixView | np.ndarray) -> np.ndarray:
    if isinstance(m, MatrixView):
        return m.matrix
    mat = np.asarray(m)
    if mat.ndim != 2 or 0 in mat.shape:
        raise DimensionError(f"expected a non-empty matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NonFiniteError("matrix contains NaN or Inf entries")
    return mat


# ---- SVD -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SvdResult:
    """M = u @ diag(s) @ v^H with orthonormal columns in u and v, s descending."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.conj().T


class DominantPair(NamedTuple):
    left: np.ndarray
    right: np.ndarray
    sigma: float


def lapack_svd(mat: np.ndarray, *, compute_uv: bool = True):
    """Thin SVD via gesdd, falling back to gesvd; raises SvdConvergenceError."""
    try:
        return linalg.svd(mat, full_matrices=False, compute_uv=compute_uv, lapack_driver="gesdd")
    except linalg.LinAlgError:
        logger.warning("gesdd did not converge on a %s matrix; retrying with gesvd", mat.shape)
    try:
        return linalg.svd(mat, full_matrices=False, compute_uv=compute_uv, lapack_driver="gesvd")
    except linalg.LinAlgError as exc:
        raise SvdConvergenceError(f"SVD of a {mat.shape} matrix did not converge") from exc


def _fix_phases(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate each (u_j, v_j) by one phase so v_j's largest entry is real >= 0."""
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    size = np.abs(pivots)
    phases = np.where(size > 0, pivots / np.where(size > 0, size, 1.0), 1.0)
    return u * phases.conj(), v * phases.conj()


def svd_full(m: MatrixView | np.ndarray) -> SvdResult:
    """Thin SVD with min(rows, cols) singular triples."""
    u, s, vh = lapack_svd(_as_matrix(m))
    u, v = _fix_phases(u, vh.conj().T)
    return SvdResult(u, s, v)


def svd_truncated(m: MatrixView | np.ndarray, k: int) -> SvdResult:
    """The top-``k`` singular triples (best rank-k Frobenius approximation)."""
    mat = _as_matrix(m)
    if not 1 <= k <= min(mat.shape):
        raise DimensionError(f"k={k} outside 1..{min(mat.shape)} for a {mat.shape} matrix")
    full = svd_full(mat)
    return SvdResult(full.u[:, :k], full.s[:k], full.v[:, :k])


def svd_values(m: MatrixView | np.ndarray) -> np.ndarray:
    """Singular values only, descending."""
    return lapack_svd(_as_matrix(m), compute_uv=False)


def _arpack_pair(mat: np.ndarray) -> DominantPair | None:
    v0 = complex_gaussian(make_rng(_ARPACK_SEED), min(mat.shape))
    try:
        u, s, vh = svds(mat.astype(np.complex128), k=1, v0=v0, tol=0, solver="arpack")
    except (ArpackNoConvergence, ArpackError) as exc:
        logger.warning("ARPACK failed on a %s matrix (%s); using dense SVD", mat.shape, exc)
        return None
    left, right = _fix_phases(u, vh.conj().T)
    sigma = float(s[0])
    residual = np.linalg.norm(mat @ right[:, 0] - sigma * left[:, 0])
    if residual > 1e-10 * sigma:
        logger.warning("ARPACK residual %.3g too large; using dense SVD", residual / sigma)
        return None
    return DominantPair(left[:, 0], right[:, 0], sigma)


def dominant_singular_pair(m: MatrixView | np.ndarray) -> DominantPair:
    """First columns of U and V in M = U diag(S) V^H, with sigma = S[0]."""
    mat = _as_matrix(m)
    if not np.any(mat):
        raise ZeroTensorError("the dominant singular pair of a zero matrix is undefined")
    if min(mat.shape) >= ITERATIVE_MIN_DIM:
        pair = _arpack_pair(mat)
        if pair is not None:
            return pair
    full = svd_full(mat)
    return DominantPair(full.u[:, 0], full.v[:, 0], float(full.s[0]))


# ---- orthonormalization ------------------------------------------------------


def _orthogonalize(vec: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # classical Gram-Schmidt, applied twice
    for _ in range(2):
        if len(basis):
            vec = vec - basis.T @ (basis.conj() @ vec)
    return vec


def _random_orthogonal_vector(basis: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        candidate = complex_gaussian(rng, n)
        vec = _orthogonalize(candidate, basis)
        norm = np.linalg.norm(vec)
        if norm > 1e-8 * np.linalg.norm(candidate):
            return vec / norm


def gram_schmidt_rows(
    b: MatrixView | np.ndarray, order: Sequence[int] | np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Orthonormalize the rows of square ``b``, visiting them in ``order``.

    Output row ``r`` is the normalized residual of ``b[r]`` against the rows
    produced before it. A residual whose norm drops to DEPENDENCE_TOL *
    ||b||_F / sqrt(n) or below is replaced by a random unit vector orthogonal
    to every earlier row. Hence ``(G @ b^H)[r, c] == 0`` whenever row ``r``
    was visited after row ``c``.
    """
    mat = np.asarray(_as_matrix(b), dtype=np.complex128)
    n, cols = mat.shape
    if n != cols:
        raise DimensionError(f"gram_schmidt_rows needs a square matrix, got {mat.shape}")
    order = np.asarray(order, dtype=int)
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise DimensionError(f"order must be a permutation of 0..{n - 1}")

    tol = DEPENDENCE_TOL * np.linalg.norm(mat) / np.sqrt(n)
    out = np.zeros_like(mat)
    for pos, row in enumerate(order):
        basis = out[order[:pos]]
        vec = _orthogonalize(mat[row], basis)
        norm = np.linalg.norm(vec)
        if norm <= tol:
            logger.debug("row %d is linearly dependent; completing randomly", row)
            out[row] = _random_orthogonal_vector(basis, n, rng)
        else:
            out[row] = vec / norm
    return out


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random n x n unitary (QR of a complex Gaussian, phase-corrected)."""
    if n < 1:
        raise DimensionError(f"unitary size must be >= 1, got {n}")
    q, r = linalg.qr(complex_gaussian(rng, (n, n)))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random semi-unitary with orthonormal columns (rows >= cols)."""
    if cols > rows:
        raise DimensionError(f"an isometry needs rows >= cols, got {rows}x{cols}")
    return random_unitary(rows, rng)[:, :cols]


def unitarity_error(u: np.ndarray) -> float:
    """max |U U^H - 1| and |U^H U - 1| over all entries."""
    u = np.asarray(u)
    eye = np.eye(u.shape[0])
    return float(max(np.max(np.abs(u @ u.conj().T - eye)), np.max(np.abs(u.conj().T @ u - eye))))
