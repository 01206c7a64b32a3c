"""Gradient descent of the cut entropy over the unitary group.

This is the slow baseline: it estimates the minimal entropy S_min, gives the
random-unitary reference S_rand and times the speedup comparison. Gradients
use the convention dS = Re sum conj(G) dU.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from .disentangle import Disentangler, DisentangleOptions, disentangle_auto
from .entanglement import SingularSpectrum, entanglement_entropy, von_neumann_entropy
from .errors import DimensionError
from .tensors import Tensor3, lapack_svd, make_rng, random_unitary, svd_values

logger = logging.getLogger(__name__)

#: Added to probabilities inside logarithms of the gradient only.
GRADIENT_EPS = 1e-12

#: Riemannian gradient norms at or below this count as stationary.
STATIONARY_TOL = 1e-12


class DescentConfig(BaseModel):
    """Line-search and halting parameters for riemannian_descent."""

    model_config = ConfigDict(frozen=True)

    initial_step: float = Field(1.0, gt=0)
    backtracking: float = Field(0.5, gt=0, lt=1)
    min_step: float = Field(1e-8, gt=0)
    max_iterations: int = Field(500, ge=1)
    tolerance: float = Field(1e-10, gt=0)
    restarts: int = Field(8, ge=1)
    armijo: float = Field(1e-4, gt=0, lt=1)
    target_entropy: float | None = Field(None, ge=0)

    @classmethod
    def per_gate(cls) -> DescentConfig:
        """Bounded budget used for every gate of a wavefunction sweep."""
        return cls(max_iterations=200, restarts=1)


@dataclass(frozen=True, eq=False)
class DescentTrace:
    """Accepted iterates of one descent; entropies[0] is the starting value."""

    entropies: tuple[float, ...]
    steps: tuple[float, ...]
    gradient_norms: tuple[float, ...]
    unitary: Disentangler
    duration: float
    halt_reason: str

    @property
    def entropy(self) -> float:
        return self.entropies[-1]

    @property
    def iterations(self) -> int:
        return len(self.steps)


def _cut_matrix(u: np.ndarray, a: np.ndarray, chi1: int, chi2: int) -> np.ndarray:
    t = np.tensordot(u.reshape(chi1, chi2, -1), a, axes=1)
    _, _, chi3, chi4 = t.shape
    return t.transpose(0, 2, 1, 3).reshape(chi1 * chi3, chi2 * chi4)


def entropy_of_unitary(u: np.ndarray, a: Tensor3, chi1: int, chi2: int) -> float:
    """Exact cut entropy of (u . A) for a (chi1 chi2)-square matrix u."""
    values = svd_values(_cut_matrix(u, a.data, chi1, chi2))
    return von_neumann_entropy(SingularSpectrum(values))


def entropy_and_gradient(u: Disentangler, a: Tensor3) -> tuple[float, np.ndarray]:
    """Cut entropy of U . A and its Euclidean gradient with respect to U's matrix."""
    chi1, chi2 = u.chi1, u.chi2
    n = chi1 * chi2
    if a.dims[0] != n:
        raise DimensionError(f"disentangler acts on a leg of size {n}, tensor has {a.dims[0]}")
    _, chi3, chi4 = a.dims
    m = _cut_matrix(u.matrix, a.data, chi1, chi2)
    x, sigma, yh = lapack_svd(m)
    entropy = von_neumann_entropy(SingularSpectrum(sigma))

    q = sigma**2
    z = q.sum()
    p = q / z
    smooth = -np.sum(p * np.log(p + GRADIENT_EPS))
    dq = -(np.log(p + GRADIENT_EPS) + smooth) / z
    g_m = (x * (2.0 * dq * sigma)) @ yh
    g_t = g_m.reshape(chi1, chi3, chi2, chi4).transpose(0, 2, 1, 3)
    g_u = np.einsum("ijab,kab->ijk", g_t, a.data.conj(), optimize=True)
    return entropy, g_u.reshape(n, n)


def riemannian_gradient(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space U . skew at U."""
    w = u.conj().T @ g
    return u @ ((w - w.conj().T) / 2)


def _retract(u: np.ndarray) -> np.ndarray:
    unitary, _ = linalg.polar(u)
    return unitary


def riemannian_descent(
    a: Tensor3, u0: Disentangler, cfg: DescentConfig | None = None
) -> DescentTrace:
    """Steepest descent with Armijo backtracking and a polar retraction.

    Stops when no step above ``min_step`` decreases the entropy, when an
    accepted step gains less than ``tolerance``, when the gradient vanishes,
    when ``target_entropy`` is reached or after ``max_iterations``. The last
    iterate is also the best one.
    """
    cfg = cfg or DescentConfig()
    chi1, chi2 = u0.chi1, u0.chi2
    started = time.perf_counter()
    u = _retract(u0.matrix)
    current = Disentangler.from_matrix(u, chi1, chi2)
    entropy = entropy_of_unitary(u, a, chi1, chi2)
    _, grad = entropy_and_gradient(current, a)
    entropies, steps, norms = [entropy], [], []
    step = cfg.initial_step
    reason = "max_iterations"

    for _ in range(cfg.max_iterations):
        if cfg.target_entropy is not None and entropy <= cfg.target_entropy:
            reason = "target"
            break
        rgrad = riemannian_gradient(u, grad)
        norm_sq = float(np.vdot(rgrad, rgrad).real)
        norms.append(float(np.sqrt(norm_sq)))
        if norms[-1] <= STATIONARY_TOL:
            reason = "stationary"
            break

        step = min(cfg.initial_step, step / cfg.backtracking)
        while step >= cfg.min_step:
            trial = _retract(u - step * rgrad)
            trial_entropy = entropy_of_unitary(trial, a, chi1, chi2)
            if trial_entropy <= entropy - cfg.armijo * step * norm_sq:
                break
            step *= cfg.backtracking
        else:
            reason = "step"
            break

        gain = entropy - trial_entropy
        u, entropy = trial, trial_entropy
        current = Disentangler.from_matrix(u, chi1, chi2)
        _, grad = entropy_and_gradient(current, a)
        entropies.append(entropy)
        steps.append(step)
        if gain < cfg.tolerance:
            reason = "tolerance"
            break

    duration = time.perf_counter() - started
    logger.debug(
        "descent halted (%s) after %d iterations at S=%.6g", reason, len(steps), entropy
    )
    return DescentTrace(
        entropies=tuple(entropies),
        steps=tuple(steps),
        gradient_norms=tuple(norms),
        unitary=current,
        duration=duration,
        halt_reason=reason,
    )


def haar_disentangler(chi1: int, chi2: int, rng: np.random.Generator) -> Disentangler:
    return Disentangler.from_matrix(random_unitary(chi1 * chi2, rng), chi1, chi2)


def random_unitary_entropy(a: Tensor3, chi1: int, chi2: int, rng: np.random.Generator) -> float:
    """Cut entropy of U_Haar . A."""
    return entanglement_entropy(haar_disentangler(chi1, chi2, rng), a)


def _fast_start(a: Tensor3, chi1: int, chi2: int, rng: np.random.Generator) -> Disentangler:
    unitary, _ = disentangle_auto(a, chi1, chi2, DisentangleOptions(pad_unsupported=True), rng)
    return unitary


def minimize_entropy(
    a: Tensor3,
    chi1: int,
    chi2: int,
    cfg: DescentConfig | None = None,
    rng: np.random.Generator | None = None,
    *,
    starts: Sequence[Disentangler] = (),
) -> DescentTrace:
    """Best of ``cfg.restarts`` descents.

    The given ``starts`` fill the first restart slots; with none given the
    first slot starts from the fast disentangler. Remaining slots start from
    Haar-random unitaries. Ties go to the earliest restart.
    """
    cfg = cfg or DescentConfig()
    if rng is None:
        rng = make_rng()
    slots = max(cfg.restarts, len(starts))
    best: DescentTrace | None = None
    for slot, child in enumerate(rng.spawn(slots)):
        if slot < len(starts):
            u0 = starts[slot]
        elif slot == 0:
            u0 = _fast_start(a, chi1, chi2, child)
        else:
            u0 = haar_disentangler(chi1, chi2, child)
        trace = riemannian_descent(a, u0, cfg)
        logger.debug("restart %d: S=%.6g (%s)", slot, trace.entropy, trace.halt_reason)
        if best is None or trace.entropy < best.entropy:
            best = trace
    assert best is not None
    return best


def estimate_min_entropy(
    a: Tensor3,
    chi1: int,
    chi2: int,
    cfg: DescentConfig | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """S_min estimate: lowest entropy over the descent restarts."""
    return minimize_entropy(a, chi1, chi2, cfg, rng).entropy
