"""Layered 2-qubit disentangling of a 1D state vector.

Qubit 1 is the most significant bit of the amplitude index. Bond i joins
qubits i and i+1 (1-based); cut c separates qubits 1..c from c+1..n.
Odd layers act on bonds 1, 3, ... and even layers on bonds 2, 4, ...; gates
are applied as soon as they are found, so later bonds see the updated state.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .descent import DescentConfig, haar_disentangler, riemannian_descent
from .disentangle import Disentangler, DisentangleOptions, disentangle_auto
from .entanglement import SingularSpectrum, von_neumann_entropy
from .errors import ConfigError, DimensionError, NonFiniteError, NormalizationError
from .tensors import Tensor3, svd_values

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10

#: Options for every fast gate; tiny chains have bonds no regime covers.
SWEEP_OPTIONS = DisentangleOptions(pad_unsupported=True)


class Method(str, Enum):
    FAST = "fast"
    DESCENT = "descent"
    FAST_THEN_DESCENT = "fast-then-descent"


class Parity(str, Enum):
    ODD = "odd"
    EVEN = "even"

    def bonds(self, n: int) -> range:
        return range(1 if self is Parity.ODD else 2, n, 2)

    def other(self) -> Parity:
        return Parity.EVEN if self is Parity.ODD else Parity.ODD


@dataclass(frozen=True, eq=False)
class QubitState:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        psi = np.array(self.amplitudes, dtype=np.complex128, copy=True).reshape(-1)
        n = int(round(math.log2(psi.size))) if psi.size else 0
        if n < 2 or psi.size != 2**n:
            raise DimensionError(f"a state of n >= 2 qubits has 2^n amplitudes, got {psi.size}")
        if not np.all(np.isfinite(psi)):
            raise NonFiniteError("state contains NaN or Inf amplitudes")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm is {norm:.12g}, expected 1")
        psi.flags.writeable = False
        object.__setattr__(self, "amplitudes", psi)

    @property
    def n(self) -> int:
        return self.amplitudes.size.bit_length() - 1


@dataclass(frozen=True, eq=False)
class SweepRecord:
    """State of the chain after one layer."""

    layer: int
    parity: Parity
    method: Method
    entropies: tuple[float, ...]
    gates: tuple[tuple[int, np.ndarray], ...] = field(repr=False)
    cumulative_gates: int
    elapsed: float

    @property
    def residual(self) -> float:
        return max(self.entropies)


def _check_bond(psi: QubitState, i: int) -> None:
    if not 1 <= i <= psi.n - 1:
        raise DimensionError(f"bond index must be in 1..{psi.n - 1}, got {i}")


def pair_tensor(psi: QubitState, i: int) -> Tensor3:
    """psi as A_{(k_i k_i+1), left, right} with dims (4, 2^(i-1), 2^(n-i-1))."""
    _check_bond(psi, i)
    left, right = 2 ** (i - 1), 2 ** (psi.n - i - 1)
    grouped = psi.amplitudes.reshape(left, 2, 2, right).transpose(1, 2, 0, 3)
    return Tensor3(grouped.reshape(4, left, right))


def apply_gate(psi: QubitState, i: int, u: Disentangler) -> QubitState:
    """Contract U_{jl,k} with the grouped (k_i, k_i+1) leg of psi."""
    if u.data.shape != (2, 2, 4):
        raise DimensionError(f"a 2-qubit gate has shape (2, 2, 4), got {u.data.shape}")
    a = pair_tensor(psi, i)
    out = np.tensordot(u.data, a.data, axes=1).transpose(2, 0, 1, 3)
    return QubitState(out.reshape(-1))


def cut_entropies(psi: QubitState) -> tuple[float, ...]:
    """Von Neumann entropy across each of the n-1 left/right cuts."""
    n = psi.n
    return tuple(
        von_neumann_entropy(SingularSpectrum(svd_values(psi.amplitudes.reshape(2**c, 2 ** (n - c)))))
        for c in range(1, n)
    )


def residual_entanglement(psi: QubitState) -> float:
    return max(cut_entropies(psi))


def _gate_for(
    a: Tensor3,
    method: Method,
    rng: np.random.Generator,
    descent_cfg: DescentConfig,
) -> Disentangler:
    if method is Method.DESCENT:
        return riemannian_descent(a, haar_disentangler(2, 2, rng), descent_cfg).unitary
    unitary, _ = disentangle_auto(a, 2, 2, SWEEP_OPTIONS, rng)
    if method is Method.FAST_THEN_DESCENT:
        unitary = riemannian_descent(a, unitary, descent_cfg).unitary
    return unitary


def sweep_layer(
    psi: QubitState,
    parity: Parity | str,
    method: Method | str,
    rng: np.random.Generator,
    *,
    descent_cfg: DescentConfig | None = None,
    layer: int = 1,
    gates_before: int = 0,
    elapsed_before: float = 0.0,
) -> tuple[QubitState, SweepRecord]:
    """Disentangle every bond of ``parity`` in ascending order."""
    parity, method = Parity(parity), Method(method)
    descent_cfg = descent_cfg or DescentConfig.per_gate()
    bonds = parity.bonds(psi.n)
    if not bonds:
        raise DimensionError(f"an {parity.value} layer needs at least 3 qubits, got {psi.n}")

    started = time.perf_counter()
    gates = []
    for bond, child in zip(bonds, rng.spawn(len(bonds))):
        unitary = _gate_for(pair_tensor(psi, bond), method, child, descent_cfg)
        psi = apply_gate(psi, bond, unitary)
        gates.append((bond, unitary.matrix))
    elapsed = elapsed_before + time.perf_counter() - started

    record = SweepRecord(
        layer=layer,
        parity=parity,
        method=method,
        entropies=cut_entropies(psi),
        gates=tuple(gates),
        cumulative_gates=gates_before + len(gates),
        elapsed=elapsed,
    )
    return psi, record


def disentangle_state(
    psi0: QubitState,
    layers: int,
    method: Method | str,
    rng: np.random.Generator,
    *,
    descent_cfg: DescentConfig | None = None,
) -> list[SweepRecord]:
    """Alternate odd and even layers, starting odd, and record each one.

    Two-qubit states have no even bonds, so every layer is odd.
    """
    if layers < 1:
        raise ConfigError(f"layers must be >= 1, got {layers}")
    method = Method(method)
    psi, parity = psi0, Parity.ODD
    records: list[SweepRecord] = []
    gates, elapsed = 0, 0.0
    for layer, child in enumerate(rng.spawn(layers), start=1):
        psi, record = sweep_layer(
            psi,
            parity,
            method,
            child,
            descent_cfg=descent_cfg,
            layer=layer,
            gates_before=gates,
            elapsed_before=elapsed,
        )
        records.append(record)
        gates, elapsed = record.cumulative_gates, record.elapsed
        if psi.n > 2:
            parity = parity.other()
        if layer % 50 == 0:
            logger.info("layer %d/%d: residual %.4g nats", layer, layers, record.residual)
    return records
