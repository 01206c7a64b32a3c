import numpy as np
import pytest

from fast_disentangle.disentangle import Disentangler
from fast_disentangle.errors import (
    ConfigError,
    DimensionError,
    NonFiniteError,
    NormalizationError,
)
from fast_disentangle.generators import random_state
from fast_disentangle.tensors import make_rng, random_unitary
from fast_disentangle.wavefunction import (
    Method,
    Parity,
    QubitState,
    apply_gate,
    cut_entropies,
    disentangle_state,
    pair_tensor,
    residual_entanglement,
    sweep_layer,
)

SWAP = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=float,
)


def product_state(n, rng):
    psi = np.ones(1, dtype=complex)
    for _ in range(n):
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = np.kron(psi, q / np.linalg.norm(q))
    return QubitState(psi)


def test_state_validation():
    with pytest.raises(DimensionError):
        QubitState(np.ones(2) / np.sqrt(2))
    with pytest.raises(DimensionError):
        QubitState(np.ones(6) / np.sqrt(6))
    with pytest.raises(NormalizationError):
        QubitState(np.ones(4))
    with pytest.raises(NonFiniteError):
        QubitState(np.array([np.nan, 0, 0, 1]))
    assert QubitState(np.eye(8)[3]).n == 3


def test_pair_tensor_dims(rng):
    psi = random_state(10, rng)
    assert pair_tensor(psi, 1).dims == (4, 1, 256)
    assert pair_tensor(psi, 3).dims == (4, 4, 64)
    assert pair_tensor(psi, 9).dims == (4, 256, 1)
    with pytest.raises(DimensionError):
        pair_tensor(psi, 10)


def test_pair_tensor_indexing(rng):
    psi = random_state(4, rng)
    t = pair_tensor(psi, 2).data
    amps = psi.amplitudes.reshape(2, 2, 2, 2)
    # k = 2 * q2 + q3, left = q1, right = q4
    assert t[2 * 1 + 0, 1, 0] == amps[1, 1, 0, 0]
    assert t[2 * 0 + 1, 0, 1] == amps[0, 0, 1, 1]


def test_identity_gate_leaves_state(rng):
    psi = random_state(5, rng)
    out = apply_gate(psi, 2, Disentangler.identity(2, 2))
    np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-15)


def test_swap_gate_exchanges_qubits(rng):
    psi = random_state(3, rng)
    out = apply_gate(psi, 2, Disentangler.from_matrix(SWAP, 2, 2))
    expected = psi.amplitudes.reshape(2, 2, 2).transpose(0, 2, 1).reshape(-1)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)


def test_gate_only_changes_its_own_cut(rng):
    psi = random_state(6, rng)
    u = Disentangler.from_matrix(random_unitary(4, rng), 2, 2)
    out = apply_gate(psi, 3, u)
    before, after = cut_entropies(psi), cut_entropies(out)
    for cut in (1, 2, 4, 5):
        assert after[cut - 1] == pytest.approx(before[cut - 1], abs=1e-10)
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1, abs=1e-12)


def test_apply_gate_rejects_wrong_shape(rng):
    with pytest.raises(DimensionError):
        apply_gate(random_state(3, rng), 1, Disentangler.identity(2, 4))


def test_parity_bonds():
    assert list(Parity.ODD.bonds(10)) == [1, 3, 5, 7, 9]
    assert list(Parity.EVEN.bonds(10)) == [2, 4, 6, 8]
    assert list(Parity.EVEN.bonds(2)) == []
    assert Parity.ODD.other() is Parity.EVEN


def test_sweep_gate_counts(rng):
    psi = random_state(10, rng)
    psi, odd = sweep_layer(psi, "odd", "fast", rng)
    _, even = sweep_layer(psi, Parity.EVEN, Method.FAST, rng, gates_before=odd.cumulative_gates)
    assert [bond for bond, _ in odd.gates] == [1, 3, 5, 7, 9]
    assert (odd.cumulative_gates, even.cumulative_gates) == (5, 9)
    assert all(g.shape == (4, 4) for _, g in even.gates)


def test_even_layer_needs_three_qubits(rng):
    with pytest.raises(DimensionError):
        sweep_layer(random_state(2, rng), Parity.EVEN, Method.FAST, rng)


def test_product_state_stays_unentangled(rng):
    psi = product_state(6, rng)
    records = disentangle_state(psi, 2, Method.FAST, rng)
    assert all(r.residual <= 1e-10 for r in records)


def test_cumulative_bookkeeping(rng):
    records = disentangle_state(random_state(10, rng), 4, "fast", rng)
    assert [r.layer for r in records] == [1, 2, 3, 4]
    assert [r.parity for r in records] == [Parity.ODD, Parity.EVEN, Parity.ODD, Parity.EVEN]
    assert [r.cumulative_gates for r in records] == [5, 9, 14, 18]
    elapsed = [r.elapsed for r in records]
    assert elapsed == sorted(elapsed)
    assert all(len(r.entropies) == 9 for r in records)


def test_three_qubits_alternate(rng):
    records = disentangle_state(random_state(3, rng), 3, Method.FAST, rng)
    assert [r.parity for r in records] == [Parity.ODD, Parity.EVEN, Parity.ODD]
    assert [[b for b, _ in r.gates] for r in records] == [[1], [2], [1]]


def test_two_qubits_only_odd_layers(rng):
    records = disentangle_state(random_state(2, rng), 3, Method.FAST, rng)
    assert all(r.parity is Parity.ODD for r in records)
    assert records[-1].cumulative_gates == 3
    # a single gate can remove all entanglement of two qubits
    assert records[0].residual <= 1e-10


def test_layers_must_be_positive(rng):
    with pytest.raises(ConfigError):
        disentangle_state(random_state(4, rng), 0, Method.FAST, rng)


def test_sweep_is_reproducible():
    runs = [disentangle_state(random_state(6, make_rng(4)), 3, "fast", make_rng(5)) for _ in range(2)]
    assert [r.entropies for r in runs[0]] == [r.entropies for r in runs[1]]


def test_fast_layers_reduce_residual(rng):
    psi = random_state(8, rng)
    records = disentangle_state(psi, 10, Method.FAST, rng)
    assert records[-1].residual < residual_entanglement(psi)


def test_descent_pass_reduces_residual_on_most_seeds():
    better = 0
    for seed in range(10):
        rng = make_rng(seed)
        psi = random_state(6, rng)
        records = disentangle_state(psi, 2, Method.DESCENT, rng)
        better += records[-1].residual < residual_entanglement(psi)
    assert better >= 8


def test_fast_then_descent_runs(rng):
    psi = random_state(4, rng)
    records = disentangle_state(psi, 2, Method.FAST_THEN_DESCENT, rng)
    assert records[-1].method is Method.FAST_THEN_DESCENT
    assert records[-1].cumulative_gates == 3
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1, abs=1e-12)
