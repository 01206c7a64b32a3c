import math

import numpy as np
import pytest
from pydantic import ValidationError

from fast_disentangle.descent import (
    DescentConfig,
    entropy_and_gradient,
    estimate_min_entropy,
    haar_disentangler,
    minimize_entropy,
    random_unitary_entropy,
    riemannian_descent,
    riemannian_gradient,
)
from fast_disentangle.disentangle import Dims, Disentangler, fast_disentangle
from fast_disentangle.entanglement import (
    SingularSpectrum,
    entanglement_entropy,
    von_neumann_entropy,
)
from fast_disentangle.errors import DimensionError
from fast_disentangle.generators import gaussian_tensor, harmonic, random_ansatz, spectrum_tensor
from fast_disentangle.tensors import make_rng, unitarity_error
from tests.oracles import brute_force_min_entropy, directional_check


@pytest.mark.parametrize(
    "seed, dims", [(0, Dims(2, 2, 2, 2)), (1, Dims(2, 3, 3, 2)), (2, Dims(3, 2, 2, 4))]
)
def test_gradient_matches_finite_differences(seed, dims):
    rng = make_rng(seed)
    a = gaussian_tensor(dims, rng)
    u = haar_disentangler(dims.chi1, dims.chi2, rng)
    analytic, numeric = directional_check(a, u, rng)
    assert np.linalg.norm(analytic - numeric) <= 1e-5 * np.linalg.norm(analytic)


def test_gradient_reports_exact_entropy(rng, gaussian2):
    u = haar_disentangler(2, 2, rng)
    entropy, _ = entropy_and_gradient(u, gaussian2)
    assert entropy == pytest.approx(entanglement_entropy(u, gaussian2), abs=1e-12)


def test_identity_on_spectrum_tensor_gives_its_entropy(rng):
    lam = harmonic(4)
    a = spectrum_tensor(Dims(2, 2, 2, 2), lam, rng)
    entropy, _ = entropy_and_gradient(Disentangler.identity(2, 2), a)
    assert entropy == pytest.approx(von_neumann_entropy(SingularSpectrum(lam)), abs=1e-10)


def test_gradient_rejects_mismatched_leg(gaussian2):
    with pytest.raises(DimensionError):
        entropy_and_gradient(Disentangler.identity(3, 1), gaussian2)


def test_riemannian_gradient_is_tangent(rng, gaussian2):
    u = haar_disentangler(2, 2, rng)
    _, grad = entropy_and_gradient(u, gaussian2)
    rgrad = riemannian_gradient(u.matrix, grad)
    omega = u.matrix.conj().T @ rgrad
    np.testing.assert_allclose(omega, -omega.conj().T, atol=1e-12)


def test_ideal_ansatz_unitary_is_stationary(rng):
    ansatz = random_ansatz(Dims(2, 2, 4, 4), rng)
    u = Disentangler.identity(2, 2)
    _, grad = entropy_and_gradient(u, ansatz.tensor)
    assert np.linalg.norm(riemannian_gradient(u.matrix, grad)) <= 1e-6


def test_descent_from_minimum_stops_quickly(rng):
    ansatz = random_ansatz(Dims(2, 2, 4, 4), rng)
    trace = riemannian_descent(ansatz.tensor, Disentangler.identity(2, 2))
    assert trace.iterations <= 2
    assert abs(trace.entropy - trace.entropies[0]) <= 1e-10


def test_descent_is_monotone_and_unitary(rng, gaussian4):
    u0 = haar_disentangler(4, 4, rng)
    trace = riemannian_descent(gaussian4, u0, DescentConfig(max_iterations=60))
    assert np.all(np.diff(trace.entropies) <= 0)
    assert trace.entropy < trace.entropies[0]
    assert unitarity_error(trace.unitary.matrix) <= 1e-12
    assert len(trace.steps) == trace.iterations == len(trace.entropies) - 1
    assert trace.halt_reason in {"max_iterations", "tolerance", "step", "stationary"}
    assert trace.duration >= 0


def test_descent_halts_at_target(rng, gaussian2):
    u0 = haar_disentangler(2, 2, rng)
    start = entanglement_entropy(u0, gaussian2)
    trace = riemannian_descent(gaussian2, u0, DescentConfig(target_entropy=start + 1))
    assert trace.halt_reason == "target"
    assert trace.iterations == 0


def test_descent_config_validation():
    assert DescentConfig().min_step == 1e-8
    assert DescentConfig.per_gate().max_iterations == 200
    with pytest.raises(ValidationError):
        DescentConfig(backtracking=1.0)
    with pytest.raises(ValidationError):
        DescentConfig(restarts=0)


def test_min_entropy_of_rank_one_ansatz(rng):
    ansatz = random_ansatz(Dims(2, 2, 4, 4), rng, rank1=True)
    assert estimate_min_entropy(ansatz.tensor, 2, 2, DescentConfig(restarts=2), rng) <= 1e-6


def test_given_start_at_zero_entropy_is_kept(rng):
    a = spectrum_tensor(Dims(2, 2, 2, 2), [1, 0, 0, 0], rng)
    best = minimize_entropy(
        a, 2, 2, DescentConfig(restarts=2), rng, starts=(Disentangler.identity(2, 2),)
    )
    assert best.entropy <= 1e-8


def test_min_entropy_is_below_its_starts(rng, gaussian2):
    u_fast = fast_disentangle(gaussian2, 2, 2, rng)
    u_rand = haar_disentangler(2, 2, rng)
    best = minimize_entropy(
        gaussian2, 2, 2, DescentConfig(restarts=3), rng, starts=(u_fast, u_rand)
    )
    s_fast = entanglement_entropy(u_fast, gaussian2)
    s_rand = entanglement_entropy(u_rand, gaussian2)
    assert best.entropy <= min(s_fast, s_rand) + 1e-9


def test_random_unitary_entropy_spreads_rank_one(rng):
    ansatz = random_ansatz(Dims(2, 2, 4, 4), rng, rank1=True)
    s_rand = random_unitary_entropy(ansatz.tensor, 2, 2, rng)
    assert s_rand > 1e-6
    assert s_rand <= math.log(8)


def test_min_entropy_not_above_brute_force():
    rng = make_rng(31)
    a = gaussian_tensor(Dims(2, 2, 2, 2), rng)
    brute = brute_force_min_entropy(a, 2, 2, rng, starts=5)
    assert estimate_min_entropy(a, 2, 2, rng=rng) <= brute + 1e-3
