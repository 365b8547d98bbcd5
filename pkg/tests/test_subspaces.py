import numpy as np
import pytest

from randritz.dense import check_orthonormal, gaussian_matrix, principal_angle
from randritz.errors import RankDeficient, SingularMatrix
from randritz.gallery import gen_butterfly_like, gen_hamiltonian, gen_random_pencil
from randritz.nep import MatrixFunction
from randritz.oracle import dense_reference_eigen, nep_reference
from randritz.subspaces import residual_inverse_iteration, shift_invert_block, track_subspace


def _nested(bases):
    for a, b in zip(bases, bases[1:]):
        assert np.linalg.norm(a - b @ (b.conj().T @ a)) <= 1e-12 * np.sqrt(a.shape[1])


def test_shift_invert_geometric_contraction():
    n = 12
    d = np.arange(1.0, n + 1)
    A0, A1 = np.diag(d), np.eye(n)
    sigma = 1.2
    e1 = np.eye(n)[:, 0]
    tr = shift_invert_block(A0, A1, sigma, 1, 8, seed=3, reference=e1)
    ratio = abs(sigma - 1) / abs(sigma - 2)
    a = np.array(tr.angles)
    rates = np.tan(a[4:]) / np.tan(a[3:-1])
    assert np.allclose(rates, ratio, rtol=1e-2) and abs(rates[-1] - ratio) <= 1e-4


def test_shift_invert_steps_zero_and_determinism():
    A = gen_random_pencil(40, 1)
    F, G = A.linear_parts()
    ref = dense_reference_eigen(A, 0.01)
    tr = shift_invert_block(F, G, 0.01, 4, 0, seed=5, reference=ref.v)
    assert len(tr) == 1 and tr.angles[0] > 0.1
    a = shift_invert_block(F, G, 0.01, 4, 3, seed=5).final
    b = shift_invert_block(F, G, 0.01, 4, 3, seed=5).final
    assert np.array_equal(a, b) and check_orthonormal(a)


def test_shift_invert_desk_epsilon_small():
    A = gen_random_pencil(200, 0)
    F, G = A.linear_parts()
    ref = dense_reference_eigen(A, 0.01)
    tr = shift_invert_block(F, G, 0.01, 10, 10, seed=1, reference=ref.v)
    assert tr.angles[-1] < 1e-3
    assert all(abs(x - principal_angle(ref.v, W)) <= 1e-12 for x, W in zip(tr.angles, tr.bases))


def test_shift_invert_singular_shift():
    with pytest.raises(SingularMatrix):
        shift_invert_block(np.diag([1.0, 2.0]), np.eye(2), 1.0, 1, 1)


def test_residual_inverse_iteration_hermitian_linear():
    G = gaussian_matrix(30, 30, 2)
    A = MatrixFunction.standard((G + G.conj().T) / 2)
    ref = dense_reference_eigen(A, 0.0)
    res = residual_inverse_iteration(A, ref.lam + 0.05, 30, seed=1, tol=1e-13, reference=ref.v)
    assert res.converged and abs(res.value - ref.lam) <= 1e-10
    r = np.array(res.residuals)
    assert r[-1] < 1e-3 * r[0]
    assert check_orthonormal(res.trace.final)
    _nested(res.trace.bases)


def test_residual_inverse_iteration_fixed_point():
    A = gen_butterfly_like(128, seed=0)
    ref = nep_reference(A, 2j, seed=1)
    res = residual_inverse_iteration(A, 2j, 5, start=ref.v, tol=1e-12)
    assert res.converged and len(res.rhos) == 1 and abs(res.value - ref.lam) <= 1e-12


def test_residual_inverse_iteration_butterfly_angles():
    A = gen_butterfly_like(256, seed=0)
    ref = nep_reference(A, 2j, seed=2)
    res = residual_inverse_iteration(A, 2j, 10, seed=1, tol=0.0, reference=ref.v)
    a = np.array(res.trace.angles)
    assert np.all(np.diff(a) <= 1e-12) and a[-1] < 1e-5
    _nested(res.trace.bases)


def test_track_subspace():
    H = gen_hamiltonian(40, 1.0, seed=1)
    tr = track_subspace(H, [0.0])
    assert tr.angles[0] <= 1e-15
    taus = [1e-3 * k for k in range(1, 6)]
    tr = track_subspace(H, taus)
    a = np.array(tr.angles)
    assert np.all(np.diff(a) < 0) and a[0] / a[-1] > 1e4
    _nested(tr.bases)
    # the span is order independent up to rounding amplified by the track matrix conditioning,
    # which stays below 1e-10 for three points at this spacing
    a = track_subspace(H, taus[:3]).final
    b = track_subspace(H, taus[2::-1]).final
    assert np.linalg.norm(b - a @ (a.conj().T @ b)) <= 1e-10


def test_track_subspace_repeated_tau():
    H = gen_hamiltonian(10, 1.0, seed=1)
    with pytest.raises(RankDeficient):
        track_subspace(H, [1e-3, 1e-3])
    with pytest.raises(ValueError):
        track_subspace(H, [])
