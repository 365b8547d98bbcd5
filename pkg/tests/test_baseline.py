import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randritz.baseline import ILL_CONDITIONED, OK, rayleigh_ritz_nep, rayleigh_ritz_pencil, rayleigh_ritz_standard
from randritz.dense import gaussian_matrix, orthonormalize, vector_angle
from randritz.errors import SingularPencil
from randritz.gallery import (
    gen_butterfly_like,
    gen_example_hermitian_interior,
    gen_example_nonhermitian,
    gen_example_pencil,
    gen_hamiltonian,
    make_angled_basis,
)
from randritz.nep import MatrixFunction, evaluate
from randritz.oracle import nep_reference
from randritz.dense import extend_basis


def _a0(A):
    return A.terms[0][1]


def test_hermitian_interior_pathology():
    eps = 0.01
    A, g = gen_example_hermitian_interior(eps)
    rr = rayleigh_ritz_standard(_a0(A), g.basis)
    assert np.allclose(np.sort(rr.values.real), [-eps, eps], rtol=0, atol=1e-15)
    for i in range(2):
        assert abs(vector_angle(np.eye(3)[:, 1], rr.ambient_vectors[:, i]) - math.pi / 4) <= 1e-2


def test_invariant_subspace_exact():
    rr = rayleigh_ritz_standard(np.diag([1.0, 2.0, 3.0]), np.eye(3)[:, :2])
    assert sorted(rr.values.real) == [1.0, 2.0]
    assert all(f == OK for f in rr.flags)


def test_nonhermitian_sqrt_eps():
    eps = 1e-4
    A, g = gen_example_nonhermitian(eps)
    rr = rayleigh_ritz_standard(_a0(A), g.basis)
    target = 2 ** -0.25 * math.sqrt(eps)
    vals = sorted(rr.values, key=lambda z: z.real)
    assert abs(vals[0] + target) <= 10 * eps and abs(vals[1] - target) <= 10 * eps


@pytest.mark.parametrize("eps", [0.5, 1e-2, 1e-6])
def test_pencil_example_stuck_at_three_halves(eps):
    A, g = gen_example_pencil(eps)
    rr = rayleigh_ritz_pencil(A.terms[0][1], -A.terms[1][0].coeff * A.terms[1][1], g.basis)
    assert len(rr) == 1 and abs(rr.values[0] - 1.5) <= 1e-14


def test_pencil_exact_eigenvectors():
    rng_V = gaussian_matrix(5, 5, 3)
    D = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
    A1 = np.eye(5) + 0.1 * gaussian_matrix(5, 5, 4)
    A0 = A1 @ rng_V @ D @ np.linalg.inv(rng_V)
    W = orthonormalize(rng_V[:, :2])
    rr = rayleigh_ritz_pencil(A0, A1, W)
    assert np.allclose(np.sort_complex(rr.values), [1, 2], atol=1e-10)


def test_hamiltonian_neutral_subspace_is_flagged():
    H = gen_hamiltonian(40, 1.0, seed=2)
    W = None
    for k in range(1, 4):
        W = extend_basis(W, H.track(1e-3 * k))
        try:
            rr = rayleigh_ritz_pencil(H.A0, H.A1, W, shift=H.lam)
        except SingularPencil:
            continue
        i = rr.nearest(H.lam)
        assert i < 0 or rr.flags[i] != OK or abs(rr.values[i] - H.lam) >= 1e-2


def test_singular_compression_raises():
    A0 = np.diag([1.0, 2.0, 3.0])
    A1 = np.diag([0.0, 0.0, 1.0])
    W = np.eye(3)[:, :1]
    with pytest.raises(SingularPencil):
        rayleigh_ritz_pencil(np.diag([0.0, 2.0, 3.0]), A1, W)
    # nonzero A0 with zero A1 block: an infinite eigenvalue, not a singular pencil
    rr = rayleigh_ritz_pencil(A0, A1, W)
    assert not np.isfinite(rr.values[0]) or rr.flags[0] != OK


def test_ill_conditioned_flag():
    # nearly defective 2x2 compression
    A0 = np.array([[0.0, 1.0, 0.0], [1e-20, 0.0, 0.0], [0.0, 0.0, 5.0]])
    rr = rayleigh_ritz_standard(A0, np.eye(3)[:, :2])
    assert ILL_CONDITIONED in rr.flags


@given(st.integers(0, 2 ** 32))
def test_galerkin_orthogonality_and_lift(seed):
    A0 = gaussian_matrix(12, 12, seed)
    W = orthonormalize(gaussian_matrix(12, 4, seed + 1))
    rr = rayleigh_ritz_standard(A0, W)
    for i, mu in enumerate(rr.values):
        y, v = rr.coefficient_vectors[:, i], rr.ambient_vectors[:, i]
        assert np.linalg.norm(W.conj().T @ (A0 @ v - mu * v)) <= 1e-12 * np.linalg.norm(A0, 2)
        assert abs(np.linalg.norm(v) - 1) <= 1e-12
        assert np.linalg.norm(v - W @ y) <= 1e-12
        assert abs(rr.residuals[i] - np.linalg.norm(A0 @ v - mu * v)) <= 1e-12 * np.linalg.norm(A0, 2)


@given(st.integers(0, 2 ** 32))
def test_basis_invariance(seed):
    A0 = gaussian_matrix(10, 10, seed)
    W = orthonormalize(gaussian_matrix(10, 3, seed + 1))
    U = orthonormalize(gaussian_matrix(3, 3, seed + 2))
    a = rayleigh_ritz_standard(A0, W)
    b = rayleigh_ritz_standard(A0, W @ U)
    va, vb = np.sort_complex(a.values), np.sort_complex(b.values)
    assert np.max(np.abs(va - vb)) <= 1e-10 * np.linalg.norm(A0, 2)
    for i in range(3):
        j = int(np.argmin(np.abs(b.values - a.values[i])))
        assert vector_angle(a.ambient_vectors[:, i], b.ambient_vectors[:, j]) <= 1e-8


def test_nep_exact_eigenvector():
    A = gen_butterfly_like(128, seed=0)
    ref = nep_reference(A, 2j, seed=1)
    W = make_angled_basis(ref.v, 0.0, 4, seed=5).basis
    rr = rayleigh_ritz_nep(A, W, 2j)
    i = rr.nearest(ref.lam)
    assert abs(rr.values[i] - ref.lam) <= 1e-8


def test_nep_linear_matches_pencil():
    A0, A1 = gaussian_matrix(8, 8, 1), np.eye(8) + 0.1 * gaussian_matrix(8, 8, 2)
    W = orthonormalize(gaussian_matrix(8, 3, 3))
    a = rayleigh_ritz_pencil(A0, A1, W)
    b = rayleigh_ritz_nep(MatrixFunction.pencil(A0, A1), W, 0.0)
    assert np.max(np.abs(np.sort_complex(a.values) - np.sort_complex(b.values))) <= 1e-10
    mu = b.values[0]
    assert np.linalg.norm(evaluate(MatrixFunction.pencil(A0, A1), mu, check=False) @ b.ambient_vectors[:, 0]) \
        == pytest.approx(b.residuals[0], rel=1e-10)
