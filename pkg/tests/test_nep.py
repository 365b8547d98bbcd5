import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randritz.dense import gaussian_matrix
from randritz.errors import OutOfRegion
from randritz.gallery import gen_butterfly_like, gen_example_pencil, gen_random_pencil
from randritz.nep import (
    Disc,
    MatrixFunction,
    Rect,
    ScalarTerm,
    apply_block,
    constant,
    evaluate,
    exponential,
    is_regular,
    monomial,
    sup_norm_estimate,
)
from randritz.oracle import fd_derivative_check

seeds = st.integers(0, 2 ** 32)


def test_pencil_derivative_is_minus_a1():
    A = gen_random_pencil(6, 1)
    _, A1 = A.terms[0][1], A.terms[1][1]
    for xi in (0.0, 1 + 2j, -3j):
        assert np.array_equal(evaluate(A, xi, 1), -A1)
        assert not np.any(evaluate(A, xi, 2))


def test_quartic_first_derivative():
    A = gen_butterfly_like(8, seed=2)
    xi = 0.7 - 0.4j
    expect = sum(f.coeff * i * xi ** (i - 1) * M for i, (f, M) in enumerate(A.terms) if i)
    assert np.allclose(evaluate(A, xi, 1), expect, rtol=0, atol=1e-13)


def _analytic(n=5, seed=3):
    M0, M1, M2 = (gaussian_matrix(n, n, seed + k) for k in range(3))
    return MatrixFunction(((constant(), M0), (monomial(1, -1.0), M1), (exponential(-0.5, 2.0), M2)),
                          Disc(0, 4))


@pytest.mark.parametrize("order", [1, 2])
def test_central_difference_slope(order):
    chk = fd_derivative_check(_analytic(), 0.3 + 0.2j, [1e-3, 1e-4, 1e-5], order=order)
    assert abs(chk.slope - 2.0) <= 0.3


def test_out_of_region():
    A = gen_random_pencil(4, 0)
    with pytest.raises(OutOfRegion):
        evaluate(A, 11.0)
    evaluate(A, 10.0)
    evaluate(A, 11.0, check=False)
    R = MatrixFunction.pencil(np.eye(2), np.eye(2), Rect(-1 - 1j, 1 + 1j))
    with pytest.raises(OutOfRegion):
        evaluate(R, 1.5j)


def test_apply_block():
    A = _analytic(6)
    xi = 0.5j
    for order in (0, 1, 2):
        E = evaluate(A, xi, order)
        assert np.array_equal(apply_block(A, xi, np.eye(6), order), E)
        assert not np.any(apply_block(A, xi, np.zeros((6, 2)), order))
        W = gaussian_matrix(6, 3, 9)
        assert np.linalg.norm(apply_block(A, xi, W, order) - E @ W) <= 1e-13 * np.linalg.norm(E) * np.linalg.norm(W)


@given(seeds, st.complex_numbers(max_magnitude=3))
def test_sum_linearity(seed, xi):
    A, B = _analytic(4, seed % 1000), gen_random_pencil(4, seed)
    S = A + B
    for order in (0, 1, 2):
        lhs = evaluate(S, xi, order, check=False)
        rhs = evaluate(A, xi, order, check=False) + evaluate(B, xi, order, check=False)
        assert np.allclose(lhs, rhs, rtol=1e-14, atol=1e-14 * (1 + np.abs(rhs).max()))


def test_sup_norm():
    A0 = gaussian_matrix(5, 5, 1)
    A = MatrixFunction(((constant(), A0),), Disc(0, 2))
    assert sup_norm_estimate(A, 0) == np.linalg.norm(A0, 2)
    X = MatrixFunction(((monomial(1), np.eye(3)),), Disc(0, 1))
    assert abs(sup_norm_estimate(X, 0) - 1.0) <= 1e-15
    Q = gen_butterfly_like(40, seed=4)
    coarse, fine = sup_norm_estimate(Q, 0, 64), sup_norm_estimate(Q, 0, 640)
    assert abs(coarse - fine) <= 0.05 * fine
    with pytest.raises(ValueError):
        sup_norm_estimate(Q, 0, 4)


@pytest.mark.parametrize("region", [Disc(0.5j, 2.0), Rect(-1 - 2j, 3 + 1j)])
def test_sup_norm_nested_monotone(region):
    A = MatrixFunction(((constant(), gaussian_matrix(4, 4, 5)), (exponential(1.0), gaussian_matrix(4, 4, 6))), region)
    vals = [sup_norm_estimate(A, 1, k) for k in (8, 16, 32, 64)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_is_regular():
    assert is_regular(MatrixFunction.pencil(np.eye(3), np.eye(3)), 0.0)
    assert not is_regular(MatrixFunction.pencil(np.zeros((3, 3)), np.zeros((3, 3))), 0.0)
    A, _ = gen_example_pencil(1e-2)
    assert is_regular(A, 0.0)


def test_structure_queries():
    A = gen_random_pencil(3, 0)
    assert A.is_linear and A.is_polynomial and A.degree == 1 and not A.is_standard()
    S = MatrixFunction.standard(np.diag([1.0, 2.0]))
    assert S.is_standard()
    F, G = S.linear_parts()
    assert np.array_equal(G, np.eye(2))
    assert _analytic().degree is None and not _analytic().is_polynomial


def test_scalar_term_validation():
    with pytest.raises(ValueError):
        ScalarTerm("monomial", -1)
    with pytest.raises(ValueError):
        ScalarTerm("analytic")
    with pytest.raises(ValueError):
        MatrixFunction(((constant(), np.eye(2)), (constant(), np.eye(3))))


def test_matrices_are_immutable():
    A = gen_random_pencil(3, 0)
    with pytest.raises(ValueError):
        A.terms[0][1][0, 0] = 1.0
