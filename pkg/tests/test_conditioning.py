import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randritz.conditioning import (
    bound_constants,
    complement,
    kappa_val,
    kappa_vec,
    mc_condition_study,
    perturb_predict,
)
from randritz.dense import gaussian_matrix, orthonormalize
from randritz.errors import BadDelta, DefectiveEigenvalue, SingularCompression
from randritz.gallery import gen_example_hermitian_interior, gen_example_pencil, gen_random_pencil, make_angled_basis
from randritz.nep import MatrixFunction
from randritz.oracle import dense_reference_eigen, loglog_slope

deltas = st.floats(1e-6, 0.2499, exclude_min=False)


def test_kappa_val_examples():
    G = gaussian_matrix(6, 6, 1)
    H = MatrixFunction.standard((G + G.conj().T) / 2)
    ref = dense_reference_eigen(H, 0.0)
    assert abs(kappa_val(H, ref.lam, ref.v, ref.v) - 1) <= 1e-12
    A, _ = gen_example_pencil(0.1)
    assert kappa_val(A, 2.0, [0, 1], [1, 0]) == 1.0
    assert kappa_val(A, 2.0, [0, 2], [1, 0]) == 1.0


def test_kappa_val_defective():
    J = MatrixFunction.standard(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DefectiveEigenvalue):
        kappa_val(J, 0.0, [0, 1], [1, 0])


def test_kappa_vec_examples():
    A = MatrixFunction.standard(np.diag([0.0, 2.0, 3.0]))
    assert abs(kappa_vec(A, 0.0, [1, 0, 0]) - 0.5) <= 1e-15
    E, _ = gen_example_hermitian_interior(0.1)
    assert abs(kappa_vec(E, 0.0, [0, 1, 0]) - 1.0) <= 1e-15
    with pytest.raises(SingularCompression):
        kappa_vec(MatrixFunction.standard(np.diag([0.0, 0.0, 1.0])), 0.0, [1, 0, 0])


@given(st.integers(0, 2 ** 32), st.floats(0, 2 * math.pi))
def test_kappa_invariances(seed, phase):
    A = gen_random_pencil(8, seed % 1000)
    ref = dense_reference_eigen(A, 0.0)
    z = np.exp(1j * phase)
    kv = kappa_val(A, ref.lam, ref.u, ref.v)
    assert abs(kappa_val(A, ref.lam, z * ref.u, 3 * z * ref.v) - kv) <= 1e-12 * kv
    kw = kappa_vec(A, ref.lam, ref.v)
    assert abs(kappa_vec(A, ref.lam, z * ref.v) - kw) <= 1e-12 * kw
    J = ref.v.copy()
    F, G = A.linear_parts()
    Qp = complement(G @ ref.v) @ orthonormalize(gaussian_matrix(7, 7, seed))
    Vp = complement(ref.v) @ orthonormalize(gaussian_matrix(7, 7, seed + 1))
    assert abs(kappa_vec(A, ref.lam, J, complements=(Qp, Vp)) - kw) <= 1e-12 * kw


@given(st.integers(1, 60), deltas, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_bound_constant_formulas(m, delta, kv, kw):
    r = bound_constants(m, delta, kv, kw)
    assert r.C0 == math.sqrt(m) + math.sqrt(2) + math.sqrt(math.log(2 / delta))
    assert r.Cr_val == r.C0 * kv / math.sqrt(delta)
    assert r.Cr_vec == 1 + r.C0 * math.sqrt(m - 1) * kw / math.sqrt(delta)
    assert all(x > 0 and math.isfinite(x) for x in (r.C0, r.Cr_val, r.Cr_vec))


def test_bound_constants_m1_and_high_precision():
    assert bound_constants(1, 0.1, 2.0, 5.0).Cr_vec == 1.0
    mpmath.mp.dps = 40
    c0 = mpmath.sqrt(10) + mpmath.sqrt(2) + mpmath.sqrt(mpmath.log(20))
    r = bound_constants(10, 0.1, 1.0, 1.0)
    assert abs(r.C0 - float(c0)) <= 2e-15 * r.C0
    assert abs(r.Cr_val - float(c0 / mpmath.sqrt(mpmath.mpf("0.1")))) <= 4e-15 * r.Cr_val
    assert abs(r.Cr_vec - float(1 + c0 * 3 / mpmath.sqrt(mpmath.mpf("0.1")))) <= 4e-15 * r.Cr_vec


@pytest.mark.parametrize("delta", [0.0, 0.25, 0.5, -0.1, 1.0])
def test_bad_delta(delta):
    with pytest.raises(BadDelta):
        bound_constants(5, delta, 1.0, 1.0)


def test_perturb_zero():
    A = gen_random_pencil(6, 2)
    ref = dense_reference_eigen(A, 0.0)
    p = perturb_predict(A, ref.lam, ref.u, ref.v, np.zeros((6, 6)))
    assert tuple(p) == (0.0, 0.0) and p.dlam == 0 and not np.any(p.dy)


@pytest.mark.parametrize("n,seed", [(4, 1), (8, 2), (16, 3)])
def test_perturb_remainder_second_order(n, seed):
    A = gen_random_pencil(n, seed)
    F, G = A.linear_parts()
    ref = dense_reference_eigen(A, 0.0)
    dF = gaussian_matrix(n, n, seed + 100)
    hs = (1e-3, 1e-4, 1e-5)
    rem_val, rem_vec = [], []
    y = ref.v / np.linalg.norm(ref.v)
    for h in hs:
        p = perturb_predict(A, ref.lam, ref.u, y, h * dF)
        assert abs(p.dlam) <= p.val_bound * (1 + 1e-12)
        pert = dense_reference_eigen(MatrixFunction.pencil(F + h * dF, G), ref.lam)
        rem_val.append(abs(pert.lam - ref.lam - p.dlam))
        # normalize y^H y_new = 1 so that y^H dy = 0
        yn = pert.v / np.vdot(y, pert.v)
        rem_vec.append(np.linalg.norm(yn - y - p.dy))
    assert abs(loglog_slope(hs, rem_val) - 2) <= 0.3
    assert abs(loglog_slope(hs, rem_vec) - 2) <= 0.3


def test_mc_condition_small():
    n, m = 30, 5
    A = MatrixFunction.standard(gaussian_matrix(n, n, 1))
    ref = dense_reference_eigen(A, 0.0)
    W = make_angled_basis(ref.v, 0.0, m, seed=2).basis
    res = mc_condition_study(A, ref.lam, ref.u, ref.v, W, 1000, master_seed=3, deltas=(0.5, 0.1))
    for row in res.rows:
        assert row["p_val"] <= row["delta"] + 3 * row["stderr"]
        assert row["p_vec"] <= row["delta"] + 3 * row["stderr"]
    again = mc_condition_study(A, ref.lam, ref.u, ref.v, W, 1000, master_seed=3, deltas=(0.5, 0.1))
    assert np.array_equal(res.kval, again.kval)
    assert np.all(np.isfinite(res.kval)) and np.all(res.kval > 0)


def test_mc_condition_requires_v_in_range():
    A = MatrixFunction.standard(gaussian_matrix(10, 10, 1))
    ref = dense_reference_eigen(A, 0.0)
    W = make_angled_basis(ref.v, 0.1, 3, seed=2).basis
    with pytest.raises(ValueError):
        mc_condition_study(A, ref.lam, ref.u, ref.v, W, 10)
