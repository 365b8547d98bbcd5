"""Quick oracle-backed self checks, reported as a pass/fail table."""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baseline import rayleigh_ritz_standard
from .conditioning import bound_constants, perturb_predict
from .dense import gaussian_matrix, vector_angle
from .errors import BadDelta
from .gallery import gen_butterfly_like, gen_example_hermitian_interior, gen_random_pencil, make_angled_basis
from .nep import MatrixFunction, evaluate
from .oracle import dense_reference_eigen, fd_derivative_check, nep_reference
from .problemio import read_manifest, write_manifest
from .rrr import petrov_galerkin_residual, rrr_extract, rrr_extract_oversampled, sketch


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _ritz_pathology():
    errs = []
    for eps in (1e-2, 1e-4):
        A, g = gen_example_hermitian_interior(eps)
        rr = rayleigh_ritz_standard(A.terms[0][1], g.basis)
        errs.append(float(np.max(np.abs(np.sort(rr.values.real) - np.array([-eps, eps])))))
    return max(errs) <= 1e-12, f"max |Ritz - (+-eps)| = {max(errs):.2e}"


def _exact_recovery_standard():
    A0 = gaussian_matrix(30, 30, 11)
    A = MatrixFunction.standard(A0)
    ref = dense_reference_eigen(A, 0.0)
    W = make_angled_basis(ref.v, 0.0, 5, seed=12).basis
    ex = rrr_extract(A, W, ref.lam, seed=13)[0]
    err, ang = abs(ex.mu - ref.lam), vector_angle(ref.v, ex.w)
    return err <= 1e-8 * np.linalg.norm(A0, 2) and ang <= 1e-6, f"|mu-lam| = {err:.2e}, angle = {ang:.2e}"


def _exact_recovery_pencil():
    A = gen_random_pencil(30, 21)
    ref = dense_reference_eigen(A, 0.5)
    W = make_angled_basis(ref.v, 0.0, 6, seed=22).basis
    ex = rrr_extract(A, W, ref.lam, seed=23)[0]
    err, ang = abs(ex.mu - ref.lam), vector_angle(ref.v, ex.w)
    scale = sum(np.linalg.norm(M, 2) for _, M in A.terms)
    return err <= 1e-8 * scale and ang <= 1e-6, f"|mu-lam| = {err:.2e}, angle = {ang:.2e}"


def _oversample_zero_matches():
    A = gen_random_pencil(20, 31)
    W = make_angled_basis(gaussian_matrix(20, 1, 32)[:, 0], 0.0, 4, seed=33).basis
    a = rrr_extract(A, W, 0.0, seed=34)[0]
    b = rrr_extract_oversampled(A, W, 0, 0.0, seed=34)[0]
    same = a.mu == b.mu and np.array_equal(a.w, b.w)
    return same, "s = 0 reproduces the square sketch bitwise" if same else f"mu {a.mu} vs {b.mu}"


def _petrov_galerkin():
    A = gen_random_pencil(25, 41)
    W = make_angled_basis(gaussian_matrix(25, 1, 42)[:, 0], 0.3, 5, seed=43).basis
    P = sketch(A, W, seed=44, retain=True)
    ex = rrr_extract(A, W, 0.0, seed=44)[0]
    r = petrov_galerkin_residual(P, A, W, ex)
    scale = sum(np.linalg.norm(P.omega.conj().T @ M @ W, 2) * max(1.0, abs(ex.mu)) for _, M in A.terms)
    return r <= 1e-10 * scale, f"|Omega^H A(mu) W y| = {r:.2e}"


def _references_agree():
    A = gen_random_pencil(40, 51)
    d = dense_reference_eigen(A, 0.2)
    it = nep_reference(A, d.lam + 1e-3, seed=52)
    err = abs(it.lam - d.lam)
    return err <= 1e-9 * (1 + abs(d.lam)), f"|lam_iter - lam_dense| = {err:.2e}"


def _fd_derivative():
    A = gen_butterfly_like(16, seed=61)
    chk = fd_derivative_check(A, 0.3 + 0.2j, [1e-2, 5e-3, 2e-3, 1e-3])
    return abs(chk.slope - 2.0) <= 0.3, f"central-difference slope {chk.slope:.2f}"


def _first_order():
    A = gen_random_pencil(8, 71)
    ref = dense_reference_eigen(A, 0.0)
    F, G = A.linear_parts()
    dF = gaussian_matrix(8, 8, 72)
    rem = []
    for h in (1e-4, 1e-5):
        pred = perturb_predict(A, ref.lam, ref.u, ref.v, h * dF)
        pert = dense_reference_eigen(MatrixFunction.pencil(F + h * dF, G, A.region), ref.lam)
        rem.append(abs(pert.lam - ref.lam - pred.dlam))
    slope = math.log(rem[0] / rem[1]) / math.log(10.0)
    return abs(slope - 2.0) <= 0.3, f"remainder slope {slope:.2f}"


def _bound_constants():
    r = bound_constants(10, 0.1, 2.0, 3.0)
    c0 = math.sqrt(10) + math.sqrt(2) + math.sqrt(math.log(20))
    ok = abs(r.C0 - c0) <= 1e-14 * c0 and abs(r.Cr_val - c0 * 2 / math.sqrt(0.1)) <= 1e-12 * r.Cr_val
    try:
        bound_constants(10, 0.25, 1.0, 1.0)
        ok = False
    except BadDelta:
        pass
    return ok, f"C0 = {r.C0:.6f}"


def _manifest_round_trip():
    A = gen_random_pencil(6, 81)
    with tempfile.TemporaryDirectory() as d:
        B = read_manifest(write_manifest(Path(d), A, "pencil"))
    same = all(np.array_equal(M, N) and f == g for (f, M), (g, N) in zip(A.terms, B.terms))
    xi = 0.3 - 0.1j
    same = same and np.array_equal(evaluate(A, xi), evaluate(B, xi))
    return same, "matrices and scalar terms identical" if same else "round trip changed the problem"


CHECKS = {
    "ritz_pathology_hermitian_interior": _ritz_pathology,
    "exact_recovery_standard": _exact_recovery_standard,
    "exact_recovery_pencil": _exact_recovery_pencil,
    "oversample_zero_matches_square": _oversample_zero_matches,
    "petrov_galerkin_condition": _petrov_galerkin,
    "references_agree": _references_agree,
    "derivative_finite_difference": _fd_derivative,
    "first_order_perturbation": _first_order,
    "bound_constants": _bound_constants,
    "manifest_round_trip": _manifest_round_trip,
}


def run_checks(names=None) -> list[CheckResult]:
    out = []
    for name in names or CHECKS:
        try:
            ok, detail = CHECKS[name]()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out


VERIFY_COLUMNS = ["name", "passed", "detail"]
