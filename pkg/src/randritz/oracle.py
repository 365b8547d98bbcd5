"""Brute-force references used to validate everything else.

Nothing here imports the randomized extraction or the subspace builders, so
a bug there cannot leak into its own reference values.  The nonlinear
reference runs its own residual inverse iteration (with a separate scalar
root finder) and finishes with Newton on the bordered system.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .dense import derive_seed, gaussian_matrix, gaussian_vector
from .errors import NoConvergence, SingularMatrix
from .nep import MatrixFunction, evaluate


@dataclass(frozen=True)
class ReferenceEigenpair:
    lam: complex
    v: np.ndarray
    u: np.ndarray | None
    residual: float
    method: str
    scale: float = 1.0

    @property
    def relative_residual(self) -> float:
        return self.residual / self.scale


def _local_scale(A: MatrixFunction, xi: complex) -> float:
    return float(sum(abs(f(xi)) * np.linalg.norm(M, 2) for f, M in A.terms)) or 1.0


def _left_null(M: np.ndarray, seed: int = 12345) -> np.ndarray:
    """Approximate left null vector by two steps of inverse iteration on ``M^H``."""
    x = gaussian_vector(M.shape[0], seed)
    try:
        with warnings.catch_warnings():
            # an exact zero pivot is the expected case for an eigenvalue at a lattice point
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(M.conj().T, check_finite=False)
    except (ValueError, np.linalg.LinAlgError):
        return np.linalg.svd(M)[0][:, -1]
    for _ in range(2):
        x = sla.lu_solve(lu, x)
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0:
            return np.linalg.svd(M)[0][:, -1]
        x = x / nx
    return x


def dense_reference_eigen(A: MatrixFunction, shift: complex) -> ReferenceEigenpair:
    """Eigenpair of a linear problem nearest ``shift`` from a full dense solve (with left vector)."""
    if not A.is_linear:
        raise ValueError("dense reference needs a linear problem")
    P = A.poly_coefficients()
    F = P[0]
    G = -P[1] if len(P) > 1 else np.zeros_like(F)
    w, vl, vr = sla.eig(F, G, left=True, right=True)
    fin = np.isfinite(w)
    if not np.any(fin):
        raise NoConvergence("no finite eigenvalue")
    idx = np.flatnonzero(fin)
    d = np.abs(w[idx] - shift)
    i = idx[np.lexsort((w[idx].imag, w[idx].real, d))[0]]
    lam = complex(w[i])
    v = vr[:, i] / np.linalg.norm(vr[:, i])
    u = vl[:, i] / np.linalg.norm(vl[:, i])
    lam, v = _bordered_newton(A, lam, v, steps=2)
    res = float(np.linalg.norm(evaluate(A, lam, 0, check=False) @ v))
    return ReferenceEigenpair(lam, v, u, res, "dense", _local_scale(A, lam))


def _bordered_newton(A: MatrixFunction, lam: complex, v: np.ndarray, steps: int = 3):
    """Newton on ``[A(lam) v; c^H v - 1] = 0``; keeps the iterate with the smallest residual."""
    n = len(v)
    v = v / np.linalg.norm(v)
    best = (lam, v, np.linalg.norm(evaluate(A, lam, 0, check=False) @ v))
    for _ in range(steps):
        c = v.conj()
        M = evaluate(A, lam, 0, check=False)
        J = np.zeros((n + 1, n + 1), dtype=complex)
        J[:n, :n] = M
        J[:n, n] = evaluate(A, lam, 1, check=False) @ v
        J[n, :n] = c
        rhs = np.concatenate([-(M @ v), [0.0]])
        try:
            d = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            break
        v = v + d[:n]
        lam = lam + d[n]
        v = v / np.linalg.norm(v)
        r = np.linalg.norm(evaluate(A, lam, 0, check=False) @ v)
        if r < best[2]:
            best = (lam, v, r)
        else:
            break
    return complex(best[0]), best[1]


def _scalar_root(A: MatrixFunction, w: np.ndarray, sigma: complex, max_iter: int = 100) -> complex:
    """Root of ``w^H A(z) w`` nearest ``sigma``: companion roots for polynomials, secant otherwise."""
    s = [(f, complex(np.vdot(w, M @ w))) for f, M in A.terms]
    if A.is_polynomial:
        c = np.zeros(A.degree + 1, dtype=complex)
        for f, val in s:
            c[f.degree] += f.coeff * val
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        roots = np.polynomial.polynomial.polyroots(c)
        if len(roots) == 0:
            raise NoConvergence("scalar equation is constant")
        roots = np.asarray(roots, dtype=complex)
        z = complex(roots[np.lexsort((roots.imag, roots.real, np.abs(roots - sigma)))[0]])
    else:
        z = complex(sigma)

    def g(x):
        return sum(f(x) * val for f, val in s)

    # secant polish (different from the Newton polish used by the extraction code)
    z0, z1 = z, z + 1e-6 * (1 + abs(z))
    g0, g1 = g(z0), g(z1)
    for _ in range(max_iter):
        if g1 == g0:
            break
        z2 = z1 - g1 * (z1 - z0) / (g1 - g0)
        z0, g0, z1, g1 = z1, g1, z2, g(z2)
        if abs(z1 - z0) <= 1e-15 * (1 + abs(z1)):
            break
    if not A.is_polynomial and not abs(g1) <= 1e-10 * sum(abs(f(z1)) * abs(val) for f, val in s):
        raise NoConvergence(f"scalar root not found near {sigma}")
    return complex(z1) if abs(g1) <= abs(g(z)) else z


def nep_reference(A: MatrixFunction, sigma: complex, tol: float = 1e-12, seed: int = 0,
                  start: np.ndarray | None = None, max_iter: int = 500) -> ReferenceEigenpair:
    """Eigenpair nearest ``sigma`` by residual inverse iteration, then bordered Newton.

    Converged when ``||A(lam) v|| <= tol * sum_i |f_i(lam)| ||A_i||``.
    """
    M = evaluate(A, sigma, 0, check=False)
    try:
        lu = sla.lu_factor(M, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularMatrix(f"A(sigma) cannot be factored: {exc}") from exc
    if np.min(np.abs(np.diag(lu[0]))) <= 1e-15 * np.max(np.abs(np.diag(lu[0]))):
        raise SingularMatrix("A(sigma) is numerically singular")
    v = gaussian_vector(A.n, seed) if start is None else np.asarray(start, dtype=complex)
    v = v / np.linalg.norm(v)
    lam = _scalar_root(A, v, sigma)
    last = np.inf
    for _ in range(max_iter):
        r = evaluate(A, lam, 0, check=False) @ v
        last = np.linalg.norm(r) / _local_scale(A, lam)
        if last <= tol:
            break
        if last <= 1e-7:
            lam2, v2 = _bordered_newton(A, lam, v, steps=4)
            r2 = np.linalg.norm(evaluate(A, lam2, 0, check=False) @ v2) / _local_scale(A, lam2)
            if r2 <= tol:
                lam, v, last = lam2, v2, r2
                break
        v = v - sla.lu_solve(lu, r)
        v = v / np.linalg.norm(v)
        lam = _scalar_root(A, v, sigma)
    else:
        raise NoConvergence(f"residual inverse iteration stalled at relative residual {last:.3e}")
    u = _left_null(evaluate(A, lam, 0, check=False))
    res = float(np.linalg.norm(evaluate(A, lam, 0, check=False) @ v))
    return ReferenceEigenpair(lam, v, u, res, "residual_inverse_iteration", _local_scale(A, lam))


@dataclass(frozen=True)
class FDCheck:
    slope: float
    steps: np.ndarray
    errors: np.ndarray
    floor: bool


def fd_derivative_check(A: MatrixFunction, xi: complex, h_list, order: int = 1) -> FDCheck:
    """Central-difference error of ``A^{(order)}`` versus ``h`` and its log-log slope.

    Errors within a rounding allowance ``64 eps |A^{(order-1)}| / h`` (or
    any ``h < 1e-8``) count as floor points and are excluded from the fit;
    ``floor`` is set when any point was excluded.  The slope is NaN when
    fewer than two points remain.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    h = np.asarray(sorted(h_list, reverse=True), dtype=float)
    exact = evaluate(A, xi, order, check=False)
    base = max(np.linalg.norm(evaluate(A, xi, order - 1, check=False), 2), np.finfo(float).tiny)
    ref = max(np.linalg.norm(exact, 2), np.finfo(float).tiny)
    errs = np.empty(len(h))
    keep = np.ones(len(h), dtype=bool)
    for j, hh in enumerate(h):
        fd = (evaluate(A, xi + hh, order - 1, check=False) - evaluate(A, xi - hh, order - 1, check=False)) / (2 * hh)
        errs[j] = np.linalg.norm(fd - exact, 2) / ref
        if hh < 1e-8 or errs[j] <= 64 * np.finfo(float).eps * base / (hh * ref):
            keep[j] = False
    floor = bool(np.any(~keep))
    if keep.sum() < 2:
        return FDCheck(float("nan"), h, errs, True)
    slope = float(np.polyfit(np.log(h[keep]), np.log(errs[keep]), 1)[0])
    return FDCheck(slope, h, errs, floor)


@dataclass(frozen=True)
class TailTable:
    rows: list
    smax: np.ndarray
    smin: np.ndarray | None
    trials: int

    def inverse_tail_exponent(self, probs=(0.2, 0.1, 0.05, 0.02, 0.01)) -> float:
        """Slope of ``log P(||Omega^-1|| >= t)`` against ``log t`` from empirical quantiles."""
        if self.smin is None:
            raise ValueError("inverse tail needs square samples")
        inv = 1.0 / self.smin
        t = np.quantile(inv, 1 - np.asarray(probs))
        return loglog_slope(t, probs)


def mc_tail(rows: int, cols: int, trials: int, deltas, master_seed: int = 0) -> TailTable:
    """Empirical tail probabilities of ``||Omega||`` and (square case) ``||Omega^-1||``."""
    if trials < 1000:
        raise ValueError("at least 1000 trials required")
    smax = np.empty(trials)
    smin = np.empty(trials) if rows == cols else None
    for t in range(trials):
        s = np.linalg.svd(gaussian_matrix(rows, cols, derive_seed(master_seed, t)), compute_uv=False)
        smax[t] = s[0]
        if smin is not None:
            smin[t] = s[-1]
    out = []
    for d in deltas:
        thr = math.sqrt(rows) + math.sqrt(cols) + math.sqrt(math.log(2 / d))
        se = math.sqrt(d * (1 - d) / trials)
        row = {"delta": d, "norm_bound": thr, "p_norm": float(np.mean(smax >= thr)), "stderr": se}
        if smin is not None:
            ithr = math.sqrt(rows / d)
            row["inv_bound"] = ithr
            row["p_inv"] = float(np.mean(1.0 / smin >= ithr))
        out.append(row)
    return TailTable(out, smax, smin, trials)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
