"""Solvers for small (m x m) compressed eigenvalue problems ``B(xi) y = 0``.

Used by both the Galerkin baseline (``B = W^H A W``) and the randomized
procedure (``B = Omega^H A W``).  Dispatch on the term kinds of ``B``:
linear -> QZ, polynomial -> companion linearization, analytic -> Newton on
``det B`` from several starting points.
"""

from __future__ import annotations

import numpy as np

from .dense import EigenpairSet, shift_order, small_geig
from .errors import NoConvergence, SingularPencil
from .nep import MatrixFunction, evaluate
from .settings import DEFAULT, Settings


def _local_scale(B: MatrixFunction, xi: complex) -> float:
    """``sum_i |f_i(xi)| ||B_i||``: the natural size of ``B(xi)``."""
    return float(sum(abs(f(xi)) * np.linalg.norm(M, 2) for f, M in B.terms)) or 1.0


def relative_residual(B: MatrixFunction, mu: complex, y: np.ndarray) -> float:
    r = evaluate(B, mu, 0, check=False) @ y
    return float(np.linalg.norm(r) / (_local_scale(B, mu) * np.linalg.norm(y)))


def newton_polish(B: MatrixFunction, mu: complex, y: np.ndarray, steps: int = 3):
    """A few Newton steps on the bordered system; returns the pair with the smallest residual."""
    y = y / np.linalg.norm(y)
    best = (mu, y, relative_residual(B, mu, y))
    m = len(y)
    for _ in range(steps):
        Bm = evaluate(B, mu, 0, check=False)
        Bd = evaluate(B, mu, 1, check=False)
        J = np.zeros((m + 1, m + 1), dtype=complex)
        J[:m, :m] = Bm
        J[:m, m] = Bd @ y
        J[m, :m] = y.conj()
        rhs = np.concatenate([-(Bm @ y), [0.0]])
        try:
            d = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            break
        y = y + d[:m]
        mu = mu + d[m]
        y = y / np.linalg.norm(y)
        if not np.isfinite(mu):
            break
        r = relative_residual(B, mu, y)
        if r < best[2]:
            best = (mu, y, r)
        else:
            break
    return best


def solve_compressed_linear(B: MatrixFunction, shift: complex = 0.0,
                            settings: Settings = DEFAULT) -> EigenpairSet:
    """All eigenpairs of the linear compressed problem ``F - xi G`` (infinite ones flagged)."""
    F, G = B.linear_parts()
    return small_geig(F, G, shift=shift, left=True, settings=settings)


def companion(coeffs: list[np.ndarray]):
    """First companion form ``C - t D`` of ``sum_k t**k P_k``."""
    d = len(coeffs) - 1
    m = coeffs[0].shape[0]
    N = d * m
    C = np.zeros((N, N), dtype=complex)
    D = np.eye(N, dtype=complex)
    for k in range(d - 1):
        C[k * m:(k + 1) * m, (k + 1) * m:(k + 2) * m] = np.eye(m)
    for k in range(d):
        C[(d - 1) * m:, k * m:(k + 1) * m] = -coeffs[k]
    D[(d - 1) * m:, (d - 1) * m:] = coeffs[d]
    return C, D


def solve_compressed_poly(B: MatrixFunction, shift: complex = 0.0,
                          settings: Settings = DEFAULT) -> EigenpairSet:
    """Finite eigenpairs of a compressed matrix polynomial.

    The variable is rescaled by ``alpha = (|P_0| / |P_d|)**(1/d)`` and the
    coefficients normalized before linearizing.  Pairs whose relative residual
    exceeds ``settings.ghost_filter`` are discarded; survivors get a Newton
    polish.
    """
    P = B.poly_coefficients()
    while len(P) > 1 and not np.any(P[-1]):
        P = P[:-1]
    d = len(P) - 1
    if d < 1:
        raise SingularPencil("constant compressed problem")
    if d == 1:
        pairs = small_geig(P[0], -P[1], shift=shift, left=True, settings=settings)
        return pairs.finite_only()
    n0, nd = np.linalg.norm(P[0], 2), np.linalg.norm(P[-1], 2)
    alpha = (n0 / nd) ** (1.0 / d) if n0 > 0 and nd > 0 else 1.0
    Q = [alpha ** k * Pk for k, Pk in enumerate(P)]
    s = max(np.linalg.norm(Qk, 2) for Qk in Q)
    C, D = companion([Qk / s for Qk in Q])
    lin = small_geig(C, D, shift=shift / alpha, settings=settings)
    m = P[0].shape[0]
    vals, vecs, res = [], [], []
    for i in np.flatnonzero(lin.finite):
        mu = lin.values[i] * alpha
        blocks = lin.right[:, i].reshape(d, m)
        y = blocks[np.argmax(np.linalg.norm(blocks, axis=1))]
        if relative_residual(B, mu, y) > settings.ghost_filter:
            continue
        mu, y, r = newton_polish(B, mu, y)
        vals.append(mu)
        vecs.append(y)
        res.append(r)
    if not vals:
        return EigenpairSet(np.zeros(0, dtype=complex), np.zeros((m, 0), dtype=complex),
                            residuals=np.zeros(0))
    out = EigenpairSet(np.array(vals), np.array(vecs).T, residuals=np.array(res))
    return out.take(shift_order(out.values, shift))


def _det_newton(B: MatrixFunction, xi: complex, settings: Settings):
    for _ in range(settings.max_iter):
        Bm = evaluate(B, xi, 0, check=False)
        Bd = evaluate(B, xi, 1, check=False)
        try:
            t = np.trace(np.linalg.solve(Bm, Bd))
        except np.linalg.LinAlgError:
            return xi
        if t == 0 or not np.isfinite(t):
            return None
        step = 1.0 / t
        xi = xi - step
        if abs(step) <= settings.newton_tol * (1 + abs(xi)):
            return xi
    return None


def solve_compressed_general(B: MatrixFunction, shift: complex = 0.0, restarts: int = 8,
                             settings: Settings = DEFAULT) -> EigenpairSet:
    """Eigenpairs near ``shift`` by Newton on ``det B`` from ``restarts`` perturbed shifts."""
    m = B.n
    radius = 0.1 * (1.0 + abs(shift))
    starts = [shift] + [shift + radius * np.exp(2j * np.pi * (j + 0.5) / restarts)
                        for j in range(restarts - 1)]
    vals, vecs, res = [], [], []
    for xi0 in starts:
        xi = _det_newton(B, complex(xi0), settings)
        if xi is None or not np.isfinite(xi):
            continue
        y = np.linalg.svd(evaluate(B, xi, 0, check=False))[2][-1].conj()
        mu, y, r = newton_polish(B, xi, y)
        if r > settings.residual_tol:
            continue
        if any(abs(mu - v) <= settings.cluster_tol * (1 + abs(mu)) for v in vals):
            continue
        vals.append(mu)
        vecs.append(y)
        res.append(r)
    if not vals:
        raise NoConvergence(f"no eigenvalue found from {restarts} starts near {shift}")
    out = EigenpairSet(np.array(vals), np.array(vecs).T, residuals=np.array(res))
    return out.take(shift_order(out.values, shift))


def solve_compressed(B: MatrixFunction, shift: complex = 0.0, restarts: int = 8,
                     settings: Settings = DEFAULT) -> EigenpairSet:
    if B.is_linear:
        return solve_compressed_linear(B, shift, settings)
    if B.is_polynomial:
        return solve_compressed_poly(B, shift, settings)
    return solve_compressed_general(B, shift, restarts, settings)


def select_pairs(pairs: EigenpairSet, shift: complex, count: int = 1,
                 region=None) -> EigenpairSet:
    """The ``count`` finite pairs nearest ``shift``; ties by real then imaginary part.

    With ``region`` given, pairs outside it are excluded (possibly leaving an
    empty selection).
    """
    keep = np.flatnonzero(pairs.finite)
    if region is not None:
        keep = np.array([i for i in keep if region.contains(complex(pairs.values[i]))], dtype=int)
    sub = pairs.take(keep)
    return sub.take(shift_order(sub.values, shift)[:count])
