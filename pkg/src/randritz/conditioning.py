"""Eigenvalue/eigenvector condition numbers, the randomized bound constants, and Monte Carlo checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense import derive_seed, gaussian_matrix
from .errors import BadDelta, DefectiveEigenvalue, SingularCompression, ZeroVector
from .nep import MatrixFunction, evaluate, sup_norm_estimate
from .settings import DEFAULT, Settings


@dataclass(frozen=True)
class CondReport:
    kappa_val: float
    kappa_vec: float
    C0: float
    Cr_val: float
    Cr_vec: float
    delta: float
    m: int


def _vec(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex).ravel()
    if not np.any(x):
        raise ZeroVector("zero vector")
    return x


def _deriv_scale(A: MatrixFunction, lam: complex) -> float:
    return float(np.linalg.norm(evaluate(A, lam, 1, check=False), 2))


def kappa_val(A: MatrixFunction, lam: complex, u, v, settings: Settings = DEFAULT) -> float:
    """``|u| |v| / |u^H A'(lam) v|``."""
    u, v = _vec(u), _vec(v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    d = abs(u.conj() @ (evaluate(A, lam, 1, check=False) @ v))
    if d <= settings.derivative_rtol * nu * nv * _deriv_scale(A, lam):
        raise DefectiveEigenvalue(f"|u^H A'(lam) v| = {d:.3e} vanishes")
    return float(nu * nv / d)


def complement(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span{x}``."""
    x = _vec(x)
    x = x / np.linalg.norm(x)
    # Householder reflector mapping x to a multiple of e1; its last n-1 columns span x-perp
    n = len(x)
    alpha = -np.exp(1j * np.angle(x[0])) if x[0] != 0 else -1.0
    u = x.copy()
    u[0] -= alpha
    nu = np.linalg.norm(u)
    H = np.eye(n, dtype=complex)
    if nu > 0:
        u = u / nu
        H -= 2 * np.outer(u, u.conj())
    return H[:, 1:]


def kappa_vec(A: MatrixFunction, lam: complex, v, settings: Settings = DEFAULT,
              complements: tuple | None = None) -> float:
    """``||(Q_perp^H A(lam) V_perp)^{-1}||`` with ``Q_perp`` spanning ``(A'(lam) v)^perp``, ``V_perp`` spanning ``v^perp``.

    ``complements=(Q_perp, V_perp)`` overrides the default Householder bases.
    """
    v = _vec(v)
    if complements is None:
        Qp = complement(evaluate(A, lam, 1, check=False) @ v)
        Vp = complement(v)
    else:
        Qp, Vp = complements
    if Qp.shape[1] == 0:
        return 0.0
    s = np.linalg.svd(Qp.conj().T @ evaluate(A, lam, 0, check=False) @ Vp, compute_uv=False)
    scale = np.linalg.norm(evaluate(A, lam, 0, check=False), 2) + _deriv_scale(A, lam)
    if s[-1] <= settings.singular_rtol * scale:
        raise SingularCompression(f"complement compression has smallest singular value {s[-1]:.3e}")
    return float(1.0 / s[-1])


def bound_constants(m: int, delta: float, kval: float, kvec: float) -> CondReport:
    if not 0 < delta < 0.25:
        raise BadDelta(f"delta must lie in (0, 1/4), got {delta}")
    if m < 1:
        raise ValueError("m must be positive")
    C0 = math.sqrt(m) + math.sqrt(2) + math.sqrt(math.log(2 / delta))
    root = math.sqrt(delta)
    return CondReport(kval, kvec, C0, C0 * kval / root, 1 + C0 * math.sqrt(m - 1) * kvec / root, delta, m)


@dataclass(frozen=True)
class Prediction:
    """First-order perturbation of a simple eigenpair.

    ``dlam`` and ``dy`` are the first-order corrections (``y^H dy = 0``);
    ``val_bound``/``vec_bound`` are ``kappa * ||dB(lam)||``.
    """

    val_bound: float
    vec_bound: float
    dlam: complex
    dy: np.ndarray

    def __iter__(self):
        return iter((self.val_bound, self.vec_bound))


def perturb_predict(B: MatrixFunction, lam: complex, x, y, dB, settings: Settings = DEFAULT) -> Prediction:
    """First-order eigenvalue and eigenvector change of ``B`` under ``B + dB`` (``dB`` evaluated at ``lam``)."""
    x, y = _vec(x), _vec(y)
    y = y / np.linalg.norm(y)
    dB = np.asarray(dB, dtype=complex)
    nrm = float(np.linalg.norm(dB, 2)) if dB.size else 0.0
    kv = kappa_val(B, lam, x, y, settings)
    kw = kappa_vec(B, lam, y, settings)
    Bd = evaluate(B, lam, 1, check=False)
    dlam = -(x.conj() @ dB @ y) / (x.conj() @ Bd @ y)
    Yp = complement(y)
    Zp = complement(Bd @ y)
    if Yp.shape[1]:
        K = Zp.conj().T @ evaluate(B, lam, 0, check=False) @ Yp
        dy = -Yp @ np.linalg.solve(K, Zp.conj().T @ (dB @ y))
    else:
        dy = np.zeros_like(y)
    return Prediction(kv * nrm, kw * nrm, complex(dlam), dy)


@dataclass(frozen=True)
class MCConditionResult:
    kappa_val_A: float
    kappa_vec_A: float
    m: int
    kval: np.ndarray
    kvec: np.ndarray
    deltas: tuple
    rows: list

    def quantile(self, which: str, q) -> np.ndarray:
        return np.quantile(self.kval if which == "val" else self.kvec, q)


def mc_condition_study(A: MatrixFunction, lam: complex, u, v, W: np.ndarray, trials: int,
                       master_seed: int = 0, deltas=(0.5, 0.25, 0.1, 0.01),
                       settings: Settings = DEFAULT) -> MCConditionResult:
    """Sketch ``W`` ``trials`` times and compare compressed condition numbers to the lifted bounds.

    ``W`` must contain ``v``; ``A`` must be linear (the compressed eigenvector is
    then exactly ``W^H v``).  Each row of the result holds ``delta``, the
    two bounds and the two empirical exceedance probabilities with their
    binomial standard errors under ``p = delta``.
    """
    W = np.asarray(W, dtype=complex)
    n, m = W.shape
    v = _vec(v)
    v = v / np.linalg.norm(v)
    if np.linalg.norm(v - W @ (W.conj().T @ v)) > 1e-12:
        raise ValueError("v must lie in range(W)")
    if not A.is_linear:
        raise ValueError("Monte Carlo condition study needs a linear problem")
    ka = kappa_val(A, lam, u, v, settings)
    kw = kappa_vec(A, lam, v, settings)
    F, G = A.linear_parts()
    FW, GW = F @ W, G @ W
    y = W.conj().T @ v
    kval = np.empty(trials)
    kvec = np.empty(trials)
    for t in range(trials):
        Om = gaussian_matrix(n, m, derive_seed(master_seed, t))
        Oh = Om.conj().T
        B = MatrixFunction.pencil(Oh @ FW, Oh @ GW, A.region, A.probe)
        # left eigenvector of B at lam: null vector of B(lam)^H
        Bl = evaluate(B, lam, 0, check=False)
        x = np.linalg.svd(Bl)[0][:, -1]
        kval[t] = kappa_val(B, lam, x, y, settings)
        kvec[t] = kappa_vec(B, lam, y, settings) if m > 1 else 0.0
    rows = []
    for d in deltas:
        bv = ka / math.sqrt(d)
        bw = math.sqrt(max(m - 1, 0)) * kw / math.sqrt(d)
        se = math.sqrt(d * (1 - d) / trials)
        rows.append({"delta": d, "bound_val": bv, "p_val": float(np.mean(kval > bv)),
                     "bound_vec": bw, "p_vec": float(np.mean(kvec > bw)) if m > 1 else 0.0,
                     "trials": trials, "stderr": se})
    return MCConditionResult(ka, kw, m, kval, kvec, tuple(deltas), rows)


def derivative_sup(A: MatrixFunction) -> float:
    """``sup |A'|`` over the region boundary, for scaling tolerances."""
    return sup_norm_estimate(A, 1)
