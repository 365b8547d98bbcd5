"""Nested trial subspaces: block shift-and-invert, residual inverse iteration, and Hamiltonian tracks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import LUSolver, extend_basis, gaussian_matrix, gaussian_vector, orthonormalize, principal_angle
from .errors import RankDeficient
from .gallery import HamiltonianInstance
from .nep import MatrixFunction, evaluate
from .rrr import refine_rayleigh_functional
from .settings import DEFAULT, Settings


@dataclass
class SubspaceTrace:
    """Bases ``W_1, W_2, ...`` and per-step data.

    ``angles[k]`` is the angle between ``reference`` and ``bases[k]`` (NaN
    when no reference was given).  ``meta`` holds per-step dictionaries.
    """

    bases: list = field(default_factory=list)
    angles: list = field(default_factory=list)
    meta: list = field(default_factory=list)
    reference: np.ndarray | None = None

    def append(self, W: np.ndarray, **info):
        self.bases.append(W)
        a = principal_angle(self.reference, W) if self.reference is not None else float("nan")
        self.angles.append(a)
        self.meta.append(info)

    def __len__(self):
        return len(self.bases)

    @property
    def final(self) -> np.ndarray:
        return self.bases[-1]


def shift_invert_block(A0: np.ndarray, A1: np.ndarray, sigma: complex, m: int, steps: int,
                       seed: int = 0, reference: np.ndarray | None = None) -> SubspaceTrace:
    """``W_{k+1} = orth((A0 - sigma A1)^{-1} A1 W_k)`` from a seeded Gaussian block ``W_0``."""
    A0 = np.asarray(A0, dtype=complex)
    A1 = np.asarray(A1, dtype=complex)
    n = A0.shape[0]
    lu = LUSolver(A0 - sigma * A1)
    W = orthonormalize(gaussian_matrix(n, m, seed))
    trace = SubspaceTrace(reference=reference)
    trace.append(W, step=0, shift=sigma)
    for k in range(1, steps + 1):
        W = orthonormalize(lu(A1 @ W))
        trace.append(W, step=k, shift=sigma)
    return trace


@dataclass
class IterationResult:
    trace: SubspaceTrace
    iterates: list
    rhos: list
    residuals: list
    converged: bool

    @property
    def vector(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def value(self) -> complex:
        return self.rhos[-1]


def residual_inverse_iteration(A: MatrixFunction, sigma: complex, steps: int, seed: int = 0,
                               tol: float = 1e-12, start: np.ndarray | None = None,
                               reference: np.ndarray | None = None,
                               settings: Settings = DEFAULT) -> IterationResult:
    """``w_{k+1} ~ w_k - A(sigma)^{-1} A(rho_k) w_k`` with ``rho_k`` the Rayleigh functional nearest ``sigma``.

    ``A(sigma)`` is factored once.  Bases ``W_k = span{w_1..w_k}`` are grown
    by reorthogonalized Gram-Schmidt; iterates that add no new direction are
    skipped.  Stops once ``||A(rho_k) w_k|| <= tol * ||A(rho_k)||``.
    """
    lu = LUSolver(evaluate(A, sigma, 0, check=False))
    w = gaussian_vector(A.n, seed) if start is None else np.asarray(start, dtype=complex)
    w = w / np.linalg.norm(w)
    trace = SubspaceTrace(reference=reference)
    iterates, rhos, residuals = [], [], []
    Q = None
    converged = False
    for k in range(steps + 1):
        rho = refine_rayleigh_functional(A, w, sigma, settings)
        Ar = evaluate(A, rho, 0, check=False)
        r = Ar @ w
        res = float(np.linalg.norm(r))
        rel = res / max(np.linalg.norm(Ar, 2), np.finfo(float).tiny)
        rhos.append(rho)
        residuals.append(res)
        if k > 0:
            iterates.append(w)
            try:
                Q = extend_basis(Q, w)
                trace.append(Q, step=k, rho=rho, residual=res)
            except RankDeficient:
                pass
        if rel <= tol:
            converged = True
            if not iterates:
                iterates.append(w)
            break
        if k == steps:
            break
        w = w - lu(r)
        w = w / np.linalg.norm(w)
    return IterationResult(trace, iterates, rhos, residuals, converged)


def track_subspace(H: HamiltonianInstance, taus, rtol: float = 1e-12) -> SubspaceTrace:
    """Orthonormalize the track vectors ``v(tau)`` one at a time, recording angles to ``v(tau0)``."""
    taus = list(taus)
    if not taus:
        raise ValueError("need at least one tau")
    trace = SubspaceTrace(reference=H.v)
    Q = None
    for k, tau in enumerate(taus, 1):
        Q = extend_basis(Q, H.track(tau), rtol=rtol)
        trace.append(Q, step=k, tau=tau)
    return trace
