"""Galerkin Rayleigh-Ritz: eigenpairs of ``W^H A(xi) W`` lifted back to ``range(W)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compressed import solve_compressed
from .dense import EigenpairSet, small_eig, small_geig
from .nep import MatrixFunction, evaluate
from .settings import DEFAULT, Settings

# flag values attached to each Ritz pair
OK = "ok"
INFINITE = "infinite"
ILL_CONDITIONED = "ill_conditioned"
LARGE_RESIDUAL = "large_residual"


@dataclass(frozen=True)
class RitzSet:
    """Ritz pairs.  ``ambient_vectors[:, i] = W @ coefficient_vectors[:, i]`` has unit norm.

    ``residuals[i] = ||A(values[i]) ambient_vectors[:, i]||`` (absolute);
    ``flags[i]`` marks infinite values, compressed eigenvalues whose
    condition number exceeds ``1e8`` (near-singular or nearly defective
    compressions) and pairs that do not solve the compressed problem.
    """

    values: np.ndarray
    coefficient_vectors: np.ndarray
    ambient_vectors: np.ndarray
    residuals: np.ndarray
    flags: tuple

    def __len__(self):
        return len(self.values)

    @property
    def ok(self) -> np.ndarray:
        return np.array([f == OK for f in self.flags], dtype=bool)

    def nearest(self, target: complex) -> int:
        """Index of the finite Ritz value nearest ``target`` (-1 if none)."""
        fin = np.flatnonzero(np.isfinite(self.values))
        if fin.size == 0:
            return -1
        return int(fin[np.argmin(np.abs(self.values[fin] - target))])


def compressed_condition(B: MatrixFunction, mu: complex, y: np.ndarray, x: np.ndarray | None = None) -> float:
    """``(sum_i |f_i(mu)| |B_i|) / |x^H B'(mu) y|`` for unit ``x, y``; ``x`` defaults to a left null vector of ``B(mu)``."""
    y = y / np.linalg.norm(y)
    if x is None:
        x = np.linalg.svd(evaluate(B, mu, 0, check=False))[0][:, -1]
    x = x / np.linalg.norm(x)
    d = abs(np.vdot(x, evaluate(B, mu, 1, check=False) @ y))
    scale = sum(abs(f(mu)) * np.linalg.norm(M, 2) for f, M in B.terms)
    return float(scale / d) if d > 0 else float("inf")


def _lift(A: MatrixFunction, B: MatrixFunction, W: np.ndarray, pairs: EigenpairSet,
          settings: Settings, cond_limit: float = 1e8) -> RitzSet:
    Y = pairs.right
    V = W @ Y
    nv = np.linalg.norm(V, axis=0)
    nv[nv == 0] = 1.0
    Y, V = Y / nv, V / nv
    res, flags = [], []
    for i, mu in enumerate(pairs.values):
        if not pairs.finite[i] or not np.isfinite(mu):
            res.append(np.inf)
            flags.append(INFINITE)
            continue
        r = A(complex(mu), 0) @ V[:, i]
        res.append(float(np.linalg.norm(r)))
        x = None if pairs.left is None else pairs.left[:, i]
        if compressed_condition(B, complex(mu), Y[:, i], x) > cond_limit:
            flags.append(ILL_CONDITIONED)
        elif pairs.residuals[i] > settings.ghost_filter:
            flags.append(LARGE_RESIDUAL)
        else:
            flags.append(OK)
    return RitzSet(np.asarray(pairs.values, dtype=complex), Y, V, np.array(res), tuple(flags))


def rayleigh_ritz_standard(A0: np.ndarray, W: np.ndarray, shift: complex = 0.0,
                           settings: Settings = DEFAULT) -> RitzSet:
    W = np.asarray(W, dtype=complex)
    A0 = np.asarray(A0, dtype=complex)
    A = MatrixFunction.standard(A0)
    B = A.compress(W, W)
    pairs = small_eig(B.terms[0][1], shift=shift, left=True, settings=settings)
    return _lift(A, B, W, pairs, settings)


def rayleigh_ritz_pencil(A0: np.ndarray, A1: np.ndarray, W: np.ndarray, shift: complex = 0.0,
                         settings: Settings = DEFAULT) -> RitzSet:
    """Ritz pairs of ``(W^H A0 W, W^H A1 W)``; raises SingularPencil on a singular compression."""
    W = np.asarray(W, dtype=complex)
    A = MatrixFunction.pencil(A0, A1)
    B = A.compress(W, W)
    pairs = small_geig(B.terms[0][1], B.terms[1][1], shift=shift, left=True, settings=settings)
    return _lift(A, B, W, pairs, settings)


def rayleigh_ritz_nep(A: MatrixFunction, W: np.ndarray, shift: complex, restarts: int = 8,
                      settings: Settings = DEFAULT) -> RitzSet:
    """Ritz pairs of ``W^H A(xi) W`` near ``shift`` (same small solvers as the randomized variant)."""
    W = np.asarray(W, dtype=complex)
    B = A.compress(W, W)
    pairs = solve_compressed(B, shift, restarts, settings)
    return _lift(A, B, W, pairs, settings)
