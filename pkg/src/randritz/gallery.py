"""Seeded generators for the test problems and trial subspaces.

* three small pathologies for the Galerkin procedure (interior Hermitian
  eigenvalue, nearly defective compression, degenerate compressed pencil),
* a Hamiltonian pencil whose target eigenvector is a neutral mode, with a
  smooth track of neighbouring neutral modes,
* a quartic with alternating symmetric / skew-symmetric coefficients
  (butterfly structure),
* dense complex Gaussian pencils,
* bases at a prescribed angle from a given vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dense import (
    derive_seed,
    expm_action,
    gaussian_matrix,
    gaussian_vector,
    orthonormalize,
    principal_angle,
    rng,
)
from .errors import RankDeficient
from .mmio import read_matrix
from .nep import Disc, MatrixFunction

# default quartic coefficients c_0..c_4 for gen_butterfly_like
BUTTERFLY_C = (1.0, 1.0, -2.0, 1.0, 0.25)


@dataclass(frozen=True)
class GalleryBasis:
    basis: np.ndarray
    epsilon: float
    target_value: complex
    target_vector: np.ndarray

    @classmethod
    def build(cls, basis, target_value, target_vector):
        basis = np.asarray(basis, dtype=complex)
        v = np.asarray(target_vector, dtype=complex)
        return cls(basis, principal_angle(v, basis), complex(target_value), v / np.linalg.norm(v))


def gen_example_hermitian_interior(eps: float):
    """Interior eigenvalue 0 of ``diag(-1, 0, 1)``; Galerkin Ritz values are ``+-eps``."""
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    A0 = np.diag([-1.0, 0.0, 1.0])
    s = 1 / math.sqrt(2)
    W = np.array([[eps * s, s],
                  [math.sqrt(1 - eps ** 2), 0.0],
                  [eps * s, -s]])
    A = MatrixFunction.standard(A0)
    return A, GalleryBasis.build(W, 0.0, np.eye(3)[:, 1])


def gen_example_nonhermitian(eps: float):
    """Eigenvalue 0 of a 3x3 upper-triangular matrix whose compression is nearly a Jordan block."""
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    A0 = np.array([[0.0, 1.0, 0.0],
                   [0.0, 1.0, 3.0],
                   [0.0, 0.0, 2.0]])
    s = 1 / math.sqrt(2)
    W = np.array([[math.sqrt(1 - eps ** 2), 0.0],
                  [eps * s, s],
                  [eps * s, -s]])
    A = MatrixFunction.standard(A0)
    return A, GalleryBasis.build(W, 0.0, np.eye(3)[:, 0])


def gen_example_pencil(eps: float):
    """2x2 pencil with eigenpair ``(2, e1)`` and the one-dimensional trial space ``span[1, eps]``."""
    if eps < 0:
        raise ValueError("need eps >= 0")
    A0 = np.array([[0.0, 1.0], [2.0, 0.0]])
    A1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = MatrixFunction.pencil(A0, A1, region=Disc(0.0, 10.0), probe=0.0)
    W = np.array([[1.0], [eps]]) / math.hypot(1.0, eps)
    return A, GalleryBasis.build(W, 2.0, np.array([1.0, 0.0]))


def haar_unitary(n: int, seed: int) -> np.ndarray:
    """Q factor (positive-diagonal R) of a square complex Gaussian matrix."""
    return orthonormalize(gaussian_matrix(n, n, seed))


@dataclass(frozen=True)
class HamiltonianInstance:
    """Pencil ``A0 - xi A1`` of size 2n with neutral eigenvector ``track(tau0)``.

    ``track(tau) = eta * Q [exp((tau - tau0) G) v1; 0]`` is the smooth family
    of neutral modes whose span forms the trial spaces.
    """

    A0: np.ndarray
    A1: np.ndarray
    lam: complex
    Q: np.ndarray
    G: np.ndarray
    v1: np.ndarray
    tau0: float = 0.0

    @property
    def problem(self) -> MatrixFunction:
        return MatrixFunction.pencil(self.A0, self.A1, region=Disc(self.lam, 10.0), probe=self.lam + 0.5)

    @property
    def v(self) -> np.ndarray:
        return self.track(self.tau0)

    def track(self, tau: float) -> np.ndarray:
        n = len(self.v1)
        x = expm_action(self.G, tau - self.tau0, self.v1)
        v = self.Q @ np.concatenate([x, np.zeros(n, dtype=complex)])
        return v / np.linalg.norm(v)


def gen_hamiltonian(n: int, lam: complex = 1.0, seed: int = 0, g21_mode: str = "zero") -> HamiltonianInstance:
    if n < 2:
        raise ValueError("need n >= 2")
    if g21_mode not in ("zero", "gaussian"):
        raise ValueError("g21_mode is 'zero' or 'gaussian'")
    Q1 = haar_unitary(n, derive_seed(seed, 1))
    Q2 = haar_unitary(n, derive_seed(seed, 2))
    Q = 0.5 * np.block([[Q1 + Q2, Q1 - Q2], [Q1 - Q2, Q1 + Q2]])
    v1 = gaussian_vector(n, derive_seed(seed, 3))
    v1 = v1 / np.linalg.norm(v1)
    G = gaussian_matrix(n, n, derive_seed(seed, 4))
    G11 = gaussian_matrix(n, n, derive_seed(seed, 5))
    G22 = gaussian_matrix(n, n, derive_seed(seed, 6))
    G21 = gaussian_matrix(n, n, derive_seed(seed, 7)) if g21_mode == "gaussian" else np.zeros((n, n))
    V = np.outer(v1, v1.conj())
    P = np.eye(n) - V
    lam = complex(lam)
    M = np.block([[P @ (G11 + G11.conj().T) @ P, -np.conj(lam) * V - P @ G21.conj().T],
                  [lam * V + G21 @ P, G22 + G22.conj().T]])
    A0 = Q @ M @ Q.conj().T
    I = np.eye(n)
    Z = np.zeros((n, n))
    A1 = np.block([[Z, I], [I, Z]]).astype(complex)
    return HamiltonianInstance(A0, A1, lam, Q, G, v1)


def _banded(n: int, band: int, g: np.random.Generator) -> np.ndarray:
    T = g.standard_normal((n, n))
    i, j = np.indices((n, n))
    return np.where(np.abs(i - j) <= band, T, 0.0)


def gen_butterfly_like(n: int, c=BUTTERFLY_C, seed: int = 0, band: int = 2,
                       files: list | None = None) -> MatrixFunction:
    """Quartic ``sum_i c_i xi**i A_i`` with real symmetric ``A_0, A_2, A_4`` and skew ``A_1, A_3``.

    The coefficient matrices are identity shifts plus seeded random banded
    parts, symmetrized or antisymmetrized.  ``files`` (five Matrix Market
    paths) replaces them with imported matrices.
    """
    if n < 4:
        raise ValueError("need n >= 4")
    if files is not None:
        mats = [read_matrix(p) for p in files]
    else:
        g = rng(seed)
        scale = 1.0 / math.sqrt(2 * band + 1)
        mats = []
        for i in range(5):
            T = _banded(n, band, g) * scale
            if i % 2:
                mats.append(0.5 * (T - T.T))
            else:
                mats.append(np.eye(n) + 0.5 * (T + T.T))
    return MatrixFunction.polynomial(mats, list(c), region=Disc(0.0, 3.0), probe=0.5)


def gen_random_pencil(n: int, seed: int = 0) -> MatrixFunction:
    A0 = gaussian_matrix(n, n, derive_seed(seed, 1))
    A1 = gaussian_matrix(n, n, derive_seed(seed, 2))
    return MatrixFunction.pencil(A0, A1, region=Disc(0.0, 10.0), probe=0.5 + 0.5j)


def make_angled_basis(v: np.ndarray, eps: float, m: int, seed: int = 0,
                      target_value: complex = np.nan) -> GalleryBasis:
    """``W = [v cos(eps) + w sin(eps), W_perp]`` with ``[v, w, W_perp]`` orthonormal and seeded."""
    v = np.asarray(v, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    n = len(v)
    if not 0 <= eps < math.pi / 2:
        raise ValueError("need 0 <= eps < pi/2")
    if n < m + 1:
        raise RankDeficient(f"need n >= m + 1, got n={n}, m={m}")
    Z = gaussian_matrix(n, m, seed)
    Z = Z - np.outer(v, v.conj() @ Z)
    Z = Z - np.outer(v, v.conj() @ Z)
    R = orthonormalize(Z)
    w, Wp = R[:, 0], R[:, 1:]
    W = np.column_stack([v * math.cos(eps) + w * math.sin(eps), Wp])
    return GalleryBasis(W, principal_angle(v, W), complex(target_value), v)
