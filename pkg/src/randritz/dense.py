"""Dense complex kernels and seeded sampling.

Matrices are plain ``complex128`` numpy arrays (C order).  An "orthonormal
basis" is an ``n x m`` array ``W`` with ``W^H W = I``; :func:`check_orthonormal`
tests that invariant.  The eigen/SVD/LU kernels wrap LAPACK through scipy and
add the flagging, ordering and error conventions used by the rest of the
package.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    NoConvergence,
    RankDeficient,
    SingularMatrix,
    SingularPencil,
    ZeroVector,
)
from .settings import DEFAULT, Settings

# ---------------------------------------------------------------------------
# random sampling


def derive_seed(master: int, *keys: int) -> int:
    """Derive an independent 64-bit seed for stream ``keys`` of ``master``.

    Uses ``SeedSequence(master, spawn_key=keys)``, i.e. a hash of the master
    seed and the key path.  Trial ``i`` of a Monte Carlo run uses
    ``derive_seed(master, i)``.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0])


def rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def gaussian_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """Complex Gaussian matrix: real and imaginary parts iid N(0, 1/2)."""
    if rows < 1 or cols < 1:
        raise ValueError(f"dimensions must be positive, got {rows}x{cols}")
    g = rng(seed)
    z = g.standard_normal((rows, 2 * cols))
    return (z[:, :cols] + 1j * z[:, cols:]) * math.sqrt(0.5)


def gaussian_vector(n: int, seed: int) -> np.ndarray:
    return gaussian_matrix(n, 1, seed)[:, 0]


# ---------------------------------------------------------------------------
# orthonormal bases and angles


def check_orthonormal(W: np.ndarray, tol: float = 1e-12) -> bool:
    W = np.atleast_2d(W)
    m = W.shape[1]
    return bool(np.linalg.norm(W.conj().T @ W - np.eye(m), 2) <= tol * math.sqrt(m))


def orthonormalize(M: np.ndarray, rtol: float | None = None, drop: bool = False,
                   settings: Settings = DEFAULT) -> np.ndarray:
    """Orthonormal basis of ``range(M)`` via Householder QR.

    Column phases are fixed so that ``R`` has a positive diagonal, which makes
    the result unique (and Haar distributed for Gaussian input).  With
    ``drop=True`` a column-pivoted QR is used and numerically dependent
    columns are discarded instead of raising :class:`RankDeficient`.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    rtol = settings.rank_rtol if rtol is None else rtol
    scale = np.linalg.norm(M, 2) if M.size else 0.0
    if scale == 0.0:
        raise RankDeficient("zero matrix has no orthonormal basis")
    if drop:
        Q, R, _ = sla.qr(M, mode="economic", pivoting=True)
        d = np.abs(np.diag(R))
        keep = int(np.sum(d > rtol * scale))
        if keep == 0:
            raise RankDeficient("all columns dependent")
        Q, R = Q[:, :keep], R[:keep, :keep]
    else:
        if M.shape[1] > M.shape[0]:
            raise RankDeficient(f"{M.shape[1]} columns in dimension {M.shape[0]}")
        Q, R = sla.qr(M, mode="economic")
        d = np.abs(np.diag(R))
        bad = np.flatnonzero(d <= rtol * scale)
        if bad.size:
            raise RankDeficient(f"column {bad[0]} is dependent on the preceding columns "
                                f"(residual {d[bad[0]]:.3e}, scale {scale:.3e})")
    diag = np.diag(R)
    phase = diag / np.abs(diag)
    return Q * phase


def extend_basis(Q: np.ndarray | None, x: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Append ``x`` to the orthonormal ``Q`` by Gram-Schmidt with one reorthogonalization."""
    x = np.asarray(x, dtype=complex).ravel()
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise ZeroVector("cannot extend a basis with the zero vector")
    if Q is None or Q.shape[1] == 0:
        return (x / nx)[:, None]
    r = x - Q @ (Q.conj().T @ x)
    r = r - Q @ (Q.conj().T @ r)
    nr = np.linalg.norm(r)
    if nr <= rtol * nx:
        raise RankDeficient(f"new vector lies in the span (relative residual {nr / nx:.3e})")
    return np.hstack([Q, (r / nr)[:, None]])


def principal_angle(v: np.ndarray, W: np.ndarray) -> float:
    """Canonical angle between ``span{v}`` and ``range(W)`` (``W`` orthonormal)."""
    v = np.asarray(v, dtype=complex).ravel()
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ZeroVector("angle of the zero vector is undefined")
    W = np.asarray(W, dtype=complex)
    if W.ndim == 1:
        W = (W / np.linalg.norm(W))[:, None]
    v = v / nv
    c = W.conj().T @ v
    r = v - W @ c
    return float(math.atan2(np.linalg.norm(r), np.linalg.norm(c)))


def vector_angle(v: np.ndarray, w: np.ndarray) -> float:
    """Angle between two one-dimensional subspaces."""
    w = np.asarray(w, dtype=complex).ravel()
    nw = np.linalg.norm(w)
    if nw == 0.0:
        raise ZeroVector("angle of the zero vector is undefined")
    return principal_angle(v, (w / nw)[:, None])


# ---------------------------------------------------------------------------
# eigen kernels


@dataclass(frozen=True)
class EigenpairSet:
    """Eigenpairs stored column-wise.

    ``values[i]`` is ``inf`` when ``finite[i]`` is False (infinite or
    indeterminate eigenvalue of a pencil).  ``right[:, i]`` and ``left[:, i]``
    are unit vectors; ``residuals[i]`` is the relative residual of pair ``i``.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray | None = None
    finite: np.ndarray | None = None
    residuals: np.ndarray | None = None

    def __post_init__(self):
        k = len(self.values)
        if self.right.shape[1] != k:
            raise ValueError("values and right vectors differ in length")
        if self.finite is None:
            object.__setattr__(self, "finite", np.isfinite(self.values))
        if self.residuals is None:
            object.__setattr__(self, "residuals", np.zeros(k))

    def __len__(self):
        return len(self.values)

    def take(self, idx) -> EigenpairSet:
        idx = np.asarray(idx, dtype=int)
        return EigenpairSet(
            values=self.values[idx],
            right=self.right[:, idx],
            left=None if self.left is None else self.left[:, idx],
            finite=self.finite[idx],
            residuals=self.residuals[idx],
        )

    def finite_only(self) -> EigenpairSet:
        return self.take(np.flatnonzero(self.finite))


def shift_order(values: np.ndarray, shift: complex = 0.0) -> np.ndarray:
    """Indices ordering ``values`` by ``|value - shift|``, then real part, then imaginary part.

    Non-finite values go last.
    """
    values = np.asarray(values, dtype=complex)
    fin = np.isfinite(values)
    dist = np.where(fin, np.abs(values - shift), np.inf)
    re = np.where(fin, values.real, np.inf)
    im = np.where(fin, values.imag, np.inf)
    return np.lexsort((im, re, dist))


def _unit_columns(V: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(V, axis=0)
    nrm[nrm == 0] = 1.0
    return V / nrm


def small_eig(M: np.ndarray, shift: complex = 0.0, left: bool = False,
              settings: Settings = DEFAULT) -> EigenpairSet:
    """All eigenpairs of a small dense matrix, ordered by distance to ``shift``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    try:
        if left:
            w, vl, vr = sla.eig(M, left=True, right=True)
        else:
            w, vr = sla.eig(M)
            vl = None
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"dense eigensolver failed: {exc}") from exc
    vr = _unit_columns(vr)
    scale = max(np.linalg.norm(M, 2), np.finfo(float).tiny)
    res = np.linalg.norm(M @ vr - vr * w, axis=0) / scale
    order = shift_order(w, shift)
    out = EigenpairSet(w, vr, None if vl is None else _unit_columns(vl), None, res)
    return out.take(order)


def _probe_singular(F, G, settings: Settings) -> bool:
    m = F.shape[0]
    nf, ng = np.linalg.norm(F, 2), np.linalg.norm(G, 2)
    for j in range(m):
        xi = 0.5 * np.exp(2j * np.pi * (j + 0.25) / m) + 0.1 * j
        s = np.linalg.svd(F - xi * G, compute_uv=False)[-1]
        if s > settings.singular_rtol * (nf + abs(xi) * ng):
            return False
    return True


def small_geig(F: np.ndarray, G: np.ndarray, shift: complex = 0.0, left: bool = False,
               settings: Settings = DEFAULT) -> EigenpairSet:
    """Eigenpairs of the pencil ``F - xi G`` by QZ.

    Infinite and indeterminate eigenvalues are kept with ``finite=False``.
    Raises :class:`SingularPencil` when ``F - xi G`` is numerically singular at
    ``m`` probe points.
    """
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    if F.shape != G.shape or F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"square pencil of equal sizes required, got {F.shape} and {G.shape}")
    scale = max(np.linalg.norm(F, 2), np.linalg.norm(G, 2))
    if scale == 0.0:
        raise SingularPencil("both pencil matrices vanish")
    Fs, Gs = F / scale, G / scale
    try:
        if left:
            (al, be), vl, vr = sla.eig(Fs, Gs, left=True, right=True, homogeneous_eigvals=True)
        else:
            (al, be), vr = sla.eig(Fs, Gs, homogeneous_eigvals=True)
            vl = None
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"QZ failed: {exc}") from exc
    h = np.hypot(np.abs(al), np.abs(be))
    h[h == 0] = 1.0
    al, be = al / h, be / h
    if np.any((np.abs(al) < 1e-8) & (np.abs(be) < 1e-8)) and _probe_singular(F, G, settings):
        raise SingularPencil("pencil is singular at every probe point")
    finite = np.abs(be) > settings.infinite_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(finite, al / np.where(finite, be, 1.0), np.inf + 0j)
    vr = _unit_columns(vr)
    nf, ng = np.linalg.norm(F, 2), np.linalg.norm(G, 2)
    res = np.full(len(w), np.inf)
    fw = w[finite]
    if fw.size:
        Vf = vr[:, finite]
        res[finite] = np.linalg.norm(F @ Vf - (G @ Vf) * fw, axis=0) / (nf + np.abs(fw) * ng)
    out = EigenpairSet(w, vr, None if vl is None else _unit_columns(vl), finite, res)
    return out.take(shift_order(w, shift))


# ---------------------------------------------------------------------------
# SVD, linear solves, exponential action


def svd(M: np.ndarray, full: bool = False):
    """``M = U diag(s) V^H``; returns ``(U, s, V)`` with nonincreasing ``s``."""
    try:
        U, s, Vh = sla.svd(np.asarray(M, dtype=complex), full_matrices=full)
    except np.linalg.LinAlgError as exc:
        try:
            U, s, Vh = sla.svd(np.asarray(M, dtype=complex), full_matrices=full,
                               lapack_driver="gesvd")
        except np.linalg.LinAlgError:
            raise NoConvergence(f"SVD failed: {exc}") from exc
    return U, s, Vh.conj().T


class LUSolver:
    """Reusable partial-pivoting LU factorization of a square matrix."""

    def __init__(self, M: np.ndarray, settings: Settings = DEFAULT):
        M = np.asarray(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"square matrix required, got shape {M.shape}")
        scale = np.linalg.norm(M, 1)
        with warnings.catch_warnings():
            # exact zero pivots are reported below as SingularMatrix
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu, self.piv = sla.lu_factor(M, check_finite=True)
        pivots = np.abs(np.diag(self.lu))
        tol = settings.pivot_rtol * max(scale, np.finfo(float).tiny)
        if scale == 0.0 or pivots.min() <= tol:
            raise SingularMatrix(f"pivot {pivots.min():.3e} below {tol:.3e}")

    def __call__(self, B: np.ndarray) -> np.ndarray:
        return sla.lu_solve((self.lu, self.piv), np.asarray(B, dtype=complex))


def solve(M: np.ndarray, B: np.ndarray, settings: Settings = DEFAULT) -> np.ndarray:
    return LUSolver(M, settings)(B)


def expm_action(G: np.ndarray, t: float, v: np.ndarray, tol: float = 1e-16,
                steps: int | None = None) -> np.ndarray:
    """``exp(t G) v`` by truncated Taylor series with scaling.

    The interval is split into ``steps`` substeps (default: enough that each
    substep has 1-norm at most 1/2), and on each substep the series is summed
    until the newest term is below ``tol`` relative to the partial sum.
    """
    v = np.asarray(v, dtype=complex)
    if t == 0:
        return v.copy()
    A = np.asarray(G, dtype=complex) * t
    nrm = np.linalg.norm(A, 1)
    if steps is None:
        steps = max(1, math.ceil(2.0 * nrm))
    A = A / steps
    for _ in range(steps):
        term = v
        acc = v.copy()
        for k in range(1, 200):
            term = (A @ term) / k
            acc = acc + term
            if np.linalg.norm(term) <= tol * np.linalg.norm(acc):
                break
        else:
            raise NoConvergence("Taylor series did not converge")
        if not np.all(np.isfinite(acc)):
            raise FloatingPointError("overflow in exponential action")
        v = acc
    return v
