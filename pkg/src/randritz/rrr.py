"""Randomized Rayleigh-Ritz extraction.

The trial basis ``W`` is compressed with a complex Gaussian test matrix
``Omega`` of the same width, ``B(xi) = Omega^H A(xi) W``, the small problem
``B(mu) y = 0`` is solved, and the selected value ``mu`` is refined from the
ambient vector ``w = W y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compressed import select_pairs, solve_compressed
from .dense import EigenpairSet, gaussian_matrix, shift_order, small_geig, svd
from .errors import (
    DegenerateDenominator,
    DerivativeVanishes,
    NoConvergence,
    NumericalError,
    SingularReduction,
    ZeroVector,
)
from .nep import MatrixFunction, evaluate
from .settings import DEFAULT, Settings

REFINE_METHODS = ("rayleigh_quotient", "pencil_quotient", "rayleigh_functional", "stationary_point")


@dataclass(frozen=True)
class CompressedProblem:
    """``B(xi) = Omega^H A(xi) W`` together with the seed that drew ``Omega``.

    ``omega`` is kept only when requested (``retain=True`` in :func:`sketch`).
    """

    B: MatrixFunction
    sketch_seed: int
    m: int
    omega: np.ndarray | None = None

    @property
    def terms(self):
        return self.B.terms


@dataclass(frozen=True)
class Extraction:
    mu: complex
    y: np.ndarray
    w: np.ndarray
    rho: complex
    refine_method: str
    residual: float
    sketch_seed: int
    refined: bool = True
    note: str = ""
    extra: dict = field(default_factory=dict)


def sketch(A: MatrixFunction, W: np.ndarray, seed: int, retain: bool = False) -> CompressedProblem:
    """Compress every term of ``A`` with a seeded ``n x m`` Gaussian test matrix."""
    W = np.asarray(W, dtype=complex)
    n, m = W.shape
    omega = gaussian_matrix(n, m, seed)
    return CompressedProblem(A.compress(omega, W), int(seed), m, omega if retain else None)


# ---------------------------------------------------------------------------
# refinements


def _unit(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex).ravel()
    nw = np.linalg.norm(w)
    if nw == 0.0:
        raise ZeroVector("refinement of the zero vector")
    return w / nw


def _term_vectors(A: MatrixFunction, w: np.ndarray):
    return [(f, M @ w) for f, M in A.terms]


def _prep(A: MatrixFunction, w: np.ndarray, term_vectors):
    """Unit ``w`` and the products ``A_i w`` for it (reusing ``term_vectors`` if given)."""
    w = np.asarray(w, dtype=complex).ravel()
    nw = np.linalg.norm(w)
    if nw == 0.0:
        raise ZeroVector("refinement of the zero vector")
    if term_vectors is None:
        return w / nw, _term_vectors(A, w / nw)
    return w / nw, [(f, v / nw) for f, v in term_vectors]


def refine_rq(A0: np.ndarray, w: np.ndarray) -> complex:
    """Rayleigh quotient ``w^H A0 w / w^H w``."""
    w = _unit(w)
    return complex(w.conj() @ (A0 @ w))


def refine_rq_pencil(A0: np.ndarray, A1: np.ndarray, w: np.ndarray,
                     settings: Settings = DEFAULT, products=None) -> complex:
    """``w^H A0 w / w^H A1 w``; raises :class:`DegenerateDenominator` when ``w^H A1 w`` ~ 0.

    The denominator counts as degenerate below ``denominator_rtol * |A1 w| |w|``.
    ``products=(A0 w, A1 w)`` skips the matrix-vector products.
    """
    w = np.asarray(w, dtype=complex).ravel()
    nw = np.linalg.norm(w)
    if nw == 0.0:
        raise ZeroVector("refinement of the zero vector")
    A0w, A1w = (A0 @ w, A1 @ w) if products is None else products
    den = np.vdot(w, A1w)
    if abs(den) <= settings.denominator_rtol * np.linalg.norm(A1w) * nw:
        raise DegenerateDenominator(f"|w^H A1 w| = {abs(den) / nw ** 2:.3e}")
    return complex(np.vdot(w, A0w) / den)


def refine_rayleigh_functional(A: MatrixFunction, w: np.ndarray, shift: complex,
                               settings: Settings = DEFAULT, term_vectors=None) -> complex:
    """Root of ``w^H A(rho) w = 0`` nearest ``shift``.

    For polynomial ``A`` all roots of the scalar polynomial are computed and
    the nearest one is polished; otherwise damped Newton runs from ``shift``.
    """
    w, term_vectors = _prep(A, w, term_vectors)
    scal = [(f, complex(w.conj() @ v)) for f, v in term_vectors]

    def g(rho, order=0):
        return sum(f(rho, order) * s for f, s in scal)

    def gscale(rho, order=0):
        return sum(abs(f(rho, order) * s) for f, s in scal) or 1.0

    if A.is_polynomial:
        c = np.zeros(A.degree + 1, dtype=complex)
        for f, s in scal:
            c[f.degree] += f.coeff * s
        roots = np.roots(c[::-1])
        if roots.size == 0:
            raise NoConvergence("scalar equation has no roots")
        rho = complex(roots[shift_order(roots, shift)[0]])
    else:
        rho = complex(shift)
    for _ in range(settings.max_iter):
        gv, gd = g(rho), g(rho, 1)
        if abs(gd) <= settings.derivative_rtol * gscale(rho, 1):
            raise DerivativeVanishes(f"|w^H A'(rho) w| = {abs(gd):.3e}")
        step = gv / gd
        t = 1.0
        while not A.is_polynomial and t > 1e-3 and abs(g(rho - t * step)) > abs(gv):
            t /= 2
        new = rho - t * step
        if abs(g(new)) >= abs(gv) and A.is_polynomial:
            break
        rho = new
        if abs(t * step) <= settings.newton_tol * (1 + abs(rho)):
            break
    if abs(g(rho)) > 1e3 * settings.newton_tol * gscale(rho):
        raise NoConvergence(f"Rayleigh functional residual {abs(g(rho)):.3e}")
    if abs(g(rho, 1)) <= settings.derivative_rtol * gscale(rho, 1):
        raise DerivativeVanishes(f"|w^H A'(rho) w| = {abs(g(rho, 1)):.3e}")
    return rho


def stationarity_gap(A: MatrixFunction, w: np.ndarray, rho: complex, term_vectors=None) -> tuple[float, float]:
    """``|(A'(rho) w)^H A(rho) w|`` and the scale ``|A(rho) w|_loc |A'(rho) w|_loc``."""
    w, tv = _prep(A, w, term_vectors)
    r = sum(f(rho) * v for f, v in tv)
    J = sum(f(rho, 1) * v for f, v in tv)
    loc0 = sum(abs(f(rho)) * np.linalg.norm(v) for f, v in tv)
    loc1 = sum(abs(f(rho, 1)) * np.linalg.norm(v) for f, v in tv)
    return float(abs(np.vdot(J, r))), float(loc0 * loc1)


def refine_stationary(A: MatrixFunction, w: np.ndarray, rho0: complex,
                      settings: Settings = DEFAULT, term_vectors=None) -> complex:
    """Stationary point of ``rho -> |A(rho) w|^2`` nearest ``rho0``.

    For ``A(xi) = F - xi G`` the point is ``(G w)^H F w / |G w|^2``.  Otherwise
    Newton iteration on the Wirtinger gradient ``(A'(rho) w)^H A(rho) w``
    starts at ``rho0``.
    """
    w, tv = _prep(A, w, term_vectors)
    if A.is_linear:
        Fw = sum(f.coeff * v for f, v in tv if f.degree == 0)
        Gw = -sum(f.coeff * v for f, v in tv if f.degree == 1)
        den = np.vdot(Gw, Gw).real
        if den == 0.0:
            raise DerivativeVanishes("A'(rho) w vanishes")
        return complex(np.vdot(Gw, Fw) / den)
    rho = complex(rho0)
    prev = np.inf
    for _ in range(settings.max_iter):
        r = sum(f(rho) * v for f, v in tv)
        J = sum(f(rho, 1) * v for f, v in tv)
        K = sum(f(rho, 2) * v for f, v in tv)
        h = np.vdot(J, r)
        a = np.vdot(J, J).real
        s = np.vdot(K, r)
        if a == 0.0:
            raise DerivativeVanishes("A'(rho) w vanishes")
        det = a * a - abs(s) ** 2
        if det > 0.25 * a * a:
            delta = (-h * a + s * np.conj(h)) / det
        else:
            delta = -h / a
        rho = rho + delta
        step = abs(delta)
        if step <= settings.newton_tol * (1 + abs(rho)):
            break
        # stagnation at rounding level; the certificate below decides
        if step <= 1e-8 * (1 + abs(rho)) and step >= 0.5 * prev:
            break
        prev = step
    else:
        raise NoConvergence("stationary-point iteration did not converge")
    gap, scale = stationarity_gap(A, w, rho, [(f, v) for f, v in tv])
    if gap > 1e3 * settings.newton_tol * max(scale, np.finfo(float).tiny):
        raise NoConvergence(f"stationarity gap {gap:.3e}")
    return complex(rho)


def functional_proxy(A: MatrixFunction, w: np.ndarray, mu: complex, term_vectors=None) -> float:
    """``|w^H A'(mu) w| / (|A'(mu) w| |w|)``: how safely a Rayleigh functional exists near ``w``."""
    w, tv = _prep(A, w, term_vectors)
    J = sum(f(mu, 1) * v for f, v in tv)
    nJ = np.linalg.norm(J)
    return float(abs(np.vdot(w, J)) / nJ) if nJ else 0.0


def refine(A: MatrixFunction, w: np.ndarray, mu: complex, method: str = "auto",
           settings: Settings = DEFAULT, term_vectors=None) -> tuple[complex, str]:
    """Refined value and the name of the method that produced it.

    ``auto``: Rayleigh quotient for standard problems; otherwise the pencil
    quotient / Rayleigh functional when :func:`functional_proxy` is at least
    ``settings.functional_safety``, falling back to the stationary point.
    """
    if method == "auto":
        if A.is_standard():
            method = "rayleigh_quotient"
        else:
            proxy = functional_proxy(A, w, mu, term_vectors)
            if proxy >= settings.functional_safety:
                method = "pencil_quotient" if A.is_linear else "rayleigh_functional"
            else:
                method = "stationary_point"
            try:
                return refine(A, w, mu, method, settings, term_vectors)
            except NumericalError:
                if method == "stationary_point":
                    raise
                return refine(A, w, mu, "stationary_point", settings, term_vectors)
    if method == "rayleigh_quotient":
        if not A.is_standard():
            raise ValueError("Rayleigh quotient refinement needs a standard problem")
        return refine_rq(A.linear_parts()[0], w), method
    if method == "pencil_quotient":
        if not A.is_linear:
            raise ValueError("pencil quotient refinement needs a linear problem")
        w, tv = _prep(A, w, term_vectors)
        Fw = sum(f.coeff * v for f, v in tv if f.degree == 0)
        Gw = -sum(f.coeff * v for f, v in tv if f.degree == 1)
        return refine_rq_pencil(None, None, w, settings, (Fw, Gw)), method
    if method == "rayleigh_functional":
        return refine_rayleigh_functional(A, w, mu, settings, term_vectors), method
    if method == "stationary_point":
        return refine_stationary(A, w, mu, settings, term_vectors), method
    raise ValueError(f"unknown refinement {method!r}")


# ---------------------------------------------------------------------------
# pipelines


def _finish(A, W, AW, pairs: EigenpairSet, seed, refine_method, settings, extra=None):
    out = []
    for i in range(len(pairs)):
        mu = complex(pairs.values[i])
        y = pairs.right[:, i]
        wv = W @ y
        nw = np.linalg.norm(wv)
        y, wv = y / nw, wv / nw
        tv = [(f, P @ y) for f, P in AW]
        resid = float(np.linalg.norm(sum(f(mu) * v for f, v in tv)))
        try:
            rho, used = refine(A, wv, mu, refine_method, settings, tv)
            ok, note = True, ""
        except NumericalError as exc:
            rho, used, ok, note = complex(np.nan, np.nan), refine_method, False, f"{type(exc).__name__}: {exc}"
        out.append(Extraction(mu, y, wv, rho, used, resid, int(seed), ok, note, dict(extra or {})))
    return out


def rrr_extract(A: MatrixFunction, W: np.ndarray, shift: complex, count: int = 1, seed: int = 0,
                refine: str = "auto", restarts: int = 8, settings: Settings = DEFAULT) -> list[Extraction]:
    """Sketch, solve the compressed problem, select the ``count`` pairs nearest ``shift``, refine.

    An empty list means no compressed eigenvalue fell inside ``A.region``.
    A failed refinement leaves ``rho`` as NaN with ``refined=False``.
    """
    W = np.asarray(W, dtype=complex)
    n, m = W.shape
    omega = gaussian_matrix(n, m, seed)
    AW = [(f, M @ W) for f, M in A.terms]
    B = MatrixFunction(tuple((f, omega.conj().T @ P) for f, P in AW), A.region, A.probe)
    pairs = solve_compressed(B, shift, restarts, settings)
    sel = select_pairs(pairs, shift, count, region=A.region)
    return _finish(A, W, AW, sel, seed, refine, settings)


def rect_pencil_solve(F: np.ndarray, G: np.ndarray, shift: complex = 0.0, tls: bool | None = None,
                      settings: Settings = DEFAULT) -> EigenpairSet:
    """Eigenpairs of a rectangular ``(m+s) x m`` pencil ``F - xi G`` by minimal perturbation.

    Let ``[X1; X2]`` span the right singular subspace of ``[F G]`` belonging
    to its ``m`` smallest singular values (``X1`` pairs with ``F``).  The
    nearest rank-``m`` stacked matrix annihilates it, which reduces the
    problem to the square pencil ``-X2 - xi X1``; eigenvectors are ``X1 c``.
    ``tls=False`` solves square input directly; by default square input goes
    through QZ and rectangular input through the reduction.
    """
    F = np.asarray(F, dtype=complex)
    G = np.asarray(G, dtype=complex)
    p, m = F.shape
    if G.shape != (p, m) or p < m:
        raise ValueError(f"need equal (m+s) x m pencil matrices, got {F.shape}, {G.shape}")
    if tls is None:
        tls = p > m
    if not tls:
        return small_geig(F, G, shift=shift, settings=settings)
    scale = max(np.linalg.norm(F, 2), np.linalg.norm(G, 2))
    _, _, V = svd(np.hstack([F, G]) / scale, full=True)
    X = V[:, m:]
    X1, X2 = X[:m], X[m:]
    s1 = np.linalg.svd(X1, compute_uv=False)
    if s1[-1] <= settings.rank_rtol * max(s1[0], np.finfo(float).tiny):
        raise SingularReduction(f"top block has smallest singular value {s1[-1]:.3e}")
    red = small_geig(-X2, X1, shift=shift, settings=settings)
    Z = X1 @ red.right
    Z = Z / np.linalg.norm(Z, axis=0)
    res = np.full(len(red), np.inf)
    nf, ng = np.linalg.norm(F, 2), np.linalg.norm(G, 2)
    for i in np.flatnonzero(red.finite):
        mu = red.values[i]
        res[i] = np.linalg.norm(F @ Z[:, i] - mu * (G @ Z[:, i])) / (nf + abs(mu) * ng)
    return EigenpairSet(red.values, Z, None, red.finite, res)


def rrr_extract_oversampled(A: MatrixFunction, W: np.ndarray, s: int, shift: complex, count: int = 1,
                            seed: int = 0, refine: str = "auto",
                            settings: Settings = DEFAULT) -> list[Extraction]:
    """As :func:`rrr_extract` for a pencil, with an ``n x (m+s)`` test matrix.

    ``s = 0`` is exactly :func:`rrr_extract` with the same seed.
    """
    if not A.is_linear:
        raise ValueError("oversampled extraction is defined for pencils only")
    if s == 0:
        return rrr_extract(A, W, shift, count, seed, refine, settings=settings)
    W = np.asarray(W, dtype=complex)
    n, m = W.shape
    omega = gaussian_matrix(n, m + s, seed)
    AW = [(f, M @ W) for f, M in A.terms]
    Oh = omega.conj().T
    F = sum(f.coeff * (Oh @ P) for f, P in AW if f.degree == 0)
    G = -sum(f.coeff * (Oh @ P) for f, P in AW if f.degree == 1)
    pairs = rect_pencil_solve(F, G, shift, settings=settings)
    sel = select_pairs(pairs, shift, count, region=A.region)
    return _finish(A, W, AW, sel, seed, refine, settings, {"oversample": s})


def petrov_galerkin_residual(P: CompressedProblem, A: MatrixFunction, W: np.ndarray, ext: Extraction) -> float:
    """``|Omega^H A(mu) W y|`` for a retained sketch."""
    if P.omega is None:
        raise ValueError("sketch was not retained")
    return float(np.linalg.norm(P.omega.conj().T @ (evaluate(A, ext.mu, 0, check=False) @ (W @ ext.y))))
