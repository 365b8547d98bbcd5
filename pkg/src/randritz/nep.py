"""Holomorphic matrix-valued functions in split form ``A(xi) = sum_i f_i(xi) A_i``.

A standard problem ``A0 - xi I``, a pencil ``A0 - xi A1``, a matrix polynomial
and a general analytic function are all :class:`MatrixFunction` instances;
only the scalar terms differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import OutOfRegion
from .settings import DEFAULT, Settings


@dataclass(frozen=True)
class Disc:
    center: complex = 0.0
    radius: float = 10.0

    def contains(self, xi: complex, rtol: float = 1e-8) -> bool:
        return abs(xi - self.center) <= self.radius * (1 + rtol)

    def boundary(self, k: int) -> np.ndarray:
        return self.center + self.radius * np.exp(2j * np.pi * np.arange(k) / k)

    @property
    def mid(self) -> complex:
        return complex(self.center)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with corners ``lower`` and ``upper``."""

    lower: complex = -1 - 1j
    upper: complex = 1 + 1j

    def contains(self, xi: complex, rtol: float = 1e-8) -> bool:
        pad = rtol * abs(self.upper - self.lower)
        return (self.lower.real - pad <= xi.real <= self.upper.real + pad
                and self.lower.imag - pad <= xi.imag <= self.upper.imag + pad)

    def boundary(self, k: int) -> np.ndarray:
        # equally spaced in arclength; the parameterization is nested under doubling
        lo, hi = complex(self.lower), complex(self.upper)
        w, h = hi.real - lo.real, hi.imag - lo.imag
        s = np.arange(k) / k * 2 * (w + h)
        pts = np.empty(k, dtype=complex)
        for j, t in enumerate(s):
            if t < w:
                pts[j] = lo + t
            elif t < w + h:
                pts[j] = complex(hi.real, lo.imag + (t - w))
            elif t < 2 * w + h:
                pts[j] = complex(hi.real - (t - w - h), hi.imag)
            else:
                pts[j] = complex(lo.real, hi.imag - (t - 2 * w - h))
        return pts

    @property
    def mid(self) -> complex:
        return (complex(self.lower) + complex(self.upper)) / 2


@dataclass(frozen=True)
class ScalarTerm:
    """Scalar coefficient function of one term.

    ``kind`` is ``"constant"``, ``"monomial"`` (``coeff * xi**power``) or
    ``"analytic"`` (user callables ``f, f', f''`` in ``funcs``; ``name``
    is used for serialization).
    """

    kind: str = "constant"
    power: int = 0
    coeff: complex = 1.0
    funcs: tuple[Callable, Callable, Callable] | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("constant", "monomial", "analytic"):
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind == "monomial" and self.power < 0:
            raise ValueError("monomial power must be nonnegative")
        if self.kind == "analytic" and (self.funcs is None or len(self.funcs) != 3):
            raise ValueError("analytic terms need (f, f', f'')")

    @property
    def degree(self) -> int | None:
        """Polynomial degree, or None for analytic terms."""
        if self.kind == "constant":
            return 0
        if self.kind == "monomial":
            return self.power
        return None

    def __call__(self, xi: complex, order: int = 0) -> complex:
        if self.kind == "analytic":
            return complex(self.coeff * self.funcs[order](xi))
        k = self.degree
        if order > k:
            return 0j
        return complex(self.coeff * math.perm(k, order) * xi ** (k - order))


def constant(coeff: complex = 1.0) -> ScalarTerm:
    return ScalarTerm("constant", 0, coeff)


def monomial(power: int, coeff: complex = 1.0) -> ScalarTerm:
    return ScalarTerm("monomial", power, coeff)


def exponential(rate: complex = 1.0, coeff: complex = 1.0) -> ScalarTerm:
    """``coeff * exp(rate * xi)``."""
    f = lambda xi: np.exp(rate * xi)  # noqa: E731
    return ScalarTerm("analytic", 0, coeff,
                      (f, lambda xi: rate * f(xi), lambda xi: rate ** 2 * f(xi)),
                      name=f"exp:{complex(rate)!r}")


def _frozen(M) -> np.ndarray:
    M = np.array(M, dtype=complex)
    M.flags.writeable = False
    return M


@dataclass(frozen=True)
class MatrixFunction:
    """``A(xi) = sum_i terms[i][0](xi) * terms[i][1]`` on ``region``.

    ``probe`` is a point of the region at which ``A`` is expected to be
    nonsingular (the regularity witness checked by :func:`is_regular`).
    """

    terms: tuple
    region: Disc | Rect = field(default_factory=Disc)
    probe: complex = 0.0

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a matrix function needs at least one term")
        frozen = []
        n = None
        for f, M in self.terms:
            M = _frozen(M)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise ValueError(f"term matrices must be square, got {M.shape}")
            if n is not None and M.shape != (n, n):
                raise ValueError("term matrices differ in size")
            n = M.shape[0]
            frozen.append((f, M))
        object.__setattr__(self, "terms", tuple(frozen))

    # -- construction helpers ------------------------------------------------
    @classmethod
    def standard(cls, A0, region=None) -> MatrixFunction:
        A0 = np.asarray(A0, dtype=complex)
        if region is None:
            region = Disc(0.0, 1.5 * np.linalg.norm(A0, 2) + 1.0)
        return cls(((constant(), A0), (monomial(1, -1.0), np.eye(A0.shape[0]))), region)

    @classmethod
    def pencil(cls, A0, A1, region=None, probe: complex = 0.0) -> MatrixFunction:
        return cls(((constant(), A0), (monomial(1, -1.0), A1)), region or Disc(), probe)

    @classmethod
    def polynomial(cls, coeffs, scalars=None, region=None, probe: complex = 0.0) -> MatrixFunction:
        """``sum_i scalars[i] * xi**i * coeffs[i]``."""
        scalars = [1.0] * len(coeffs) if scalars is None else scalars
        terms = tuple((monomial(i, c) if i else constant(c), M)
                      for i, (c, M) in enumerate(zip(scalars, coeffs)))
        return cls(terms, region or Disc(), probe)

    # -- structure -------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.terms[0][1].shape[0]

    @property
    def degree(self) -> int | None:
        degs = [f.degree for f, _ in self.terms]
        return None if any(d is None for d in degs) else max(degs)

    @property
    def is_polynomial(self) -> bool:
        return self.degree is not None

    @property
    def is_linear(self) -> bool:
        return self.degree is not None and self.degree <= 1

    def poly_coefficients(self) -> list[np.ndarray]:
        """Matrices ``P_k`` with ``A(xi) = sum_k xi**k P_k``."""
        d = self.degree
        if d is None:
            raise ValueError("not a polynomial matrix function")
        out = [np.zeros((self.n, self.n), dtype=complex) for _ in range(d + 1)]
        for f, M in self.terms:
            out[f.degree] = out[f.degree] + f.coeff * M
        return out

    def linear_parts(self) -> tuple[np.ndarray, np.ndarray]:
        """``(F, G)`` with ``A(xi) = F - xi G``."""
        if not self.is_linear:
            raise ValueError("not a linear matrix function")
        P = self.poly_coefficients()
        G = -P[1] if len(P) > 1 else np.zeros_like(P[0])
        return P[0], G

    def is_standard(self) -> bool:
        return self._standard

    @cached_property
    def _standard(self) -> bool:
        if not self.is_linear:
            return False
        _, G = self.linear_parts()
        return bool(np.array_equal(G, np.eye(self.n)))

    def compress(self, left: np.ndarray, right: np.ndarray) -> MatrixFunction:
        """``left^H A(xi) right`` as a matrix function (needs square result)."""
        Lh = np.asarray(left, dtype=complex).conj().T
        R = np.asarray(right, dtype=complex)
        return MatrixFunction(tuple((f, Lh @ (M @ R)) for f, M in self.terms), self.region, self.probe)

    def __call__(self, xi: complex, order: int = 0, check: bool = False) -> np.ndarray:
        return evaluate(self, xi, order, check=check)

    def __add__(self, other: MatrixFunction) -> MatrixFunction:
        return MatrixFunction(self.terms + other.terms, self.region, self.probe)


def _check_region(A: MatrixFunction, xi: complex):
    if not A.region.contains(complex(xi)):
        raise OutOfRegion(f"{xi} lies outside {A.region}")


def evaluate(A: MatrixFunction, xi: complex, order: int = 0, check: bool = True) -> np.ndarray:
    """``A(xi)``, ``A'(xi)`` or ``A''(xi)`` (``order`` 0, 1, 2)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if check:
        _check_region(A, xi)
    out = np.zeros((A.n, A.n), dtype=complex)
    for f, M in A.terms:
        c = f(xi, order)
        if c != 0:
            out += c * M
    return out


def apply_block(A: MatrixFunction, xi: complex, W: np.ndarray, order: int = 0,
                check: bool = True) -> np.ndarray:
    """``A^{(order)}(xi) @ W`` accumulated term by term."""
    return BlockProducts(A, W)(xi, order, check=check)


class BlockProducts:
    """Cached products ``A_i @ W`` so ``A(xi) W y`` costs no further n x n work."""

    def __init__(self, A: MatrixFunction, W: np.ndarray):
        self.A = A
        W = np.asarray(W, dtype=complex)
        self.squeeze = W.ndim == 1
        W = W[:, None] if self.squeeze else W
        self.products = [(f, M @ W) for f, M in A.terms]

    def __call__(self, xi: complex, order: int = 0, y: np.ndarray | None = None,
                 check: bool = True) -> np.ndarray:
        if check:
            _check_region(self.A, xi)
        out = None
        for f, P in self.products:
            c = f(xi, order)
            if c == 0:
                continue
            term = c * (P if y is None else P @ y)
            out = term if out is None else out + term
        if out is None:
            shape = self.products[0][1].shape
            out = np.zeros(shape if y is None else (shape[0],) + np.shape(y)[1:], dtype=complex)
        if self.squeeze and y is None:
            out = out[:, 0]
        return out


def sup_norm_estimate(A: MatrixFunction, order: int = 0, samples: int | None = None,
                      settings: Settings = DEFAULT) -> float:
    """Max spectral norm of ``A^{(order)}`` over ``samples`` boundary points and the center."""
    samples = settings.sup_samples if samples is None else samples
    if samples < 8:
        raise ValueError("at least 8 samples required")
    pts = np.concatenate([[A.region.mid], A.region.boundary(samples)])
    return float(max(np.linalg.norm(evaluate(A, z, order, check=False), 2) for z in pts))


def is_regular(A: MatrixFunction, xi0: complex | None = None, rtol: float = 1e-12) -> bool:
    """True iff ``sigma_min(A(xi0)) > rtol * ||A(xi0)||``."""
    xi0 = A.probe if xi0 is None else xi0
    s = np.linalg.svd(evaluate(A, xi0, 0, check=False), compute_uv=False)
    return bool(s[-1] > rtol * s[0])
