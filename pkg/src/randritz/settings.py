"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    residual_tol: float = 1e-10
    rank_rtol: float = 1e-12
    pivot_rtol: float = 1e-15
    infinite_tol: float = 1e-13
    singular_rtol: float = 1e-12
    ghost_filter: float = 1e-6
    cluster_tol: float = 1e-8
    derivative_rtol: float = 1e-13
    denominator_rtol: float = 1e-12
    # |w^H A'(mu) w| / (|A'(mu) w| |w|) below this sends auto-refinement to the stationary point
    functional_safety: float = 0.05
    newton_tol: float = 1e-14
    max_iter: int = 60
    sup_samples: int = 64


DEFAULT = Settings()
