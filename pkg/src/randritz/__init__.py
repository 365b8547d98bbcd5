"""Randomized Rayleigh-Ritz extraction of eigenpairs from trial subspaces.

The main entry points are :func:`rrr_extract` (sketch, solve the compressed
problem, refine) and the Galerkin baselines in :mod:`randritz.baseline`.
"""

from .baseline import RitzSet, rayleigh_ritz_nep, rayleigh_ritz_pencil, rayleigh_ritz_standard
from .conditioning import bound_constants, kappa_val, kappa_vec, mc_condition_study, perturb_predict
from .dense import derive_seed, gaussian_matrix, principal_angle, vector_angle
from .errors import InputError, NumericalError
from .nep import Disc, MatrixFunction, Rect, constant, evaluate, exponential, monomial
from .rrr import Extraction, refine, rrr_extract, rrr_extract_oversampled, sketch
from .settings import DEFAULT, Settings

__all__ = [
    "DEFAULT",
    "Disc",
    "Extraction",
    "InputError",
    "MatrixFunction",
    "NumericalError",
    "Rect",
    "RitzSet",
    "Settings",
    "bound_constants",
    "constant",
    "derive_seed",
    "evaluate",
    "exponential",
    "gaussian_matrix",
    "kappa_val",
    "kappa_vec",
    "mc_condition_study",
    "monomial",
    "perturb_predict",
    "principal_angle",
    "rayleigh_ritz_nep",
    "rayleigh_ritz_pencil",
    "rayleigh_ritz_standard",
    "refine",
    "rrr_extract",
    "rrr_extract_oversampled",
    "sketch",
    "vector_angle",
]
