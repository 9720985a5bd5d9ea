"""Singular self-similar profiles of fast and logarithmic diffusion.

The main entry points are :func:`integrate_profile` (the radial profile),
:func:`solve` (the radial parabolic flow on an annulus) and the sweep
functions for the limit m -> 0.
"""
from .errors import (ConfigError, DegenerateFit, FastDiffError, GridMismatch,
                     InsufficientRange, IntegrationFailure, MonotonicityViolation,
                     NewtonDivergence, OutOfRange, PositivityLoss)
from .farfield import farfield_limit
from .kernels import BACKEND
from .parabolic import AnnulusGrid, ParabolicSolution, check_comparison, check_sandwich, solve
from .params import DerivedConstants, Params, derive, validate
from .profile import ProfileSolution, integrate_profile
from .reference import BarenblattSolution, SelfSimilarSolution
from .sweeps import SweepReport, elliptic_sweep, fit_rate, parabolic_sweep

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AnnulusGrid", "BarenblattSolution", "ConfigError", "DegenerateFit",
    "DerivedConstants", "FastDiffError", "GridMismatch", "InsufficientRange",
    "IntegrationFailure", "MonotonicityViolation", "NewtonDivergence", "OutOfRange",
    "ParabolicSolution", "Params", "PositivityLoss", "ProfileSolution", "SelfSimilarSolution",
    "SweepReport", "check_comparison", "check_sandwich", "derive", "elliptic_sweep",
    "farfield_limit", "fit_rate", "integrate_profile", "parabolic_sweep", "solve", "validate",
]
