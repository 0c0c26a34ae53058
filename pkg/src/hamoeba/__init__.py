"""Numerical laboratory for hyperbolic amoebas of surfaces in SL(2, C).

Surfaces in the unit-determinant group are sampled, pushed through the
quotient by the unitary subgroup into the matrix model of hyperbolic
3-space, rescaled, and compared against exact reference sets: complements
of balls about the base point, horospheres as images of lines, and the
closed-form decay floor behind the two-ball separation estimate.
"""

__version__ = "0.1.0"

from . import amoeba, cloudio, hdist, hmodel, lab, mat2, varieties
from .amoeba import PointCloud, kappa, trace_oracle_member, trace_oracle_rmin
from .hdist import hausdorff_capped, shell_sample, vp_build, vp_nn
from .hmodel import (
    Horosphere,
    LemmaConfig,
    busemann,
    distance,
    geodesic_from_origin,
    origin,
    rescale,
)
from .lab import FamilySpec, horosphere_sweep, lemma_check, tropical_limit_run, verify_line_horosphere
from .rng import SampleStream
from .varieties import Line, SteerRequest, SurfaceSpec, lift_horosphere, make_line, steer, trace_surface

__all__ = [
    "__version__",
    "amoeba",
    "cloudio",
    "hdist",
    "hmodel",
    "lab",
    "mat2",
    "varieties",
    "PointCloud",
    "kappa",
    "trace_oracle_member",
    "trace_oracle_rmin",
    "hausdorff_capped",
    "shell_sample",
    "vp_build",
    "vp_nn",
    "Horosphere",
    "LemmaConfig",
    "busemann",
    "distance",
    "geodesic_from_origin",
    "origin",
    "rescale",
    "FamilySpec",
    "horosphere_sweep",
    "lemma_check",
    "tropical_limit_run",
    "verify_line_horosphere",
    "SampleStream",
    "Line",
    "SteerRequest",
    "SurfaceSpec",
    "lift_horosphere",
    "make_line",
    "steer",
    "trace_surface",
]
