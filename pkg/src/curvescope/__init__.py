"""Curvelet transform via wrapping, per-scale contribution analysis and curvelet-domain edge improvement."""
from . import contributions, fdct, grid
from ._kernels import BACKEND
from .fdct import CurveletCoeffs, CurveletSystem, forward, inverse, max_scales, num_orientations, plan

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CurveletCoeffs",
    "CurveletSystem",
    "contributions",
    "fdct",
    "forward",
    "grid",
    "inverse",
    "max_scales",
    "num_orientations",
    "plan",
]
