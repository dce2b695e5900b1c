"""Complex-time Segal-Bargmann transform on R^d and SU(2).

Submodules: ``params`` (parameters and the metric map), ``euclidean`` (the flat
case), ``su2`` (group, representations, heat kernels), ``opcalc`` (exact
operator calculus on matrix entries), ``sampling`` (Monte Carlo on SL(2, C))
and ``experiments`` / ``cli`` (reports).
"""
from ._backend import BACKEND
from .params import ComplexTime, DomainError, MetricTriple, TransformParams, phi, phi_inverse

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComplexTime",
    "DomainError",
    "MetricTriple",
    "TransformParams",
    "phi",
    "phi_inverse",
    "__version__",
]
