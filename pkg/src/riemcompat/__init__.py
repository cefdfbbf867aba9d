"""Numerical checks of Riemann compatibility and related curvature identities.

Metrics are given by component expressions on a chart; curvature and
covariant derivatives are evaluated exactly at points through truncated
Taylor jets.
"""
__version__ = "0.1.0"

from .curvature import (RIEMANN_SIGN, ChartedMetric, CurvaturePack, TensorField, christoffel,
                        covariant_derivative, curvature_pack, ricci, riemann, scalar_curvature)
from .compatibility import (calibrate_sign, codazzi_deviation, commutation_checks, compat_residual,
                            identity4_residual, k_tensor_symmetry_residuals, lovelock_residual, veblen_residuals)
from .catalog import catalog, random_field, random_metric, sample_points
from .expr import parse
from .jets import Jet
from .residual import Residual
from .suite import SUITES, SuiteReport, run_suite
from .tensor import DenseTensor, jeinsum

__all__ = [
    "__version__", "RIEMANN_SIGN", "ChartedMetric", "CurvaturePack", "TensorField", "DenseTensor", "Jet",
    "Residual", "SuiteReport", "SUITES", "calibrate_sign", "catalog", "christoffel", "codazzi_deviation",
    "commutation_checks", "compat_residual", "covariant_derivative", "curvature_pack", "identity4_residual",
    "jeinsum", "k_tensor_symmetry_residuals", "lovelock_residual", "parse", "random_field", "random_metric",
    "ricci", "riemann", "run_suite", "sample_points", "scalar_curvature", "veblen_residuals",
]
