"""Subweibull tail classification, Laplace transforms and exponential tilting."""

__version__ = "0.1.0"

from .dist_core import (  # noqa: E402
    DegenerateSplit,
    DistributionSpec,
    Exponential,
    Gaussian,
    HalfNormal,
    Laplace,
    LogNormal,
    Pareto,
    PointMass,
    Poisson,
    SplitResult,
    TwoSidedMixture,
    Uniform,
    Weibull,
    split,
)
from .subweibull import classify, estimate_radius, radius_preservation_report  # noqa: E402
from .tilting import TiltedDistribution, TiltOutsideInterval, tilt  # noqa: E402
from .transform_engine import (  # noqa: E402
    ConvergenceInterval,
    ExtendedReal,
    ToleranceConfig,
    convergence_interval,
    laplace_transform,
    mgf,
)

__all__ = [
    "ConvergenceInterval",
    "DegenerateSplit",
    "DistributionSpec",
    "Exponential",
    "ExtendedReal",
    "Gaussian",
    "HalfNormal",
    "Laplace",
    "LogNormal",
    "Pareto",
    "PointMass",
    "Poisson",
    "SplitResult",
    "TiltOutsideInterval",
    "TiltedDistribution",
    "ToleranceConfig",
    "TwoSidedMixture",
    "Uniform",
    "Weibull",
    "classify",
    "convergence_interval",
    "estimate_radius",
    "laplace_transform",
    "mgf",
    "radius_preservation_report",
    "split",
    "tilt",
]
