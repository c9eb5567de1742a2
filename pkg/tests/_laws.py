"""Shared catalog of test laws."""

from subweibull_lab import dist_core as dc

CONTINUOUS = [
    dc.Gaussian(0.0, 1.0),
    dc.Gaussian(1.5, 0.4),
    dc.Exponential(2.0),
    dc.Laplace(0.0, 1.0),
    dc.Laplace(-0.3, 2.0),
    dc.Weibull(0.7, 2.0),
    dc.Weibull(2.0, 1.0),
    dc.HalfNormal(1.3),
    dc.Uniform(-1.0, 3.0),
    dc.Pareto(1.0, 2.5),
    dc.LogNormal(0.2, 0.8),
    dc.TwoSidedMixture(dc.Exponential(2.0), dc.HalfNormal(1.0), 0.3),
]

DISCRETE = [dc.Poisson(1.0), dc.Poisson(7.5), dc.PointMass(3.0)]

CATALOG = CONTINUOUS + DISCRETE


def law_id(d) -> str | None:
    if not isinstance(d, dc.DistributionSpec):
        return None
    return f"{d.family}-" + "-".join(
        f"{v:g}" if isinstance(v, (int, float)) else v.family for v in d.params.values()
    )
