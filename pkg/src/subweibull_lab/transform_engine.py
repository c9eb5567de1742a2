"""Two-sided Laplace transforms, exponential-power moments and convergence intervals.

All expectations are returned as :class:`ExtendedReal`, a log-space value
that is either finite or a divergence verdict.  Families with a closed-form
transform use it by default; ``numeric=True`` forces quadrature so the two
routes can be cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, Mapping

import numpy as np

from . import _quadrature
from .dist_core import DistributionSpec, PointMass

__all__ = [
    "ConvergenceInterval",
    "DEFAULT_TOLERANCES",
    "ExtendedReal",
    "Tail",
    "ToleranceConfig",
    "abs_moment",
    "bisect_boundary",
    "convergence_interval",
    "exp_power_moment",
    "laplace_transform",
    "log_expectation",
    "mgf",
    "tail_classification",
]

_LOG_MAX_DISPLAY = math.log(1e300)


@dataclass(frozen=True)
class ExtendedReal:
    """A nonnegative extended real stored as its natural log; ``log_value = inf`` is +∞."""

    log_value: float

    @classmethod
    def infinite(cls) -> ExtendedReal:
        return cls(math.inf)

    @property
    def is_finite(self) -> bool:
        return self.log_value < math.inf

    @property
    def kind(self) -> str:
        return "Finite" if self.is_finite else "Infinite"

    @property
    def value(self) -> float:
        """Presentation value; ``inf`` when infinite or too large to represent."""
        if not self.is_finite or self.log_value > _LOG_MAX_DISPLAY:
            return math.inf
        return math.exp(self.log_value)

    def __sub__(self, other: ExtendedReal) -> ExtendedReal:
        """Ratio of two values (difference of logs); ``other`` must be finite."""
        if not other.is_finite:
            raise ValueError("cannot divide by an infinite value")
        return ExtendedReal(self.log_value - other.log_value)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "log_value": self.log_value if self.is_finite else None}


@dataclass(frozen=True)
class ToleranceConfig:
    """Numeric knobs of the divergence detector and the bisections.

    Attributes
    ----------
    window_cap
        Dyadic windows reach ``scale * 2**window_cap`` before divergence is declared.
    log_increment
        Window-to-window log-increment below which an integral has converged.
    quad_tol
        Relative Gauss-Kronrod tolerance inside each window.
    trend_run
        Far-tail cells whose log-mass must be nondecreasing to declare divergence.
    interval_tol, interval_cap
        Absolute bisection tolerance for ``(-S, T)`` and the value declared +∞.
    radius_tol, radius_floor, radius_cap
        Absolute bisection tolerance for ``R_q``; below ``radius_floor`` the
        radius is 0, finiteness at ``radius_cap`` makes it +∞.
    """

    window_cap: int = 1000
    log_increment: float = 1e-10
    quad_tol: float = 1e-10
    trend_run: int = 50
    interval_tol: float = 1e-6
    interval_cap: float = 1e6
    radius_tol: float = 1e-4
    radius_floor: float = 1e-6
    radius_cap: float = 1e3

    def violations(self) -> list[str]:
        bad = []
        if not (isinstance(self.window_cap, int) and self.window_cap >= 8):
            bad.append("tolerances.window_cap must be an integer >= 8")
        if not (isinstance(self.trend_run, int) and self.trend_run >= 4):
            bad.append("tolerances.trend_run must be an integer >= 4")
        for name in ("log_increment", "quad_tol", "interval_tol", "interval_cap", "radius_tol", "radius_floor", "radius_cap"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not (0 < v < math.inf):
                bad.append(f"tolerances.{name} must be a positive number")
        if not bad and self.radius_floor >= self.radius_cap:
            bad.append("tolerances.radius_floor must be < tolerances.radius_cap")
        return bad

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> ToleranceConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError("; ".join(f"tolerances: unknown key {k!r}" for k in unknown))
        cfg = cls(**dict(raw))
        problems = cfg.violations()
        if problems:
            raise ValueError("; ".join(problems))
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def integrator_kwargs(self) -> dict[str, Any]:
        return {
            "window_cap": self.window_cap,
            "log_increment": self.log_increment,
            "trend_run": self.trend_run,
        }


DEFAULT_TOLERANCES = ToleranceConfig()


def log_expectation(
    d: DistributionSpec,
    log_weight: Callable[[np.ndarray], np.ndarray],
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> ExtendedReal:
    """``E[exp(log_weight(X))]`` by log-space quadrature or lattice summation."""

    def g(x):
        with np.errstate(all="ignore"):
            return np.asarray(d.logpdf(x), dtype=float) + log_weight(x)

    kw = tol.integrator_kwargs()
    if d.discrete:
        start, count = d.lattice
        value = _quadrature.log_lattice_sum(g, start, count, **kw)
    else:
        lo, hi = d.support
        value = _quadrature.log_integral(
            g, lo, hi, d.center, d.scale, d.breakpoints, rel_tol=tol.quad_tol, **kw
        )
    return ExtendedReal(value)


@lru_cache(maxsize=65536)
def laplace_transform(
    d: DistributionSpec, t: float, numeric: bool = False, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> ExtendedReal:
    """Two-sided Laplace transform ``E[exp(-tX)]``.

    Parameters
    ----------
    d : DistributionSpec
    t : float
    numeric : bool
        Skip the closed form even when one exists.
    tol : ToleranceConfig

    Returns
    -------
    ExtendedReal
        Exactly ``log 1 = 0`` at ``t = 0``; infinite when the integral diverges.
    """
    t = float(t)
    if t == 0.0:
        return ExtendedReal(0.0)
    if not numeric:
        closed = d.log_laplace_closed(t)
        if closed is not None:
            return ExtendedReal(closed)
    return log_expectation(d, lambda x: -t * x, tol)


def mgf(d: DistributionSpec, t: float, numeric: bool = False, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ExtendedReal:
    """Moment generating function ``E[exp(tX)] = L_X(-t)``."""
    return laplace_transform(d, -float(t), numeric, tol)


@lru_cache(maxsize=65536)
def exp_power_moment(
    d: DistributionSpec, lam: float, q: float, numeric: bool = False, tol: ToleranceConfig = DEFAULT_TOLERANCES
) -> ExtendedReal:
    """``E[exp(λ^q |X|^q)]``, at least 1 and nondecreasing in ``λ``."""
    if not (lam > 0 and q > 0):
        raise ValueError("lam and q must be > 0")
    lam, q = float(lam), float(q)
    if isinstance(d, PointMass) and not numeric:
        return ExtendedReal((lam * abs(d.c)) ** q)
    if q == 1.0 and not numeric:
        # one-signed laws: E[exp(λ|X|)] is the Laplace transform at ∓λ
        lo, hi = d.support
        if lo >= 0:
            return laplace_transform(d, -lam, tol=tol)
        if hi <= 0:
            return laplace_transform(d, lam, tol=tol)

    def logw(x):
        return (lam * np.abs(x)) ** q

    out = log_expectation(d, logw, tol)
    # the integrand is >= the density, so clip quadrature noise below log 1
    return ExtendedReal(max(out.log_value, 0.0))


@lru_cache(maxsize=65536)
def abs_moment(d: DistributionSpec, p: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ExtendedReal:
    """``E|X|^p`` for ``p > 0``."""
    if not p > 0:
        raise ValueError("p must be > 0")
    p = float(p)
    if isinstance(d, PointMass):
        return ExtendedReal(p * math.log(abs(d.c)) if d.c != 0 else -math.inf)

    def logw(x):
        with np.errstate(divide="ignore"):
            return p * np.log(np.abs(x))

    return log_expectation(d, logw, tol)


@dataclass(frozen=True)
class ConvergenceInterval:
    """The open interval ``(-S, T)`` of tilts with ``L_X(-θ)`` finite."""

    S: float
    T: float

    def contains(self, theta: float) -> bool:
        return -self.S < theta < self.T

    def shifted(self, theta: float) -> ConvergenceInterval:
        """Interval of the law tilted by ``θ``: ``(-S - θ, T - θ)``."""
        return ConvergenceInterval(self.S + theta, self.T - theta)

    def to_dict(self) -> dict[str, float]:
        return {"S": self.S, "T": self.T}


def bisect_boundary(
    finite: Callable[[float], bool], tol: float, cap: float, start: float = 1.0, floor: float | None = None
) -> float:
    """Supremum of ``{s > 0 : finite(s)}`` for a monotone predicate.

    Returns 0 when ``finite(floor)`` fails (``floor`` defaults to ``tol``) and
    ``inf`` when ``finite(cap)`` holds; otherwise expands geometrically from
    ``start`` and bisects to absolute tolerance ``tol``, returning the
    bracket midpoint.
    """
    floor = tol if floor is None else floor
    if not finite(floor):
        return 0.0
    lo, hi = floor, max(min(start, cap), floor)
    while finite(hi):
        lo = hi
        if hi >= cap:
            return math.inf
        hi = min(2.0 * hi, cap)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if finite(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=4096)
def convergence_interval(d: DistributionSpec, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ConvergenceInterval:
    """``(-S, T)`` by geometric expansion from 1 and bisection on finiteness of ``L_X(-θ)``."""
    T = bisect_boundary(lambda th: laplace_transform(d, -th, tol=tol).is_finite, tol.interval_tol, tol.interval_cap)
    S = bisect_boundary(lambda th: laplace_transform(d, th, tol=tol).is_finite, tol.interval_tol, tol.interval_cap)
    return ConvergenceInterval(S, T)


class Tail(str, Enum):
    HEAVY = "Heavy"
    LIGHT = "Light"


def tail_classification(d: DistributionSpec, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> tuple[Tail, Tail]:
    """``(left, right)``: a tail is heavy when its side of the interval is empty."""
    ci = convergence_interval(d, tol)
    return (Tail.HEAVY if ci.S == 0 else Tail.LIGHT, Tail.HEAVY if ci.T == 0 else Tail.LIGHT)
