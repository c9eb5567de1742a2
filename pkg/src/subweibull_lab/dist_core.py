"""Catalog of univariate laws and the negative/nonnegative split.

Each family is an immutable dataclass.  Densities, distribution functions and
quantiles are closed form (built on :mod:`scipy.special`) and vectorized over
numpy arrays; log-tails are computed directly so they stay accurate far past
the point where the tail probability underflows.

Discrete laws live on a lattice ``start + n`` for ``n = 0, 1, ...`` and their
"density" is the probability mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import cached_property, lru_cache
from typing import Any, ClassVar, Mapping

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, log_ndtr, logsumexp, ndtr, ndtri, xlogy

from . import _quadrature

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_FLOAT_MAX = float(np.finfo(float).max)

__all__ = [
    "DegenerateSplit",
    "DistributionSpec",
    "Exponential",
    "Gaussian",
    "HalfNormal",
    "Laplace",
    "LogNormal",
    "Pareto",
    "PointMass",
    "Poisson",
    "SpecError",
    "SplitResult",
    "Truncated",
    "TwoSidedMixture",
    "Uniform",
    "Weibull",
    "abs_survival",
    "cdf",
    "density",
    "from_dict",
    "log_abs_survival",
    "sample",
    "split",
    "survival",
]


class SpecError(ValueError):
    """Invalid distribution parameters; ``violations`` lists every problem found."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class DegenerateSplit(ValueError):
    """``Pr(X < 0)`` is 0 or 1, so the split into two halves is undefined."""


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _out(values: np.ndarray, like) -> Any:
    return float(values) if np.ndim(like) == 0 else values


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _positive(family: str, **params: float) -> list[str]:
    bad = []
    for name, value in params.items():
        if not (_is_number(value) and math.isfinite(value) and value > 0):
            bad.append(f"{family}.{name} must be > 0")
    return bad


def _finite(family: str, **params: float) -> list[str]:
    return [
        f"{family}.{name} must be a finite number"
        for name, value in params.items()
        if not (_is_number(value) and math.isfinite(value))
    ]


class DistributionSpec:
    """Base class for every law in the catalog.

    Subclasses provide ``logpdf``, the tails, the quantile function and
    integration hints.  The analytic catalog hooks (``log_laplace_closed``,
    ``analytic_radius``, ...) return ``None`` when no closed form is known.
    """

    family: ClassVar[str]
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise SpecError(problems)

    def violations(self) -> list[str]:
        return []

    @property
    def params(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        params = {
            k: (v.to_dict() if isinstance(v, DistributionSpec) else v)
            for k, v in self.params.items()
        }
        return {"family": self.family, "params": params}

    # -- support and integration hints ------------------------------------
    @property
    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    @property
    def center(self) -> float:
        return 0.0

    @property
    def scale(self) -> float:
        return 1.0

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return ()

    @property
    def lattice(self) -> tuple[float, float]:
        """``(start, count)`` of the support lattice of a discrete law."""
        raise TypeError(f"{self.family} is not discrete")

    # -- densities and tails ----------------------------------------------
    def logpdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        with np.errstate(all="ignore"):
            return np.exp(self.logpdf(x))

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def logsf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.sf(x))

    def logcdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.cdf(x))

    def cdf_left(self, x):
        """``Pr(X < x)``."""
        if self.discrete:
            return np.maximum(self.cdf(x) - self.pdf(x), 0.0)
        return self.cdf(x)

    def log_cdf_left(self, x):
        if self.discrete:
            with np.errstate(divide="ignore"):
                return np.log(self.cdf_left(x))
        return self.logcdf(x)

    def ppf(self, u):
        raise NotImplementedError

    def isf(self, u):
        return self.ppf(1.0 - _arr(u))

    # -- moments ----------------------------------------------------------
    def mean(self) -> float:
        return _numeric_raw_moment(self, 1)

    def var(self) -> float:
        m = self.mean()
        if not math.isfinite(m):
            return math.inf
        return max(_numeric_raw_moment(self, 2) - m * m, 0.0)

    def std(self) -> float:
        return math.sqrt(self.var())

    # -- analytic catalog -------------------------------------------------
    def log_laplace_closed(self, t: float) -> float | None:
        """Closed-form ``log E[exp(-tX)]`` (``inf`` when divergent), or ``None``."""
        return None

    def analytic_radius(self, q: float) -> float | None:
        """Known radius of convergence ``R_q``, or ``None``."""
        return None

    def radius_attained(self, q: float) -> bool | None:
        """Whether ``E[exp(R_q^q |X|^q)]`` is finite at ``λ = R_q`` (0 < R_q < ∞)."""
        return None

    def laplace_endpoint_finite(self, side: str) -> bool | None:
        """Whether ``L_X(-θ)`` is finite at the finite endpoint ``θ = T`` (side
        ``"right"``) or ``θ = -S`` (side ``"left"``)."""
        return None


def _support_mask(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (x >= lo) & (x <= hi)


@dataclass(frozen=True)
class Gaussian(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0
    family: ClassVar[str] = "gaussian"

    def violations(self):
        return _finite(self.family, mu=self.mu) + _positive(self.family, sigma=self.sigma)

    @property
    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    @property
    def center(self):
        return self.mu

    @property
    def scale(self):
        return self.sigma

    def _z(self, x):
        return (_arr(x) - self.mu) / self.sigma

    def logpdf(self, x):
        z = self._z(x)
        with np.errstate(over="ignore"):
            return _out(-0.5 * z * z - _LOG_SQRT_2PI - math.log(self.sigma), x)

    def cdf(self, x):
        return _out(ndtr(self._z(x)), x)

    def sf(self, x):
        return _out(ndtr(-self._z(x)), x)

    def logcdf(self, x):
        return _out(log_ndtr(self._z(x)), x)

    def logsf(self, x):
        return _out(log_ndtr(-self._z(x)), x)

    def ppf(self, u):
        return _out(self.mu + self.sigma * ndtri(_arr(u)), u)

    def isf(self, u):
        return _out(self.mu - self.sigma * ndtri(_arr(u)), u)

    def mean(self):
        return float(self.mu)

    def var(self):
        return float(self.sigma) ** 2

    def log_laplace_closed(self, t):
        return -t * self.mu + 0.5 * (t * self.sigma) ** 2

    def analytic_radius(self, q):
        if q < 2:
            return math.inf
        return 1.0 / (self.sigma * math.sqrt(2.0)) if q == 2 else 0.0

    def radius_attained(self, q):
        return False if q == 2 else None


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    rate: float = 1.0
    family: ClassVar[str] = "exponential"

    def violations(self):
        return _positive(self.family, rate=self.rate)

    @property
    def params(self):
        return {"rate": self.rate}

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def center(self):
        return math.log(2.0) / self.rate

    @property
    def scale(self):
        return 1.0 / self.rate

    @property
    def breakpoints(self):
        return (0.0,)

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(invalid="ignore"):
            v = np.where(x >= 0, math.log(self.rate) - self.rate * x, -np.inf)
        return _out(v, x)

    def logsf(self, x):
        x = _arr(x)
        return _out(np.where(x >= 0, -self.rate * x, 0.0), x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        x = _arr(x)
        return _out(np.where(x >= 0, -np.expm1(-self.rate * np.maximum(x, 0)), 0.0), x)

    def logcdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            return _out(np.where(x > 0, np.log(-np.expm1(-self.rate * np.maximum(x, 0))), -np.inf), x)

    def ppf(self, u):
        return _out(-np.log1p(-_arr(u)) / self.rate, u)

    def isf(self, u):
        with np.errstate(divide="ignore"):
            return _out(-np.log(_arr(u)) / self.rate, u)

    def mean(self):
        return 1.0 / self.rate

    def var(self):
        return 1.0 / self.rate**2

    def log_laplace_closed(self, t):
        if t <= -self.rate:
            return math.inf
        return math.log(self.rate) - math.log(self.rate + t)

    def analytic_radius(self, q):
        if q < 1:
            return math.inf
        return float(self.rate) if q == 1 else 0.0

    def radius_attained(self, q):
        return False if q == 1 else None

    def laplace_endpoint_finite(self, side):
        return False if side == "right" else None


@dataclass(frozen=True)
class Laplace(DistributionSpec):
    location: float = 0.0
    scale: float = 1.0
    family: ClassVar[str] = "laplace"

    def violations(self):
        return _finite(self.family, location=self.location) + _positive(self.family, scale=self.scale)

    @property
    def params(self):
        return {"location": self.location, "scale": self.scale}

    @property
    def center(self):
        return self.location

    @property
    def breakpoints(self):
        return (self.location,)

    def _z(self, x):
        return (_arr(x) - self.location) / self.scale

    def logpdf(self, x):
        return _out(-math.log(2.0 * self.scale) - np.abs(self._z(x)), x)

    def logsf(self, x):
        z = self._z(x)
        with np.errstate(over="ignore"):
            v = np.where(z >= 0, math.log(0.5) - z, np.log1p(-0.5 * np.exp(np.minimum(z, 0))))
        return _out(v, x)

    def logcdf(self, x):
        z = self._z(x)
        with np.errstate(over="ignore"):
            v = np.where(z < 0, math.log(0.5) + z, np.log1p(-0.5 * np.exp(-np.maximum(z, 0))))
        return _out(v, x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        return _out(np.exp(self.logcdf(x)), x)

    def ppf(self, u):
        u = _arr(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(
                u < 0.5,
                self.location + self.scale * np.log(2.0 * u),
                self.location - self.scale * np.log(2.0 * (1.0 - u)),
            )
        return _out(v, u)

    def isf(self, u):
        return _out(2.0 * self.location - _arr(self.ppf(u)), u)

    def mean(self):
        return float(self.location)

    def var(self):
        return 2.0 * self.scale**2

    def log_laplace_closed(self, t):
        s = -t
        if abs(s) * self.scale >= 1.0:
            return math.inf
        return s * self.location - math.log1p(-((self.scale * s) ** 2))

    def analytic_radius(self, q):
        if q < 1:
            return math.inf
        return 1.0 / self.scale if q == 1 else 0.0

    def radius_attained(self, q):
        return False if q == 1 else None

    def laplace_endpoint_finite(self, side):
        return False


@dataclass(frozen=True)
class Weibull(DistributionSpec):
    shape: float = 1.0
    scale: float = 1.0
    family: ClassVar[str] = "weibull"

    def violations(self):
        return _positive(self.family, shape=self.shape, scale=self.scale)

    @property
    def params(self):
        return {"shape": self.shape, "scale": self.scale}

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def center(self):
        return self.scale * math.log(2.0) ** (1.0 / self.shape)

    @property
    def breakpoints(self):
        return (0.0,)

    def logpdf(self, x):
        x = _arr(x)
        k, c = self.shape, self.scale
        z = np.maximum(x, 0.0) / c
        with np.errstate(all="ignore"):
            v = math.log(k / c) + xlogy(k - 1.0, z) - z**k
        return _out(np.where(x >= 0, v, -np.inf), x)

    def logsf(self, x):
        x = _arr(x)
        with np.errstate(over="ignore"):
            return _out(-((np.maximum(x, 0.0) / self.scale) ** self.shape), x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        x = _arr(x)
        with np.errstate(over="ignore"):
            return _out(-np.expm1(-((np.maximum(x, 0.0) / self.scale) ** self.shape)), x)

    def ppf(self, u):
        return _out(self.scale * (-np.log1p(-_arr(u))) ** (1.0 / self.shape), u)

    def isf(self, u):
        with np.errstate(divide="ignore"):
            return _out(self.scale * (-np.log(_arr(u))) ** (1.0 / self.shape), u)

    def mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)

    def var(self):
        g1 = math.gamma(1.0 + 1.0 / self.shape)
        return self.scale**2 * (math.gamma(1.0 + 2.0 / self.shape) - g1 * g1)

    def analytic_radius(self, q):
        if q < self.shape:
            return math.inf
        return 1.0 / self.scale if q == self.shape else 0.0

    def radius_attained(self, q):
        return False if q == self.shape else None

    def laplace_endpoint_finite(self, side):
        if side != "right":
            return None
        if self.shape < 1:
            return True
        return False if self.shape == 1 else None


@dataclass(frozen=True)
class HalfNormal(DistributionSpec):
    sigma: float = 1.0
    family: ClassVar[str] = "half_normal"

    def violations(self):
        return _positive(self.family, sigma=self.sigma)

    @property
    def params(self):
        return {"sigma": self.sigma}

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def center(self):
        return 0.6744897501960817 * self.sigma

    @property
    def scale(self):
        return self.sigma

    @property
    def breakpoints(self):
        return (0.0,)

    def logpdf(self, x):
        x = _arr(x)
        z = x / self.sigma
        with np.errstate(over="ignore"):
            v = math.log(2.0) - 0.5 * z * z - _LOG_SQRT_2PI - math.log(self.sigma)
        return _out(np.where(x >= 0, v, -np.inf), x)

    def logsf(self, x):
        x = _arr(x)
        return _out(np.where(x >= 0, math.log(2.0) + log_ndtr(-x / self.sigma), 0.0), x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        x = _arr(x)
        return _out(np.where(x >= 0, 1.0 - 2.0 * ndtr(-np.maximum(x, 0) / self.sigma), 0.0), x)

    def ppf(self, u):
        return _out(-self.sigma * ndtri(0.5 * (1.0 - _arr(u))), u)

    def isf(self, u):
        return _out(-self.sigma * ndtri(0.5 * _arr(u)), u)

    def mean(self):
        return self.sigma * math.sqrt(2.0 / math.pi)

    def var(self):
        return self.sigma**2 * (1.0 - 2.0 / math.pi)

    def analytic_radius(self, q):
        if q < 2:
            return math.inf
        return 1.0 / (self.sigma * math.sqrt(2.0)) if q == 2 else 0.0

    def radius_attained(self, q):
        return False if q == 2 else None


class _Lattice:
    """Inverse-CDF sampling for discrete laws through a cached cumulative table."""

    def ppf(self, u):
        u = _arr(u)
        flat = u.ravel()
        table = _cdf_table(self, 64)
        target = float(flat.max()) if flat.size else 0.0
        while table[-1] < target and table.size < 2**26:
            grown = _cdf_table(self, 2 * table.size)
            if grown[-1] <= table[-1]:
                table = grown
                break
            table = grown
        idx = np.searchsorted(table, flat, side="left")
        idx = np.minimum(idx, int(np.searchsorted(table, table[-1], side="left")))
        start, _ = self.lattice
        return _out((start + idx.astype(float)).reshape(u.shape), u)


@lru_cache(maxsize=256)
def _cdf_table(d: DistributionSpec, size: int) -> np.ndarray:
    start, count = d.lattice
    n = np.arange(min(size, count), dtype=float)
    with np.errstate(all="ignore"):
        pmf = np.exp(d.logpdf(start + n))
    table = np.cumsum(np.nan_to_num(pmf))
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class Poisson(_Lattice, DistributionSpec):
    mu: float = 1.0
    family: ClassVar[str] = "poisson"
    discrete: ClassVar[bool] = True

    def violations(self):
        return _positive(self.family, mu=self.mu)

    @property
    def params(self):
        return {"mu": self.mu}

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def lattice(self):
        return (0.0, math.inf)

    @property
    def center(self):
        return float(self.mu)

    @property
    def scale(self):
        return max(1.0, math.sqrt(self.mu))

    def logpdf(self, x):
        x = _arr(x)
        ok = (x >= 0) & (x == np.floor(x))
        with np.errstate(all="ignore"):
            v = x * math.log(self.mu) - self.mu - gammaln(x + 1.0)
        return _out(np.where(ok, v, -np.inf), x)

    def cdf(self, x):
        x = _arr(x)
        k = np.floor(np.maximum(x, 0.0))
        return _out(np.where(x >= 0, gammaincc(k + 1.0, self.mu), 0.0), x)

    def sf(self, x):
        x = _arr(x)
        k = np.floor(np.maximum(x, 0.0))
        return _out(np.where(x >= 0, gammainc(k + 1.0, self.mu), 1.0), x)

    def logsf(self, x):
        x = _arr(x)
        flat = x.ravel()
        out = np.empty_like(flat)
        for i, xi in enumerate(flat):
            out[i] = self._logsf_scalar(float(xi))
        return _out(out.reshape(x.shape), x)

    def _logsf_scalar(self, x: float) -> float:
        if x < 0:
            return 0.0
        k = math.floor(x) + 1
        direct = float(gammainc(k, self.mu))
        if direct > 1e-250:
            return math.log(direct)
        # k is far above the mean here, so terms fall faster than geometrically
        j = k + np.arange(400, dtype=float)
        return float(logsumexp(j * math.log(self.mu) - self.mu - gammaln(j + 1.0)))

    def mean(self):
        return float(self.mu)

    def var(self):
        return float(self.mu)

    def log_laplace_closed(self, t):
        if -t > 700.0:
            # finite for every t, but log L exceeds the float range past t ~ -709
            log_value = math.log(self.mu) - t
            return _FLOAT_MAX if log_value > math.log(_FLOAT_MAX) else math.exp(log_value) - self.mu
        return self.mu * math.expm1(-t)

    def analytic_radius(self, q):
        return math.inf if q <= 1 else 0.0


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    a: float = 0.0
    b: float = 1.0
    family: ClassVar[str] = "uniform"

    def violations(self):
        bad = _finite(self.family, a=self.a, b=self.b)
        if not bad and not self.a < self.b:
            bad.append(f"{self.family}.a must be < {self.family}.b")
        return bad

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    @property
    def support(self):
        return (float(self.a), float(self.b))

    @property
    def center(self):
        return 0.5 * (self.a + self.b)

    @property
    def scale(self):
        return float(self.b - self.a)

    @property
    def breakpoints(self):
        return (float(self.a), float(self.b))

    def logpdf(self, x):
        x = _arr(x)
        return _out(np.where(_support_mask(x, self.a, self.b), -math.log(self.b - self.a), -np.inf), x)

    def cdf(self, x):
        return _out(np.clip((_arr(x) - self.a) / (self.b - self.a), 0.0, 1.0), x)

    def sf(self, x):
        return _out(np.clip((self.b - _arr(x)) / (self.b - self.a), 0.0, 1.0), x)

    def ppf(self, u):
        return _out(self.a + (self.b - self.a) * _arr(u), u)

    def isf(self, u):
        return _out(self.b - (self.b - self.a) * _arr(u), u)

    def mean(self):
        return 0.5 * (self.a + self.b)

    def var(self):
        return (self.b - self.a) ** 2 / 12.0

    def log_laplace_closed(self, t):
        s = -t
        w = self.b - self.a
        if s == 0:
            return 0.0
        # log E[e^{sX}] = s*a + log(expm1(s*w) / (s*w)), rewritten when s*w is large
        sw = s * w
        if sw > 50:
            return s * self.b + math.log1p(-math.exp(-sw)) - math.log(sw)
        if sw < -50:
            return s * self.a + math.log1p(-math.exp(sw)) - math.log(-sw)
        return s * self.a + math.log(math.expm1(sw) / sw)

    def analytic_radius(self, q):
        return math.inf


@dataclass(frozen=True)
class Pareto(DistributionSpec):
    x_min: float = 1.0
    alpha: float = 1.0
    family: ClassVar[str] = "pareto"

    def violations(self):
        return _positive(self.family, x_min=self.x_min, alpha=self.alpha)

    @property
    def params(self):
        return {"x_min": self.x_min, "alpha": self.alpha}

    @property
    def support(self):
        return (float(self.x_min), math.inf)

    @property
    def center(self):
        return self.x_min * 2.0 ** (1.0 / self.alpha)

    @property
    def scale(self):
        return float(self.x_min)

    @property
    def breakpoints(self):
        return (float(self.x_min),)

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(all="ignore"):
            v = math.log(self.alpha) + self.alpha * math.log(self.x_min) - (self.alpha + 1.0) * np.log(x)
        return _out(np.where(x >= self.x_min, v, -np.inf), x)

    def logsf(self, x):
        x = _arr(x)
        with np.errstate(all="ignore"):
            v = self.alpha * (math.log(self.x_min) - np.log(x))
        return _out(np.where(x >= self.x_min, v, 0.0), x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        return _out(-np.expm1(self.logsf(x)), x)

    def ppf(self, u):
        return _out(self.x_min * (1.0 - _arr(u)) ** (-1.0 / self.alpha), u)

    def isf(self, u):
        with np.errstate(divide="ignore"):
            return _out(self.x_min * _arr(u) ** (-1.0 / self.alpha), u)

    def mean(self):
        return self.alpha * self.x_min / (self.alpha - 1.0) if self.alpha > 1 else math.inf

    def var(self):
        if self.alpha <= 2:
            return math.inf
        a = self.alpha
        return self.x_min**2 * a / ((a - 1.0) ** 2 * (a - 2.0))

    def analytic_radius(self, q):
        return 0.0

    def laplace_endpoint_finite(self, side):
        return True if side == "right" else None


@dataclass(frozen=True)
class LogNormal(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0
    family: ClassVar[str] = "lognormal"

    def violations(self):
        return _finite(self.family, mu=self.mu) + _positive(self.family, sigma=self.sigma)

    @property
    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def center(self):
        return math.exp(self.mu)

    @property
    def scale(self):
        return math.exp(self.mu)

    @property
    def breakpoints(self):
        return (0.0,)

    def _z(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (np.log(_arr(x)) - self.mu) / self.sigma

    def logpdf(self, x):
        x = _arr(x)
        z = self._z(x)
        with np.errstate(all="ignore"):
            v = -np.log(x) - math.log(self.sigma) - _LOG_SQRT_2PI - 0.5 * z * z
        return _out(np.where(x > 0, v, -np.inf), x)

    def logsf(self, x):
        x = _arr(x)
        return _out(np.where(x > 0, log_ndtr(-self._z(np.maximum(x, 0))), 0.0), x)

    def logcdf(self, x):
        x = _arr(x)
        return _out(np.where(x > 0, log_ndtr(self._z(np.maximum(x, 0))), -np.inf), x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        return _out(np.exp(self.logcdf(x)), x)

    def ppf(self, u):
        return _out(np.exp(self.mu + self.sigma * ndtri(_arr(u))), u)

    def isf(self, u):
        return _out(np.exp(self.mu - self.sigma * ndtri(_arr(u))), u)

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def var(self):
        s2 = self.sigma**2
        return math.expm1(s2) * math.exp(2.0 * self.mu + s2)

    def analytic_radius(self, q):
        return 0.0

    def laplace_endpoint_finite(self, side):
        return True if side == "right" else None


@dataclass(frozen=True)
class PointMass(DistributionSpec):
    c: float = 0.0
    family: ClassVar[str] = "point_mass"
    discrete: ClassVar[bool] = True

    def violations(self):
        return _finite(self.family, c=self.c)

    @property
    def params(self):
        return {"c": self.c}

    @property
    def support(self):
        return (float(self.c), float(self.c))

    @property
    def lattice(self):
        return (float(self.c), 1.0)

    @property
    def center(self):
        return float(self.c)

    def logpdf(self, x):
        x = _arr(x)
        return _out(np.where(x == self.c, 0.0, -np.inf), x)

    def cdf(self, x):
        return _out(np.where(_arr(x) >= self.c, 1.0, 0.0), x)

    def sf(self, x):
        return _out(np.where(_arr(x) < self.c, 1.0, 0.0), x)

    def ppf(self, u):
        return _out(np.full_like(_arr(u), float(self.c)), u)

    def mean(self):
        return float(self.c)

    def var(self):
        return 0.0

    def log_laplace_closed(self, t):
        return -t * self.c

    def analytic_radius(self, q):
        return math.inf


@dataclass(frozen=True)
class TwoSidedMixture(DistributionSpec):
    """``X = -A`` with probability ``p`` and ``X = B`` otherwise (``A``, ``B ≥ 0``)."""

    left: DistributionSpec
    right: DistributionSpec
    p: float
    family: ClassVar[str] = "two_sided_mixture"

    def violations(self):
        bad = []
        if not (_is_number(self.p) and 0 < self.p < 1):
            bad.append(f"{self.family}.p must be in (0, 1)")
        for name, comp in (("left", self.left), ("right", self.right)):
            if not isinstance(comp, DistributionSpec):
                bad.append(f"{self.family}.{name} must be a distribution")
            elif comp.discrete:
                bad.append(f"{self.family}.{name} must be a continuous law")
            elif comp.support[0] < 0:
                bad.append(f"{self.family}.{name} must be supported on [0, inf)")
        return bad

    @property
    def params(self):
        return {"left": self.left, "right": self.right, "p": self.p}

    @property
    def support(self):
        return (-self.left.support[1], self.right.support[1])

    @property
    def scale(self):
        return max(self.left.scale, self.right.scale)

    @property
    def breakpoints(self):
        pts = {0.0}
        pts.update(-b for b in self.left.breakpoints)
        pts.update(self.right.breakpoints)
        return tuple(sorted(pts))

    def logpdf(self, x):
        x = _arr(x)
        with np.errstate(all="ignore"):
            neg = math.log(self.p) + _arr(self.left.logpdf(-x))
            pos = math.log1p(-self.p) + _arr(self.right.logpdf(x))
        return _out(np.where(x < 0, neg, pos), x)

    def cdf(self, x):
        x = _arr(x)
        neg = self.p * _arr(self.left.sf(-x))
        pos = self.p + (1.0 - self.p) * _arr(self.right.cdf(x))
        return _out(np.where(x < 0, neg, pos), x)

    def sf(self, x):
        x = _arr(x)
        neg = (1.0 - self.p) + self.p * _arr(self.left.cdf(-x))
        pos = (1.0 - self.p) * _arr(self.right.sf(x))
        return _out(np.where(x < 0, neg, pos), x)

    def logsf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore"):
            neg = np.log((1.0 - self.p) + self.p * _arr(self.left.cdf(-x)))
        pos = math.log1p(-self.p) + _arr(self.right.logsf(x))
        return _out(np.where(x < 0, neg, pos), x)

    def logcdf(self, x):
        x = _arr(x)
        neg = math.log(self.p) + _arr(self.left.logsf(-x))
        with np.errstate(divide="ignore"):
            pos = np.log(self.p + (1.0 - self.p) * _arr(self.right.cdf(x)))
        return _out(np.where(x < 0, neg, pos), x)

    def ppf(self, u):
        u = _arr(u)
        with np.errstate(all="ignore"):
            neg = -_arr(self.left.isf(u / self.p))
            pos = _arr(self.right.ppf((u - self.p) / (1.0 - self.p)))
        return _out(np.where(u < self.p, neg, pos), u)

    def isf(self, u):
        u = _arr(u)
        q = 1.0 - self.p
        with np.errstate(all="ignore"):
            pos = _arr(self.right.isf(u / q))
            neg = -_arr(self.left.ppf((u - q) / self.p))
        return _out(np.where(u <= q, pos, neg), u)

    def mean(self):
        return -self.p * self.left.mean() + (1.0 - self.p) * self.right.mean()

    def var(self):
        m = self.mean()
        second = self.p * (self.left.var() + self.left.mean() ** 2) + (1.0 - self.p) * (
            self.right.var() + self.right.mean() ** 2
        )
        return max(second - m * m, 0.0)

    def analytic_radius(self, q):
        ra, rb = self.left.analytic_radius(q), self.right.analytic_radius(q)
        if ra is None or rb is None:
            return None
        return min(ra, rb)

    def radius_attained(self, q):
        ra, rb = self.left.analytic_radius(q), self.right.analytic_radius(q)
        if ra is None or rb is None:
            return None
        r = min(ra, rb)
        verdicts = [c.radius_attained(q) for c, rc in ((self.left, ra), (self.right, rb)) if rc == r]
        if any(v is None for v in verdicts):
            return None
        return all(verdicts)

    def laplace_endpoint_finite(self, side):
        if side == "right":
            return self.right.laplace_endpoint_finite("right")
        return self.left.laplace_endpoint_finite("right")


@dataclass(frozen=True)
class Truncated(DistributionSpec):
    """Law of ``-X | X < 0`` (``negative=True``) or ``X | X >= 0`` for a continuous base."""

    base: DistributionSpec
    negative: bool
    family: ClassVar[str] = "truncated"

    def violations(self):
        if not isinstance(self.base, DistributionSpec):
            return ["truncated.base must be a distribution"]
        if self.base.discrete:
            return ["truncated.base must be a continuous law"]
        p = float(self.base.cdf(0.0))
        if not 0.0 < p < 1.0:
            return ["truncated.base must put mass on both sides of 0"]
        return []

    @property
    def params(self):
        return {"base": self.base, "side": "negative" if self.negative else "nonnegative"}

    @cached_property
    def _p(self) -> float:
        """Mass of the retained half under the base law."""
        p_neg = float(self.base.cdf(0.0))
        return p_neg if self.negative else 1.0 - p_neg

    @property
    def support(self):
        lo, hi = self.base.support
        return (0.0, -lo) if self.negative else (0.0, hi)

    @property
    def center(self):
        return float(self.ppf(0.5))

    @property
    def scale(self):
        return self.base.scale

    @property
    def breakpoints(self):
        sign = -1.0 if self.negative else 1.0
        return tuple(sorted({0.0} | {sign * b for b in self.base.breakpoints if sign * b > 0}))

    def logpdf(self, x):
        x = _arr(x)
        lp = math.log(self._p)
        if self.negative:
            v = np.where(x > 0, _arr(self.base.logpdf(-x)) - lp, -np.inf)
        else:
            v = np.where(x >= 0, _arr(self.base.logpdf(x)) - lp, -np.inf)
        return _out(v, x)

    def logsf(self, x):
        x = _arr(x)
        lp = math.log(self._p)
        if self.negative:
            v = _arr(self.base.logcdf(-np.maximum(x, 0))) - lp
        else:
            v = _arr(self.base.logsf(np.maximum(x, 0))) - lp
        return _out(np.where(x >= 0, np.minimum(v, 0.0), 0.0), x)

    def sf(self, x):
        return _out(np.exp(self.logsf(x)), x)

    def cdf(self, x):
        x = _arr(x)
        xp = np.maximum(x, 0)
        if self.negative:
            v = (self._p - _arr(self.base.cdf(-xp))) / self._p
        else:
            v = (_arr(self.base.cdf(xp)) - (1.0 - self._p)) / self._p
        return _out(np.where(x >= 0, np.clip(v, 0.0, 1.0), 0.0), x)

    def ppf(self, u):
        u = _arr(u)
        if self.negative:
            return _out(-_arr(self.base.ppf(self._p * (1.0 - u))), u)
        return _out(_arr(self.base.isf(self._p * (1.0 - u))), u)

    def isf(self, u):
        u = _arr(u)
        if self.negative:
            return _out(-_arr(self.base.ppf(self._p * u)), u)
        return _out(_arr(self.base.isf(self._p * u)), u)


_FAMILIES: dict[str, type[DistributionSpec]] = {
    cls.family: cls
    for cls in (
        Gaussian, Exponential, Laplace, Weibull, HalfNormal, Poisson,
        Uniform, Pareto, LogNormal, PointMass, TwoSidedMixture,
    )
}



def from_dict(obj: Mapping[str, Any], where: str = "distribution") -> DistributionSpec:
    """Build a law from ``{"family": ..., "params": {...}}``.

    Raises :class:`SpecError` listing every violation found, including those
    of nested mixture components.
    """
    if not isinstance(obj, Mapping):
        raise SpecError([f"{where} must be an object"])
    family = obj.get("family")
    cls = _FAMILIES.get(family) if isinstance(family, str) else None
    if cls is None:
        known = ", ".join(sorted(_FAMILIES))
        raise SpecError([f"{where}.family must be one of: {known} (got {family!r})"])
    params = obj.get("params", {})
    if not isinstance(params, Mapping):
        raise SpecError([f"{where}.params must be an object"])

    problems: list[str] = []
    kwargs: dict[str, Any] = {}
    if cls is TwoSidedMixture:
        for side in ("left", "right"):
            if side not in params:
                problems.append(f"{family}.{side} is required")
                continue
            try:
                kwargs[side] = from_dict(params[side], f"{where}.params.{side}")
            except SpecError as exc:
                problems.extend(exc.violations)
        kwargs["p"] = params.get("p")
        if kwargs["p"] is None:
            problems.append(f"{family}.p is required")
        unknown = set(params) - {"left", "right", "p"}
    else:
        names = {f.name for f in fields(cls)}
        unknown = set(params) - names
        for key in sorted(names):
            if key not in params:
                problems.append(f"{family}.{key} is required")
            else:
                kwargs[key] = params[key]
    for key in sorted(unknown):
        problems.append(f"{family}: unknown parameter {key!r}")
    if set(kwargs) == {f.name for f in fields(cls)} and None not in kwargs.values():
        # range checks on an unvalidated instance so they are reported together
        probe = object.__new__(cls)
        for key, value in kwargs.items():
            object.__setattr__(probe, key, value)
        problems.extend(probe.violations())
    if problems:
        raise SpecError(problems)
    return cls(**kwargs)


# -- module-level operations ---------------------------------------------------

def density(d: DistributionSpec, x):
    """Density (continuous laws) or probability mass (discrete laws) at ``x``."""
    return d.pdf(x)


def cdf(d: DistributionSpec, x):
    return d.cdf(x)


def survival(d: DistributionSpec, x):
    """``Pr(X > x)``."""
    return d.sf(x)


def log_abs_survival(d: DistributionSpec, t):
    """``log Pr(|X| > t)`` for ``t >= 0``, accurate deep in the tails."""
    t = _arr(t)
    right = _arr(d.logsf(t))
    left = _arr(d.log_cdf_left(-t))
    return _out(np.logaddexp(right, left), t)


def abs_survival(d: DistributionSpec, t):
    """``Pr(|X| > t) = Pr(X > t) + Pr(X < -t)``."""
    return _out(np.exp(_arr(log_abs_survival(d, t))), t)


def uniforms(n: int, seed: int) -> np.ndarray:
    """``n`` draws strictly inside (0, 1), deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    return (rng.integers(0, 2**53, size=n).astype(float) + 0.5) / 2.0**53


def sample(d: DistributionSpec, n: int, seed: int) -> np.ndarray:
    """Inverse-CDF sample of size ``n``; a pure function of ``(d, n, seed)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _arr(d.ppf(uniforms(n, seed)))


@dataclass(frozen=True)
class SplitResult:
    """``A = -X | X < 0``, ``B = X | X >= 0`` and ``p = Pr(X < 0)``."""

    A: DistributionSpec
    B: DistributionSpec
    p: float

    def reconstruct_cdf(self, x):
        """Parent CDF rebuilt from the halves."""
        x = _arr(x)
        neg = self.p * (1.0 - _arr(self.A.cdf_left(-x)))
        pos = self.p + (1.0 - self.p) * _arr(self.B.cdf(x))
        return _out(np.where(x < 0, neg, pos), x)


def split(d: DistributionSpec) -> SplitResult:
    """Split ``d`` into its negative and nonnegative halves.

    Any atom at 0 belongs to ``B``.  Raises :class:`DegenerateSplit` when
    ``Pr(X < 0)`` is 0 or 1.
    """
    p = float(d.cdf_left(0.0))
    if not 0.0 < p < 1.0:
        raise DegenerateSplit(f"Pr(X < 0) = {p:g} for {d.family}; use the law or its negation directly")
    if isinstance(d, TwoSidedMixture):
        return SplitResult(d.left, d.right, float(d.p))
    if isinstance(d, Gaussian) and d.mu == 0:
        half = HalfNormal(d.sigma)
        return SplitResult(half, half, p)
    if isinstance(d, Laplace) and d.location == 0:
        half = Exponential(1.0 / d.scale)
        return SplitResult(half, half, p)
    if isinstance(d, Uniform):
        return SplitResult(Uniform(0.0, -d.a), Uniform(0.0, d.b), p)
    return SplitResult(Truncated(d, True), Truncated(d, False), p)


def _numeric_raw_moment(d: DistributionSpec, k: int) -> float:
    """``E[X^k]`` by log-space integration of the positive and negative parts."""
    parts = []
    for sign in (1.0, -1.0):
        def logw(x, sign=sign):
            with np.errstate(divide="ignore", invalid="ignore"):
                return k * np.log(np.where(sign * x > 0, sign * x, 0.0))
        parts.append(_log_expect(d, logw))
    pos, neg = parts
    if math.isinf(pos) and pos > 0 or math.isinf(neg) and neg > 0:
        return math.inf
    sign_neg = (-1.0) ** k
    return math.exp(pos) + sign_neg * math.exp(neg)


def _log_expect(d: DistributionSpec, logw, **tol) -> float:
    """``log E[exp(logw(X))]`` with the default tolerances (used for moments)."""
    def g(x):
        return _arr(d.logpdf(x)) + _arr(logw(x))

    if d.discrete:
        start, count = d.lattice
        return _quadrature.log_lattice_sum(g, start, count, **tol)
    lo, hi = d.support
    return _quadrature.log_integral(g, lo, hi, d.center, d.scale, d.breakpoints, **tol)
