"""Exponentially tilted laws ``dF_θ(x) = exp(θx) dF(x) / L_X(-θ)``.

A :class:`TiltedDistribution` is itself a :class:`DistributionSpec`, so it can
be tilted again, split, or fed to any transform.  When the base family is
closed under tilting, the image law (``conjugate``) is recorded and used for
the distribution function, quantiles and sampling; otherwise those are
computed from a cumulative table of the tilted density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, ClassVar

import numpy as np
from scipy.special import logsumexp

from . import _quadrature
from .dist_core import (
    DistributionSpec,
    Exponential,
    Gaussian,
    PointMass,
    Poisson,
    _arr,
    _out,
    uniforms,
)
from .transform_engine import (
    DEFAULT_TOLERANCES,
    ConvergenceInterval,
    ExtendedReal,
    ToleranceConfig,
    bisect_boundary,
    convergence_interval,
    laplace_transform,
)

__all__ = [
    "TiltOutsideInterval",
    "TiltedDistribution",
    "conjugate_of",
    "shifted_interval",
    "tilt",
    "tilted_cdf",
    "tilted_density",
    "tilted_mgf",
    "tilted_sample",
]

_NEGLIGIBLE = 80.0  # nats below the peak at which the cumulative table stops
_CORE_HALF_WIDTH = 16.0
_CORE_CELLS = 1024
_GRADED_DEPTH = 50
_GL_ORDER = 20
_DEEP_TAIL = -40.0  # log-probability below which tails are integrated directly


class TiltOutsideInterval(ValueError):
    """``θ`` is not strictly inside the convergence interval, so ``L_X(-θ)`` diverges."""


def conjugate_of(d: DistributionSpec, theta: float) -> DistributionSpec | None:
    """Closed-form image of ``d`` under tilting by ``θ``, or ``None``."""
    if theta == 0:
        return d
    if isinstance(d, Gaussian):
        return Gaussian(d.mu + theta * d.sigma**2, d.sigma)
    if isinstance(d, Poisson):
        return Poisson(d.mu * math.exp(theta))
    if isinstance(d, Exponential) and theta < d.rate:
        return Exponential(d.rate - theta)
    if isinstance(d, PointMass):
        return d
    if isinstance(d, TiltedDistribution) and d.conjugate is not None:
        return conjugate_of(d.conjugate, theta)
    return None


@dataclass(frozen=True)
class TiltedDistribution(DistributionSpec):
    """The law of ``X`` reweighted by ``exp(θx) / L_X(-θ)``.

    Attributes
    ----------
    base : DistributionSpec
    theta : float
    log_normalizer : float
        ``log L_base(-θ)``.
    conjugate : DistributionSpec or None
        The same law as a catalog family, when the base family is tilt-closed.
    """

    base: DistributionSpec
    theta: float
    log_normalizer: float
    conjugate: DistributionSpec | None = None
    family: ClassVar[str] = "tilted"

    @property
    def params(self) -> dict[str, Any]:
        return {"base": self.base, "theta": self.theta}

    @property
    def discrete(self) -> bool:  # type: ignore[override]
        return self.base.discrete

    @property
    def lattice(self):
        return self.base.lattice

    @property
    def support(self):
        return self.base.support

    @property
    def center(self):
        return self.conjugate.center if self.conjugate is not None else self._mode

    @property
    def scale(self):
        return self.conjugate.scale if self.conjugate is not None else self.base.scale

    @property
    def breakpoints(self):
        return self.base.breakpoints

    def logpdf(self, x):
        x = _arr(x)
        base = _arr(self.base.logpdf(x))
        with np.errstate(invalid="ignore"):
            v = np.where(base > -np.inf, base + self.theta * x - self.log_normalizer, -np.inf)
        return _out(v, x)

    # -- distribution function: conjugate when known, numeric otherwise ---
    def cdf(self, x):
        return self.conjugate.cdf(x) if self.conjugate is not None else self.numeric_cdf(x)

    def sf(self, x):
        return self.conjugate.sf(x) if self.conjugate is not None else self.numeric_sf(x)

    def logsf(self, x):
        return self.conjugate.logsf(x) if self.conjugate is not None else self.numeric_logsf(x)

    def logcdf(self, x):
        return self.conjugate.logcdf(x) if self.conjugate is not None else self.numeric_logcdf(x)

    def ppf(self, u):
        return self.conjugate.ppf(u) if self.conjugate is not None else self.numeric_ppf(u)

    def isf(self, u):
        return self.conjugate.isf(u) if self.conjugate is not None else self.numeric_ppf(1.0 - _arr(u))

    def mean(self):
        return self.conjugate.mean() if self.conjugate is not None else super().mean()

    def var(self):
        return self.conjugate.var() if self.conjugate is not None else super().var()

    def log_laplace_closed(self, t):
        return self.conjugate.log_laplace_closed(t) if self.conjugate is not None else None

    def analytic_radius(self, q):
        return self.conjugate.analytic_radius(q) if self.conjugate is not None else None

    def radius_attained(self, q):
        return self.conjugate.radius_attained(q) if self.conjugate is not None else None

    def laplace_endpoint_finite(self, side):
        return self.conjugate.laplace_endpoint_finite(side) if self.conjugate is not None else None

    # -- numeric tables ---------------------------------------------------
    @cached_property
    def _mode(self) -> float:
        lo, hi = self.base.support
        c, s = self.base.center, self.base.scale
        j = np.arange(-30.0, 64.0, 0.25)
        xs = np.concatenate([c - s * 2.0**j, [c], c + s * 2.0**j, list(self.base.breakpoints)])
        xs = xs[(xs >= lo) & (xs <= hi)]
        g = _arr(self.logpdf(xs))
        g = np.where(np.isnan(g), -np.inf, g)
        return float(xs[int(np.argmax(g))])

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
        """Cell edges, log cumulative masses from the left and from the right,
        and the log of the table total used to normalize them."""
        lo, hi = self.base.support
        m, s = self._mode, self.base.scale
        core = m + s * np.linspace(-_CORE_HALF_WIDTH, _CORE_HALF_WIDTH, _CORE_CELLS + 1)
        peak = float(self.logpdf(m))
        outer = []
        for sign in (-1.0, 1.0):
            k = 1
            while True:
                x = m + sign * s * _CORE_HALF_WIDTH * 2.0 ** (k / 8.0)
                outer.append(x)
                if not lo <= x <= hi or float(self.logpdf(x)) < peak - _NEGLIGIBLE and k > 8:
                    break
                k += 1
        graded = [b + sgn * s * 2.0**-j for b in (*self.base.breakpoints, m)
                  for sgn in (-1.0, 1.0) for j in range(_GRADED_DEPTH)]
        edges = np.concatenate([core, outer, graded, list(self.base.breakpoints)])
        edges = np.unique(np.clip(edges, lo, hi))
        edges = edges[np.isfinite(edges)]
        log_mass = self._log_cell_mass(edges[:-1], edges[1:])
        total = logsumexp(log_mass)
        log_mass = log_mass - total
        left = np.concatenate([[-np.inf], np.logaddexp.accumulate(log_mass)])
        right = np.concatenate([np.logaddexp.accumulate(log_mass[::-1])[::-1], [-np.inf]])
        return edges, left, right, total

    def _log_cell_mass(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        nodes, weights = _quadrature.gauss_legendre(_GL_ORDER)
        half = 0.5 * (b - a)
        x = (0.5 * (a + b))[:, None] + half[:, None] * nodes[None, :]
        g = _arr(self.logpdf(x))
        g = np.where(np.isnan(g), -np.inf, g)
        with np.errstate(divide="ignore"):
            return logsumexp(g + np.log(weights)[None, :], axis=1) + np.log(half)

    def _partial(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cell index, log-mass to the left of ``x`` inside it, and to its right."""
        edges, _, _, total = self._table
        x = np.clip(x, edges[0], edges[-1])
        i = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, edges.size - 2)
        inside_left = self._log_cell_mass(edges[i], x) - total
        inside_right = self._log_cell_mass(x, edges[i + 1]) - total
        return i, inside_left, inside_right

    def numeric_logcdf(self, x):
        x = _arr(x)
        if self.discrete:
            return _out(self._lattice_logcdf(x), x)
        edges, left, _, _ = self._table
        flat = x.ravel()
        i, inside, _ = self._partial(flat)
        v = np.logaddexp(left[i], inside)
        v = np.where(flat < edges[0], -np.inf, np.where(flat >= edges[-1], 0.0, v))
        v = self._deep_tail(flat, v, lower=True)
        return _out(np.minimum(v, 0.0).reshape(x.shape), x)

    def numeric_logsf(self, x):
        x = _arr(x)
        if self.discrete:
            return _out(self._lattice_logsf(x), x)
        edges, _, right, _ = self._table
        flat = x.ravel()
        i, _, inside = self._partial(flat)
        v = np.logaddexp(right[i + 1], inside)
        v = np.where(flat < edges[0], 0.0, np.where(flat >= edges[-1], -np.inf, v))
        v = self._deep_tail(flat, v, lower=False)
        return _out(np.minimum(v, 0.0).reshape(x.shape), x)

    def _deep_tail(self, x: np.ndarray, v: np.ndarray, lower: bool) -> np.ndarray:
        """Replace tail log-probabilities beyond the table's reach by direct integration."""
        lo, hi = self.base.support
        deep = np.flatnonzero(v < _DEEP_TAIL)
        out = v.copy()
        for k in deep:
            a, b = (lo, x[k]) if lower else (x[k], hi)
            if a >= b:
                continue
            out[k] = _quadrature.log_integral(
                self.logpdf, a, b, x[k], self.base.scale, self.base.breakpoints
            )
        return out

    def numeric_cdf(self, x):
        return _out(np.exp(_arr(self.numeric_logcdf(x))), x)

    def numeric_sf(self, x):
        return _out(np.exp(_arr(self.numeric_logsf(x))), x)

    def numeric_ppf(self, u):
        """Inverse of the numeric CDF, bracketed within a table cell, to 1e-12 in probability."""
        u = _arr(u)
        if self.discrete:
            return _out(self._lattice_ppf(u), u)
        edges, left, _, total = self._table
        flat = u.ravel()
        with np.errstate(divide="ignore"):
            logu = np.log(flat)
        i = np.clip(np.searchsorted(left, logu, side="left") - 1, 0, edges.size - 2)
        a, b = edges[i].copy(), edges[i + 1].copy()
        target = flat - np.exp(left[i])
        x = 0.5 * (a + b)
        for _ in range(100):
            resid = np.exp(self._log_cell_mass(edges[i], x) - total) - target
            done = np.abs(resid) <= 1e-12 * np.maximum(flat, 1e-300) + 1e-300
            if done.all():
                break
            a = np.where(resid < 0, x, a)
            b = np.where(resid > 0, x, b)
            dens = np.exp(_arr(self.logpdf(x)))
            with np.errstate(divide="ignore", invalid="ignore"):
                newton = x - resid / dens
            inside = (newton > a) & (newton < b) & np.isfinite(newton)
            x = np.where(done, x, np.where(inside, newton, 0.5 * (a + b)))
            if np.all(done | (b - a <= 4 * np.finfo(float).eps * np.maximum(np.abs(a), np.abs(b)))):
                break
        return _out(x.reshape(u.shape), u)

    # -- discrete laws: tables over the lattice ----------------------------
    @cached_property
    def _lattice_table(self) -> tuple[float, np.ndarray, np.ndarray]:
        start, count = self.base.lattice
        size = 64
        while True:
            n = np.arange(min(size, count), dtype=float)
            g = _arr(self.logpdf(start + n))
            g = np.where(np.isnan(g), -np.inf, g)
            peak = int(np.argmax(g))
            decaying = g.size < 2 or g[-1] < g[peak] - _NEGLIGIBLE and g[-1] <= g[-2]
            if n.size >= count or decaying:
                break
            size *= 2
        total = logsumexp(g)
        g = g - total
        left = np.logaddexp.accumulate(g)
        right = np.logaddexp.accumulate(g[::-1])[::-1]
        return start, left, right

    def _lattice_index(self, x: np.ndarray) -> np.ndarray:
        start, left, _ = self._lattice_table
        return np.floor(x - start)

    def _lattice_logcdf(self, x):
        _, left, _ = self._lattice_table
        k = self._lattice_index(x)
        idx = np.clip(k, 0, left.size - 1).astype(int)
        return np.where(k < 0, -np.inf, left[idx])

    def _lattice_logsf(self, x):
        _, _, right = self._lattice_table
        k = self._lattice_index(x) + 1
        idx = np.clip(k, 0, right.size - 1).astype(int)
        return np.where(k < 0, 0.0, np.where(k >= right.size, -np.inf, right[idx]))

    def _lattice_ppf(self, u):
        start, left, _ = self._lattice_table
        cum = np.exp(left)
        idx = np.minimum(np.searchsorted(cum, u, side="left"), cum.size - 1)
        return start + idx.astype(float)


def tilt(d: DistributionSpec, theta: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> TiltedDistribution:
    """Tilt ``d`` by ``θ``; ``θ`` must lie strictly inside the convergence interval.

    Raises
    ------
    TiltOutsideInterval
        When ``θ ∉ (-S, T)`` or ``L_d(-θ)`` is not finite.
    """
    theta = float(theta)
    if theta == 0.0:
        return TiltedDistribution(d, 0.0, 0.0, d)
    ci = convergence_interval(d, tol)
    if not ci.contains(theta):
        raise TiltOutsideInterval(
            f"theta={theta:g} is outside the convergence interval (-{ci.S:g}, {ci.T:g}) of {d.family}"
        )
    log_norm = laplace_transform(d, -theta, tol=tol)
    if not log_norm.is_finite:
        raise TiltOutsideInterval(f"L(-theta) diverges at theta={theta:g} for {d.family}")
    return TiltedDistribution(d, theta, log_norm.log_value, conjugate_of(d, theta))


def tilted_density(td: TiltedDistribution, x):
    """``exp(θx - log_normalizer) * density(base, x)``."""
    return td.pdf(x)


def tilted_cdf(td: TiltedDistribution, x, use_conjugate: bool = True):
    """Tilted CDF from the conjugate family, or from the numeric table when
    ``use_conjugate`` is false or no conjugate exists."""
    if use_conjugate and td.conjugate is not None:
        return td.conjugate.cdf(x)
    return td.numeric_cdf(x)


def tilted_sample(td: TiltedDistribution, n: int, seed: int) -> np.ndarray:
    """Exact draws via the conjugate, else inverse-CDF on the numeric table."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _arr(td.ppf(uniforms(n, seed)))


def tilted_mgf(td: TiltedDistribution, t: float, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ExtendedReal:
    """``M_Z(t) = L_X(-θ-t) / L_X(-θ)`` evaluated on the base law."""
    value = laplace_transform(td.base, -td.theta - float(t), tol=tol)
    if not value.is_finite:
        return value
    return ExtendedReal(value.log_value - td.log_normalizer)


def shifted_interval(td: TiltedDistribution, tol: ToleranceConfig = DEFAULT_TOLERANCES) -> ConvergenceInterval:
    """Convergence interval of the tilted law found by bisection on ``tilted_mgf``."""
    T = bisect_boundary(lambda t: tilted_mgf(td, t, tol).is_finite, tol.interval_tol, tol.interval_cap)
    S = bisect_boundary(lambda s: tilted_mgf(td, -s, tol).is_finite, tol.interval_tol, tol.interval_cap)
    return ConvergenceInterval(S, T)
