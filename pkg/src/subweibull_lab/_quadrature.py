"""Log-space integration and summation with divergence detection.

Every exponential-moment question in the package reduces to deciding whether
``log ∫ exp(g(x)) dx`` (or the lattice analogue) is finite, and evaluating it
when it is.  The routines here work entirely in log-space:

* a vectorized adaptive Gauss-Kronrod (G10/K21) integrator for bounded pieces;
* a sentinel scan on a dyadic grid reaching ``scale * 2**window_cap`` that
  locates the integrand mode and tests the far-tail trend;
* dyadic windows around the mode, integrated until the log-increment and the
  remaining-tail estimate both drop below ``log_increment``.

The log-integrand may return ``-inf`` (outside the support or underflow) and
``nan`` (``inf - inf`` after overflow far out); ``nan`` values are ignored by
the scan and contribute zero mass.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp

LogFn = Callable[[np.ndarray], np.ndarray]

# QUADPACK qk21 abscissae / weights on [-1, 1] (positive half, descending).
_XGK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478210, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[1:10:2] = _WG
GAUSS_WEIGHTS[11:20:2] = _WG[::-1]

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

# exponents of the dyadic sentinel grid below the window scale
_SENTINEL_MIN_EXP = -30
_SENTINELS_PER_OCTAVE = 4
# log of the sentinel cell width relative to its offset: 2**(1/4) - 1
_LOG_CELL = math.log(2.0 ** (1.0 / _SENTINELS_PER_OCTAVE) - 1.0)
_FIRST_WINDOW = 4
_NEGLIGIBLE = 50.0
_GRADED_DEPTH = 52
_SHIFT_RETRIES = 4
_SHIFT_STEP = 600.0
# beyond this magnitude rounding noise in the log-integrand spans hundreds of nats
_NOISY_LOG = 1e16
_RIEMANN_POINTS = 4097


@lru_cache(maxsize=8)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _gk21(f: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * KRONROD_NODES[None, :]
    # nan (inf - inf after overflow far out) contributes zero mass
    with np.errstate(all="ignore"):
        fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
        fx = np.where(np.isnan(fx), 0.0, fx)
        resk = h * (fx @ KRONROD_WEIGHTS)
        resg = h * (fx @ GAUSS_WEIGHTS)
        resabs = np.abs(h) * (np.abs(fx) @ KRONROD_WEIGHTS)
        mean = np.where(h != 0, resk / np.where(h != 0, 2.0 * h, 1.0), 0.0)
        resasc = np.abs(h) * (np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS)
        err = np.abs(resk - resg)
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > _TINY / (50.0 * _EPS), np.maximum(floor, err), err)
    return resk, err


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    points: Iterable[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    limit: int = 4000,
) -> tuple[float, float]:
    """Adaptive G10/K21 quadrature of a vectorized ``f`` over ``[min(points), max(points)]``.

    ``points`` are initial breakpoints; the integrand is never evaluated at
    them.  All intervals whose error exceeds their share of the tolerance are
    bisected together, so each round is a single vectorized call.
    """
    pts = np.unique(np.asarray(list(points), dtype=float))
    a, b = pts[:-1], pts[1:]
    if a.size == 0:
        return 0.0, 0.0
    vals, errs = _gk21(f, a, b)
    while True:
        total = float(vals.sum())
        err = float(errs.sum())
        tol = max(abs_tol, rel_tol * abs(total))
        if not math.isfinite(total) or err <= tol or a.size >= limit:
            return total, err
        mid = 0.5 * (a + b)
        sel = (errs > tol / errs.size) & (mid > a) & (mid < b)
        if not sel.any():
            return total, err
        keep = ~sel
        na = np.concatenate([a[sel], mid[sel]])
        nb = np.concatenate([mid[sel], b[sel]])
        nv, ne = _gk21(f, na, nb)
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])


def _eval(logf: LogFn, x: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        return np.asarray(logf(np.asarray(x, dtype=float)), dtype=float)


def _tail_diverges(mass: np.ndarray, run: int) -> bool:
    """Far-tail trend test on outward-ordered per-cell log-masses."""
    mass = mass[~np.isnan(mass)]
    if mass.size < run:
        return bool(mass.size and mass[-1] == np.inf)
    tail = mass[-run:]
    if np.any(tail == np.inf):
        return True
    if np.any(tail == -np.inf):
        return False
    return bool(np.all(np.diff(tail) >= 0.0))


def _log_gk(logf: LogFn, points: Iterable[float], shift: float, rel_tol: float) -> float:
    points = list(points)
    if abs(shift) > _NOISY_LOG:
        return _log_riemann(logf, points)
    # Overflow on a bounded window means the shift sat below the true peak
    # (a missed spike, or rounding in logs of order 1e18), not divergence.
    for _ in range(_SHIFT_RETRIES):
        def f(x, shift=shift):
            return np.exp(logf(x) - shift)

        val, _ = integrate(f, points, rel_tol=rel_tol, abs_tol=1e-300)
        if val == np.inf:
            shift += _SHIFT_STEP
            continue
        if not (val >= 0.0):
            return math.inf
        if val == 0.0:
            return -math.inf
        return shift + math.log(val)
    return math.inf


def _log_riemann(logf: LogFn, points: list[float]) -> float:
    """Trapezoid rule in log-space; shifts by the evaluated maximum so noise cannot overflow."""
    a, b = min(points), max(points)
    x = np.linspace(a, b, _RIEMANN_POINTS)
    g = _eval(logf, x)
    g = np.where(np.isnan(g), -np.inf, g)
    w = np.full(x.size, math.log(x[1] - x[0]))
    w[[0, -1]] -= math.log(2.0)
    return float(logsumexp(g + w))


def _refine_mode(logf: LogFn, xs: np.ndarray, gs: np.ndarray) -> tuple[float, float]:
    finite = np.where(np.isfinite(gs), gs, -np.inf)
    i = int(np.argmax(finite))
    x0, g0 = float(xs[i]), float(finite[i])
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, xs.size - 1)])
    if hi > lo:
        res = minimize_scalar(
            lambda x: -float(_eval(logf, np.array([x]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(x0))},
        )
        gx = -float(res.fun)
        if math.isfinite(gx) and gx > g0:
            return float(res.x), gx
    return x0, g0


def log_integral(
    logf: LogFn,
    lo: float,
    hi: float,
    center: float,
    scale: float,
    breakpoints: Iterable[float] = (),
    *,
    rel_tol: float = 1e-10,
    window_cap: int = 1000,
    log_increment: float = 1e-10,
    trend_run: int = 50,
) -> float:
    """``log ∫_lo^hi exp(logf(x)) dx``, or ``inf`` when the integral diverges.

    Divergence is declared when the per-cell log-mass on the outermost
    ``trend_run`` sentinels of an unbounded side is nondecreasing (or
    overflows), or when the dyadic windows reach ``scale * 2**window_cap``
    without the tail becoming negligible.
    """
    offsets = scale * np.exp2(
        np.arange(_SENTINEL_MIN_EXP, window_cap + 1e-9, 1.0 / _SENTINELS_PER_OCTAVE)
    )
    offsets = offsets[offsets < 1e306]
    bps = [float(p) for p in breakpoints if lo < p < hi]

    sides = {}
    for sign, bound in ((1.0, hi), (-1.0, lo)):
        xs = center + sign * offsets
        inside = (xs < hi) & (xs > lo) if sign > 0 else (xs > lo) & (xs < hi)
        xs, offs = xs[inside], offsets[inside]
        gs = _eval(logf, xs)
        if not math.isfinite(bound) and _tail_diverges(gs + np.log(offs), trend_run):
            return math.inf
        sides[sign] = (xs, offs, gs)

    extra = [center] + bps + [p for p in (lo, hi) if math.isfinite(p)]
    extra = np.array([p for p in extra if lo <= p <= hi], dtype=float)
    allx = np.concatenate([sides[-1.0][0], extra, sides[1.0][0]])
    allg = np.concatenate([sides[-1.0][2], _eval(logf, extra), sides[1.0][2]])
    order = np.argsort(allx)
    allx, allg = allx[order], allg[order]
    allg = np.where(allg == np.inf, np.nan, allg)
    if not np.any(np.isfinite(allg)):
        return -math.inf
    mode, gmax = _refine_mode(logf, allx, allg)

    def window(a, b):
        a, b = max(a, lo), min(b, hi)
        return (a, b) if b > a else None

    half = scale * 2.0**_FIRST_WINDOW
    a0, b0 = max(mode - half, lo), min(mode + half, hi)
    graded = mode + np.concatenate([scale * np.exp2(-np.arange(_GRADED_DEPTH)), [0.0]])[:, None] * [-1.0, 1.0]
    pts = [a0, b0, mode] + [p for p in graded.ravel() if a0 < p < b0] + [p for p in bps if a0 < p < b0]
    total = _log_gk(logf, pts, gmax, rel_tol)
    if total == math.inf:
        return math.inf

    done = {1.0: b0 >= hi, -1.0: a0 <= lo}
    edges = {1.0: b0, -1.0: a0}
    log_tol = math.log(log_increment)
    for k in range(_FIRST_WINDOW + 1, window_cap + 1):
        if done[1.0] and done[-1.0]:
            return total
        for sign in (1.0, -1.0):
            if done[sign]:
                continue
            outer = mode + sign * scale * 2.0**k
            if not math.isfinite(outer):
                outer = hi if sign > 0 else lo
            w = window(edges[sign], outer) if sign > 0 else window(outer, edges[sign])
            if w is None:
                done[sign] = True
                continue
            a, b = w
            probe = np.linspace(a, b, 33)
            gp = _eval(logf, probe)
            gp = gp[np.isfinite(gp)]
            block = -math.inf
            if gp.size:
                shift = float(gp.max())
                if shift + math.log(b - a) > total - _NEGLIGIBLE:
                    inner = [a, b] + [p for p in bps if a < p < b]
                    block = _log_gk(logf, inner, shift, rel_tol)
                    if block == math.inf:
                        return math.inf
            new_total = float(np.logaddexp(total, block))
            increment = new_total - total
            total = new_total
            edges[sign] = b if sign > 0 else a
            xs, offs, gs = sides[sign]
            beyond = (xs > b) if sign > 0 else (xs < a)
            tail = gs[beyond] + np.log(offs[beyond]) + _LOG_CELL
            tail = tail[~np.isnan(tail)]
            tail_log = float(logsumexp(tail)) if tail.size else -math.inf
            reached = (b >= hi) if sign > 0 else (a <= lo)
            if reached or (increment < log_increment and tail_log < total + log_tol):
                done[sign] = True
    if done[1.0] and done[-1.0]:
        return total
    return math.inf


def log_lattice_sum(
    logf: LogFn,
    start: float,
    count: float,
    *,
    window_cap: int = 1000,
    log_increment: float = 1e-10,
    trend_run: int = 50,
    exact_block: int = 2**20,
) -> float:
    """``log Σ_{n=0}^{count-1} exp(logf(start + n))``, or ``inf`` on divergence.

    Blocks larger than ``exact_block`` terms are estimated from the sentinel
    grid instead of summed term by term; they only arise for mass located
    beyond a million lattice steps from the mode.
    """
    if count <= exact_block:
        n = np.arange(int(count), dtype=float)
        g = _eval(logf, start + n)
        g = np.where(np.isnan(g), -np.inf, g)
        return float(logsumexp(g)) if g.size else -math.inf

    far = np.floor(np.exp2(np.arange(6, window_cap + 1e-9, 1.0 / _SENTINELS_PER_OCTAVE)))
    ns = np.unique(np.concatenate([np.arange(64, dtype=float), far[far < 1e306]]))
    ns = ns[ns < count]
    gs = _eval(logf, start + ns)
    with np.errstate(divide="ignore"):
        cell = np.log(np.maximum(ns * (2.0 ** (1.0 / _SENTINELS_PER_OCTAVE) - 1.0), 1.0))
    if math.isinf(count) and _tail_diverges((gs + cell)[64:], trend_run):
        return math.inf
    finite = np.where(np.isfinite(gs), gs, -np.inf)
    if not np.any(np.isfinite(finite)):
        return -math.inf
    mode = float(ns[int(np.argmax(finite))])
    last = count - 1

    def block_sum(a: float, b: float) -> float:
        if b - a + 1 <= exact_block:
            n = np.arange(a, b + 1, dtype=float)
            g = _eval(logf, start + n)
            g = np.where(np.isnan(g), -np.inf, g)
            return float(logsumexp(g))
        inside = (ns >= a) & (ns <= b)
        g = gs[inside] + cell[inside]
        g = g[~np.isnan(g)]
        return float(logsumexp(g)) if g.size else -math.inf

    a0, b0 = max(0.0, mode - 32), min(last, mode + 32)
    total = block_sum(a0, b0)
    edges = {1.0: b0, -1.0: a0}
    done = {1.0: b0 >= last, -1.0: a0 <= 0}
    log_tol = math.log(log_increment)
    for k in range(6, window_cap + 1):
        if done[1.0] and done[-1.0]:
            return total
        for sign in (1.0, -1.0):
            if done[sign]:
                continue
            if sign > 0:
                a, b = edges[1.0] + 1, min(last, mode + 2.0**k)
            else:
                a, b = max(0.0, mode - 2.0**k), edges[-1.0] - 1
            if b < a:
                done[sign] = True
                continue
            block = block_sum(a, b)
            if block == math.inf:
                return math.inf
            new_total = float(np.logaddexp(total, block))
            increment = new_total - total
            total = new_total
            edges[sign] = b if sign > 0 else a
            beyond = (ns > b) if sign > 0 else (ns < a)
            tail = (gs + cell)[beyond]
            tail = tail[~np.isnan(tail)]
            tail_log = float(logsumexp(tail)) if tail.size else -math.inf
            reached = (b >= last) if sign > 0 else (a <= 0)
            if reached or (increment < log_increment and tail_log < total + log_tol):
                done[sign] = True
    if done[1.0] and done[-1.0]:
        return total
    return math.inf
