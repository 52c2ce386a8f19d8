"""Quadrature, Matsubara summation and small special functions.

The adaptive integrator is a Gauss-Kronrod (10/21) scheme that evaluates
all pending panels in one vectorized call of the integrand, which keeps
Python overhead low for the nested integrals of the real-frequency
formulation.  Error control follows the usual QUADPACK heuristics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import bernoulli, spence

from .constants import ZETA3

# Kronrod 21-point abscissae on [-1, 1] (descending); odd entries are the
# 10-point Gauss nodes.
_XK = np.array([
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0,
    -0.148874338981631210884826001129720, -0.294392862701460198131126603103866,
    -0.433395394129247190799265943165784, -0.562757134668604683339000099272694,
    -0.679409568299024406234327365114874, -0.780817726586416897063717578345042,
    -0.865063366688984510732096688423493, -0.930157491355708226001207180059508,
    -0.973906528517171720077964012084452, -0.995657163025808080735527280689003])
_WG = np.array([
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338, 0.295524224714752870173892994651338,
    0.269266719309996355091226921569469, 0.219086362515982043995534934228163,
    0.149451349150580593145776339657697, 0.066671344308688137593568809893332])
_WK = np.array([
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
    0.147739104901338491374841515972068, 0.142775938577060080797094273138717,
    0.134709217311473325928054001771707, 0.123491976262065851077958109831074,
    0.109387158802297641899210590325805, 0.093125454583697605535065465083366,
    0.075039674810919952767043140916190, 0.054755896574351996031381300244580,
    0.032558162307964727478818972459390, 0.011694638867371874278064396062192])
_EPS = np.finfo(float).eps


class ConvergenceError(RuntimeError):
    """Raised when a quadrature or a series fails to meet its tolerance."""


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rtol: float = 1e-8
    atol: float = 0.0
    limit: int = 2000
    points: Sequence[float] = field(default_factory=tuple)
    strict: bool = False

    def __post_init__(self):
        if not self.rtol > 0 or self.atol < 0:
            raise ValueError("tolerances must be positive")
        if list(self.points) != sorted(self.points):
            raise ValueError("breakpoints must be sorted")


@dataclass(frozen=True)
class SumSpec:
    rtol: float = 1e-10
    lmax: int = 100_000
    strict: bool = False

    def __post_init__(self):
        if not self.rtol > 0:
            raise ValueError("tolerance must be positive")


class QuadResult(NamedTuple):
    value: float
    error: float
    converged: bool
    neval: int


class SumResult(NamedTuple):
    value: float
    nterms: int
    converged: bool


class Derivative(NamedTuple):
    value: float
    error: float


def _gk_panels(f, lo, hi):
    """Apply GK21 on many panels at once; returns (kronrod, error, resabs)."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = c[:, None] + h[:, None] * _XK[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise ConvergenceError("integrand returned non-finite values")
    k = h * (fx @ _WK)
    g = h * (fx[:, 1::2] @ _WG)
    resabs = np.abs(h) * (np.abs(fx) @ _WK)
    mean = k / np.where(h == 0, 1.0, 2.0 * h)
    resasc = np.abs(h) * (np.abs(fx - mean[:, None]) @ _WK)
    err = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPS * resabs
    err = np.where(resabs > np.finfo(float).tiny / (50 * _EPS), np.maximum(err, floor), err)
    return k, err


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              spec: Optional[QuadratureSpec] = None, points: Optional[Sequence[float]] = None) -> QuadResult:
    """Adaptive GK21 integral of a vectorized real function over [a, b].

    ``points`` (or ``spec.points``) are interior breakpoints, e.g. the
    locations of narrow resonances.  The result carries a convergence flag;
    with ``spec.strict`` a failure raises :class:`ConvergenceError`.
    """
    spec = spec or QuadratureSpec()
    if a == b:
        return QuadResult(0.0, 0.0, True, 0)
    if b < a:
        r = integrate(f, b, a, spec, points)
        return QuadResult(-r.value, r.error, r.converged, r.neval)
    pts = list(spec.points) + ([] if points is None else [float(p) for p in points])
    edges = np.unique(np.concatenate(([a], [p for p in pts if a < p < b], [b])))
    lo, hi = edges[:-1], edges[1:]
    val, err = _gk_panels(f, lo, hi)
    neval = 21 * lo.size
    span = b - a
    while True:
        total = float(np.sum(val))
        toterr = float(np.sum(err))
        allowed = max(spec.atol, spec.rtol * abs(total))
        if toterr <= allowed:
            return QuadResult(total, toterr, True, neval)
        if lo.size >= spec.limit:
            break
        width = hi - lo
        split = (err > allowed * width / span) | (err >= 0.5 * err.max())
        split &= width > 64 * _EPS * np.maximum(np.abs(lo), np.abs(hi))
        if not np.any(split):
            break
        keep = ~split
        mid = 0.5 * (lo[split] + hi[split])
        nlo = np.concatenate((lo[split], mid))
        nhi = np.concatenate((mid, hi[split]))
        nval, nerr = _gk_panels(f, nlo, nhi)
        neval += 21 * nlo.size
        lo = np.concatenate((lo[keep], nlo))
        hi = np.concatenate((hi[keep], nhi))
        val = np.concatenate((val[keep], nval))
        err = np.concatenate((err[keep], nerr))
    res = QuadResult(float(np.sum(val)), float(np.sum(err)), False, neval)
    if spec.strict:
        raise ConvergenceError(f"quadrature did not converge: {res.value:.6g} +- {res.error:.2g}")
    return res


def integrate_semi_infinite(f: Callable[[np.ndarray], np.ndarray], spec: Optional[QuadratureSpec] = None,
                            a: float = 0.0, scale: float = 1.0, L: Optional[float] = None) -> QuadResult:
    """Integral over [a, inf): adaptive panels on [a, a+L] plus a mapped tail.

    ``scale`` is the decay length of the integrand; by default L = 40*scale.
    Beyond L the substitution x = a + L + scale * t/(1-t) maps the tail to [0, 1).
    """
    spec = spec or QuadratureSpec()
    L = 40.0 * scale if L is None else L
    head = integrate(f, a, a + L, spec)

    def tail(t):
        s = 1.0 - t
        return f(a + L + scale * t / s) * scale / s**2

    with np.errstate(over="ignore", under="ignore"):
        rest = integrate(tail, 0.0, 1.0, QuadratureSpec(spec.rtol, max(spec.atol, spec.rtol * abs(head.value)),
                                                        spec.limit))
    res = QuadResult(head.value + rest.value, head.error + rest.error,
                     head.converged and rest.converged, head.neval + rest.neval)
    if spec.strict and not res.converged:
        raise ConvergenceError("semi-infinite quadrature did not converge")
    return res


def gauss_legendre(edges: Sequence[float], n: int = 16):
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    x, w = leggauss(n)
    e = np.asarray(edges, float)
    lo, hi = e[:-1], e[1:]
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    return (c[:, None] + h[:, None] * x).ravel(), (h[:, None] * w).ravel()


def graded_edges(first: float, stop: float, lower: float = 0.0, ratio: float = 2.0) -> np.ndarray:
    """Panel edges lower, lower+first, lower+first*ratio, ... up to ``stop``."""
    edges = [lower]
    h = first
    while edges[-1] + h < stop:
        edges.append(edges[-1] + h)
        h *= ratio
    edges.append(stop)
    return np.array(edges)


def matsubara_sum(term: Callable[[np.ndarray], np.ndarray], spec: Optional[SumSpec] = None,
                  block: int = 64, lmax: Optional[int] = None) -> SumResult:
    """Primed sum over l >= 0 with weight 1/2 on l = 0.

    ``term`` is evaluated on integer arrays, block by block.  The sum stops
    when the tail estimated from the last terms falls below rtol*|sum|.
    With ``lmax`` the sum is taken exactly over 0..lmax (the caller vouches
    for the neglected tail), which keeps the result smooth in parameters.
    """
    spec = spec or SumSpec()
    if lmax is not None:
        if lmax > spec.lmax:
            raise ConvergenceError(f"requested {lmax} terms exceeds cap {spec.lmax}")
        total = 0.0
        for start in range(0, lmax + 1, max(block, 1024)):
            ls = np.arange(start, min(start + max(block, 1024), lmax + 1))
            t = np.asarray(term(ls), float)
            if start == 0:
                t = t.copy()
                t[0] *= 0.5
            total += float(np.sum(t))
        return SumResult(total, lmax + 1, True)
    total = 0.0
    start = 0
    while start <= spec.lmax:
        ls = np.arange(start, min(start + block, spec.lmax + 1))
        t = np.asarray(term(ls), float)
        if start == 0:
            t = t.copy()
            t[0] *= 0.5
        total += float(np.sum(t))
        start += ls.size
        last, prev = abs(t[-1]), abs(t[-2]) if t.size > 1 else math.inf
        ratio = last / prev if prev > 0 else 0.0
        tail = last * ratio / (1.0 - ratio) if ratio < 1 else math.inf
        if tail <= spec.rtol * abs(total) and last <= spec.rtol * abs(total) or (last == 0 and prev == 0):
            return SumResult(total, start, True)
        block = min(2 * block, 8192)
    if spec.strict:
        raise ConvergenceError(f"Matsubara sum not converged after {spec.lmax} terms")
    return SumResult(total, start, False)


def abel_plana_correction(F: Callable[[np.ndarray], np.ndarray], kappa: float = 1.0,
                          spec: Optional[QuadratureSpec] = None) -> float:
    """i * int_0^inf [F(i kappa t) - F(-i kappa t)] / (e^{2 pi t} - 1) dt.

    With this term, sum'_{l>=0} F(kappa l) = (1/kappa) int_0^inf F + correction.
    ``F`` must accept complex arrays.
    """
    spec = spec or QuadratureSpec(rtol=1e-11)

    def g(t):
        t = np.asarray(t, float)
        d = np.asarray(F(1j * kappa * t), complex) - np.asarray(F(-1j * kappa * t), complex)
        with np.errstate(over="ignore"):
            return np.real(1j * d) / np.expm1(2.0 * math.pi * t)

    res = integrate_semi_infinite(g, spec, scale=1.0 / (2.0 * math.pi), L=8.0)
    if not res.converged:
        raise ConvergenceError("Abel-Plana correction did not converge")
    return res.value


def ddT(f: Callable[[float], float], T: float, h0: Optional[float] = None) -> Derivative:
    """Central-difference derivative with one Richardson step.

    The default step is max(1e-3*T, 0.01).  The error estimate is the size
    of the Richardson correction.
    """
    h = max(1e-3 * T, 0.01) if h0 is None else h0
    if not h > 0:
        raise DomainError("step must be positive")
    if T - 2.0 * h <= 0:
        raise DomainError(f"T={T} too small for step {h}")
    d1 = (f(T + h) - f(T - h)) / (2.0 * h)
    d2 = (f(T + 0.5 * h) - f(T - 0.5 * h)) / h
    value = d2 + (d2 - d1) / 3.0
    return Derivative(value, abs(d2 - d1) / 3.0)


# zeta(-m) = (-1)^m B_{m+1}/(m+1), with B_1 = -1/2
_B = bernoulli(40)
_ZETA_NEG = [(-1) ** m * _B[m + 1] / (m + 1) for m in range(36)]


def _li3_log_series(mu: float) -> float:
    # Li_3(e^mu) = zeta(3) + zeta(2) mu + mu^2/2 (3/2 - ln(-mu)) + sum_{k>=3} zeta(3-k) mu^k/k!
    s = ZETA3 + (math.pi**2 / 6.0) * mu + 0.5 * mu * mu * (1.5 - math.log(-mu))
    term = mu * mu / 2.0
    for k in range(3, 36):
        term *= mu / k
        c = _ZETA_NEG[k - 3]
        if c:
            s += c * term
            if abs(c * term) < 1e-18 * abs(s):
                break
    return s


def _li3_series(x: float) -> float:
    s, p, k = 0.0, x, 1
    while True:
        t = p / k**3
        s += t
        if t <= 1e-18 * s:
            return s
        k += 1
        p *= x


def polylog(n: int, x):
    """Li_n(x) for n in {2, 3} and 0 <= x <= 1 (scalar or array)."""
    if n not in (2, 3):
        raise ValueError("only n = 2 and n = 3 are supported")
    xa = np.asarray(x, float)
    if np.any((xa < 0) | (xa > 1)):
        raise DomainError("polylog argument must lie in [0, 1]")
    if n == 2:
        out = spence(1.0 - xa)
        return float(out) if out.ndim == 0 else out

    def li3(v):
        if v == 0:
            return 0.0
        if v == 1:
            return ZETA3
        if v <= 0.5:
            return _li3_series(v)
        return _li3_log_series(math.log(v))

    out = np.vectorize(li3, otypes=[float])(xa)
    return float(out) if out.ndim == 0 else out


def bracket_roots(g: Callable[[np.ndarray], np.ndarray], grid: np.ndarray, xtol: float = 0.0) -> np.ndarray:
    """Refine every sign change of a real function sampled on ``grid``."""
    v = np.asarray(g(grid), float)
    idx = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]
    # grid points that are exact zeros would be missed by the sign test
    roots = [float(x) for x in np.asarray(grid)[v == 0.0]]
    for i in idx:
        lo, hi = grid[i], grid[i + 1]
        try:
            roots.append(brentq(lambda t: float(g(np.array([t]))[0]), lo, hi,
                                xtol=max(xtol, 4 * _EPS * abs(hi)), rtol=4 * _EPS))
        except ValueError:
            continue
    return np.array(sorted(roots))


def resonance_breakpoints(D: Callable[[np.ndarray], np.ndarray], grid: np.ndarray,
                          lo: float, hi: float, levels: int = 12, threshold: float = 0.2):
    """Locate near-zeros of a complex dispersion function and return breakpoints.

    Candidates are sign changes of Re D and of Im D on ``grid``; a root
    is kept when |D| there is below ``threshold``.  Around each kept root x0
    breakpoints are placed at x0 +- h*2^k, where h is the Lorentzian
    half-width |Im D / (d Re D/dx)|, so that GK panels resolve the peak.
    Returns (roots, breakpoints).
    """
    roots = []
    for part in (np.real, np.imag):
        for r in bracket_roots(lambda t: part(D(t)), grid):
            if abs(D(np.array([r]))[0]) < threshold:
                roots.append(r)
    roots = np.unique(np.round(np.array(roots), 14)) if roots else np.array([])
    pts = []
    for r in roots:
        dx = 1e-7 * max(abs(r), 1e-3)
        d1 = (D(np.array([r + dx]))[0] - D(np.array([r - dx]))[0]) / (2 * dx)
        width = abs(D(np.array([r]))[0]) / max(abs(d1), 1e-300)
        width = max(width, 1e-14 * max(abs(r), 1.0))
        pts.append(r)
        for k in range(levels):
            off = width * 4.0**k
            pts.extend((r - off, r + off))
    pts = np.array([p for p in pts if lo < p < hi])
    return roots, np.unique(pts)
