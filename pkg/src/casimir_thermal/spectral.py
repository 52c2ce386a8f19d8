"""Real-frequency (Bose-weighted) thermal corrections and their PW/EW split.

In dimensionless variables w = 2 a omega / c, u = 2 a k_z (propagating) and
y = 2 a q (evanescent), with n(w) = 1/(exp(2 pi w / kappa) - 1):

    dP_PW = -(hbar c / 16 pi^2 a^4) int dw n(w) int_0^w du u^2 Re[1 - e^{-iu}/(r1 r2)]^{-1}
    dP_EW = +(hbar c / 16 pi^2 a^4) int dw n(w) int_0^inf dy y^2 Im[1 - e^{y}/(r1 r2)]^{-1}
    dF    =  (hbar c / 16 pi^2 a^3) int dw n(w) [int u Im ln(1 - r1 r2 e^{iu}) du
                                                 + int y Im ln(1 - r1 r2 e^{-y}) dy]

Lossless plates (|r1 r2| = 1 for propagating, real r for evanescent waves)
are evaluated in the limit of vanishing loss: the pressure kernels reduce to
delta functions at the cavity and coupled surface modes plus a constant 1/2
for propagating waves, and the free-energy kernels become piecewise smooth.
Dissipative plates are integrated directly, with sharp resonances located by
a root search and resolved by graded breakpoints.  Channels whose reflection
product is real and bounded by one for evanescent waves vanish identically
and are skipped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from .constants import C, HBAR, PI
from .materials import IdealMetal, InfraredZ, PlasmaEps, ResponseModel
from .numerics import QuadResult, QuadratureSpec, bracket_roots, integrate, resonance_breakpoints
from .reflection import real_eps_dimless, real_impedance_dimless

#: small loss that only selects the side of the lossless limit
ETA_LOSSLESS = 1e-9
#: evanescent cutoff in y = 2 a q (integrands ~ e^{-y})
Y_MAX = 60.0
#: Bose cutoff: w_max = BOSE_CUT * kappa / (2 pi)
BOSE_CUT = 45.0
_INNER = QuadratureSpec(rtol=1e-10, limit=4000)
#: dyadic breakpoints of the outer variable t (w = w_max t^3)
OUTER_POINTS = [2.0**-k for k in range(1, 21)]


@dataclass(frozen=True)
class RealAxisResult:
    dP: float
    dF: float
    te_ew: float
    te_pw: float
    tm_ew: float
    tm_pw: float
    converged: bool = True


def _ew_vanishes(model: ResponseModel, pol: str) -> bool:
    """True when r is real with |r| <= 1 for every evanescent wave below omega_p."""
    if isinstance(model, IdealMetal):
        return True
    return pol == "TE" and isinstance(model, (PlasmaEps, InfraredZ))


class FrequencySlice:
    """Response of both plates frozen at one real frequency w = 2 a omega / c.

    ``lossless`` slices (both responses free of dissipation) are evaluated
    in the limit of vanishing loss; ``eta`` then only fixes the side from
    which the limit is taken.
    """

    def __init__(self, model1, model2, w: float, a: float, T1: float, T2: Optional[float] = None,
                 eta: float = ETA_LOSSLESS):
        self.w = float(w)
        omega = w * C / (2.0 * a)
        T2 = T1 if T2 is None else T2
        self.lossless = not (model1.dissipative or model2.dissipative)
        self.resp = [self._response(model1, omega, T1), self._response(model2, omega, T2)]
        self.eta = eta

    @staticmethod
    def _response(model, omega, T):
        if isinstance(model, IdealMetal):
            return "z", 0j
        if model.uses_impedance:
            return "z", complex(model.impedance_real(omega, T))
        return "eps", complex(model.eps_real(omega, T))

    @staticmethod
    def _reflect(kind, val, w, kz):
        if kind == "z":
            return real_impedance_dimless(val, w, kz)
        return real_eps_dimless(val, w, kz)

    def pair(self, plate: int, kz, damped: bool = False):
        kind, val = self.resp[plate]
        if damped:
            val = val + self.eta if kind == "z" else val + 1j * self.eta * abs(val)
        return self._reflect(kind, val, self.w, kz)

    def rr(self, kz, pol: str, damped: bool = False):
        j = 0 if pol == "TM" else 1
        return self.pair(0, kz, damped)[j] * self.pair(1, kz, damped)[j]

    def impedances(self):
        """Z of each plate (eps plates converted by Z = 1/sqrt(eps))."""
        out = []
        for kind, val in self.resp:
            out.append(val if kind == "z" else 1.0 / np.sqrt(val))
        return out


def _pw_grid(w):
    n = max(257, int(40 * w))
    return np.unique(np.concatenate((np.linspace(0.0, w, n), w * np.geomspace(1e-8, 1.0, 40))))


def _ew_grid():
    return np.unique(np.concatenate((np.geomspace(1e-12, Y_MAX, 700), np.linspace(0.0, Y_MAX, 241)[1:])))


_EW_POINTS = [1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0, 10.0, 30.0]


def _cavity_phase(sl: FrequencySlice, pol: str, u):
    """Phase psi of r1 r2 e^{iu}; cavity modes sit at psi = 0 mod 2 pi."""
    u = np.asarray(u, float)
    return np.angle(sl.rr(u + 0j, pol) * np.exp(1j * u))


def _cavity_modes(sl: FrequencySlice, pol: str):
    """Roots u_n of psi(u) = 0 mod 2 pi on [0, w] with |r1 r2| = 1, and psi'(u_n)."""
    w = sl.w
    grid = _pw_grid(w)
    roots = []
    for r in bracket_roots(lambda u: np.sin(_cavity_phase(sl, pol, u)), grid):
        if 0.0 < r < w and np.cos(_cavity_phase(sl, pol, r)) > 0:
            rho = sl.rr(np.array([r + 0j]), pol)[0]
            if abs(abs(rho) - 1.0) < 1e-9:
                roots.append(r)
    roots = np.array(roots)
    if roots.size == 0:
        return roots, roots
    h = 1e-7 * max(w, 1e-300)
    lo = np.maximum(roots - h, 0.0)
    hi = np.minimum(roots + h, w)
    dpsi = np.angle(sl.rr(hi + 0j, pol) * np.exp(1j * hi) / (sl.rr(lo + 0j, pol) * np.exp(1j * lo)))
    return roots, dpsi / (hi - lo)


def _surface_modes(sl: FrequencySlice, pol: str):
    """Roots y_n > 0 of r1 r2 e^{-y} = 1 for real x.

    Returns (roots, x'(roots), loss-side sign of Im x at the roots, poles).
    Poles are located plate by plate as zeros of 1/r, since x = r^2 has
    double poles for identical plates.
    """
    j = 0 if pol == "TM" else 1

    def xr(y):
        y = np.asarray(y, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.real(sl.rr(1j * y, pol) * np.exp(-y))

    grid = _ew_grid()
    roots = [r for r in bracket_roots(lambda y: xr(y) - 1.0, grid)
             if abs(xr(np.array([r]))[0] - 1.0) < 1e-6]
    poles = []
    for plate in (0, 1):
        def inv(y, plate=plate):
            with np.errstate(divide="ignore", invalid="ignore"):
                v = np.real(1.0 / sl.pair(plate, 1j * np.asarray(y, float))[j])
            return np.where(np.isnan(v), 0.0, v)  # r = inf/inf exactly at a pole
        poles += [r for r in bracket_roots(inv, grid) if abs(inv(np.array([r]))[0]) < 1e-6]
    roots = np.array([r for r in roots if r > 0])
    if roots.size == 0:
        return roots, roots, roots, poles
    h = 1e-7 * np.maximum(roots, 1e-6)
    dx = (xr(roots + h) - xr(roots - h)) / (2 * h)
    side = np.sign(np.imag(sl.rr(1j * roots, pol, damped=True)))
    return roots, dx, side, poles


def _inner_pw(sl: FrequencySlice, pol: str, free_energy: bool = True, w_max: float = 1.0):
    # absolute tolerances scale with the outer range: near w = 0 the Bose
    # weight is ~1/w while rounding limits 1 - r r e^{-iu} to ~1e-16 relative
    w = sl.w
    if sl.lossless:
        roots, dpsi = _cavity_modes(sl, pol)
        pts = sorted(set(roots) | {w * p for p in (1e-4, 1e-2, 0.1, 0.5)})
    else:
        def D(u):
            u = np.asarray(u, float)
            return 1.0 - np.exp(-1j * u) / sl.rr(u + 0j, pol)

        _, pts = resonance_breakpoints(D, _pw_grid(w), 0.0, w)
        pts = sorted(set(pts) | {w * p for p in (1e-4, 1e-2, 0.1, 0.5)})

    # isolated nodes may land on a mode or a pole of r; both are removable
    def fp(u):
        rr = sl.rr(u + 0j, pol)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.real(rr / (rr - np.exp(-1j * u)))
        if sl.lossless:
            # |r1 r2| = 1: the kernel is 1/2 away from the modes
            v = np.where(np.abs(np.abs(rr) - 1.0) < 1e-9, 0.5, v)
        v = u * u * v
        return np.where(np.isfinite(v), v, 0.0)

    spec = QuadratureSpec(_INNER.rtol, 1e-11 * w * w_max * w_max, _INNER.limit)
    p = integrate(fp, 0.0, w, spec, points=pts)
    if sl.lossless and roots.size:
        # each mode is the loss -> 0 limit of a Lorentzian of weight -pi
        p = QuadResult(p.value - PI * float(np.sum(roots**2 / np.abs(dpsi))), p.error,
                       p.converged, p.neval)
    if not free_energy:
        return p, None

    def ff(u):
        rr = sl.rr(u + 0j, pol)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = u * np.angle(1.0 - rr * np.exp(1j * u))
        return np.where(np.isfinite(v), v, 0.0)

    f = integrate(ff, 0.0, w, QuadratureSpec(_INNER.rtol, 1e-11 * w * w_max, _INNER.limit), points=pts)
    return p, f


def _inner_ew(sl: FrequencySlice, pol: str, free_energy: bool = True):
    def x_of(y, damped=False):
        y = np.asarray(y, float)
        return sl.rr(1j * y, pol, damped) * np.exp(-y)

    if sl.lossless:
        roots, dx, side, poles = _surface_modes(sl, pol)
        pts = sorted(set(roots) | set(poles) | set(_EW_POINTS))
    else:
        _, pts = resonance_breakpoints(lambda y: 1.0 - x_of(y), _ew_grid(), 0.0, Y_MAX)
        pts = sorted(set(pts) | set(_EW_POINTS))

    # resonant EW integrands are rounding limited near 1e-8 relative
    spec = QuadratureSpec(1e-8, 1e-12, _INNER.limit)
    if sl.lossless:
        # x is real: only the surface modes contribute, as delta functions
        val = -PI * float(np.sum(side * roots**2 / np.abs(dx))) if roots.size else 0.0
        p = QuadResult(val, 0.0, True, 0)
    else:
        def fp(y):
            x = x_of(y)
            with np.errstate(divide="ignore", invalid="ignore"):
                v = y * y * np.imag(-x / (1.0 - x))
            return np.where(np.isfinite(v), v, 0.0)

        p = integrate(fp, 0.0, Y_MAX, spec, points=pts)
    if not free_energy:
        return p, None

    if sl.lossless:
        # Im ln(1 - x) is -pi sgn(Im x) where x > 1 and zero elsewhere,
        # so the y integral is elementary between roots and poles
        edges = np.unique(np.concatenate(([0.0, Y_MAX], roots, poles)))
        mid = 0.5 * (edges[:-1] + edges[1:])
        x = x_of(mid, damped=True)
        step = np.where(np.real(x) > 1.0, -PI * np.sign(np.imag(x)), 0.0)
        val = float(np.sum(step * 0.5 * (edges[1:] ** 2 - edges[:-1] ** 2)))
        return p, QuadResult(val, 0.0, True, 0)

    def ff(y):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = y * np.imag(np.log(1.0 - x_of(y)))
        return np.where(np.isfinite(v), v, 0.0)

    f = integrate(ff, 0.0, Y_MAX, spec, points=pts)
    return p, f


def _bose(w, kappa):
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(2.0 * PI * w / kappa)


def thermal_correction_real(geom, rtol: float = 1e-7, eta: Optional[float] = None,
                            free_energy: bool = True) -> RealAxisResult:
    """Real-axis dP (with channels) and dF for a :class:`~casimir_thermal.lifshitz.Geometry`."""
    m1, m2 = geom.model1, geom.model2
    a, T = geom.a, geom.T
    kap = geom.kappa
    eta = ETA_LOSSLESS if eta is None else eta
    skip = {pol: _ew_vanishes(m1, pol) and _ew_vanishes(m2, pol) for pol in ("TE", "TM")}
    W = BOSE_CUT * kap / (2.0 * PI)
    flags = []

    def inner(w):
        sl = FrequencySlice(m1, m2, w, a, T, eta=eta)
        out = np.zeros(8)
        for j, pol in enumerate(("TE", "TM")):
            p, f = _inner_pw(sl, pol, free_energy, W)
            out[j] = p.value
            out[4 + j] = f.value if f is not None else 0.0
            flags.append(p.converged and (f is None or f.converged))
            if not skip[pol]:
                p, f = _inner_ew(sl, pol, free_energy)
                out[2 + j] = p.value
                out[6 + j] = f.value if f is not None else 0.0
                flags.append(p.converged and (f is None or f.converged))
        return out

    # w = W t^3 tames the integrable w^(-2/3) behaviour of Drude-like TE EW
    def outer(t):
        w = W * t**3
        return 3.0 * W * t * t * _bose(w, kap) * inner(w)

    vals, err = quad_vec(outer, 0.0, 1.0, epsrel=rtol, epsabs=0.0, norm="max", limit=2000,
                         points=OUTER_POINTS)
    pref = HBAR * C / (16.0 * PI**2 * a**4)
    te_pw, tm_pw = -pref * vals[0], -pref * vals[1]
    te_ew, tm_ew = pref * vals[2], pref * vals[3]
    dF = HBAR * C / (16.0 * PI**2 * a**3) * float(vals[4:].sum())
    dP = te_pw + tm_pw + te_ew + tm_ew
    converged = all(flags) and err <= 10 * rtol * np.max(np.abs(vals))
    return RealAxisResult(float(dP), dF, float(te_ew), float(te_pw), float(tm_ew), float(tm_pw), converged)
