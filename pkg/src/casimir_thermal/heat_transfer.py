"""Radiative heat transfer between two plates, Kirchhoff flux and emittivity.

Dimensionless variables use the gap: w = 2 a omega / c, u = 2 a k_z for
propagating waves (PW) and y = 2 a |k_z| for evanescent waves (EW).  With
dn = n(omega, T1) - n(omega, T2),

    S_PW = hbar c^2/(4 pi^2 (2a)^4) int dw w dn int_0^w du u
           sum_pol (1-|r1|^2)(1-|r2|^2)/|1 - r1 r2 e^{iu}|^2
    S_EW = hbar c^2/(pi^2 (2a)^4) int dw w dn int_0^inf dy y
           sum_pol Im r1 Im r2 e^{-y}/|1 - r1 r2 e^{-y}|^2

The impedance route writes the same flux through Re Z1 Re Z2 and the
denominators B_TE, B_TM; with impedance reflection coefficients the two
routes are algebraically identical, so they check each other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad_vec

from .constants import C, HBAR, KB, PI, STEFAN_BOLTZMANN
from .materials import IdealMetal, ResponseModel
from .numerics import ConvergenceError, QuadratureSpec, integrate, resonance_breakpoints
from .reflection import _branch_s, real_eps_dimless, real_impedance_dimless

#: upper frequency cutoff in units of k_B T_max / hbar
OMEGA_CUT = 40.0
#: lower frequency cutoff relative to the upper one; the omitted band changes
#: Drude-type fluxes by about 1e-6 relative
W_MIN = 1e-7
#: EW cutoff in y = 2 a q
Y_MAX = 40.0

DIELECTRIC = "dielectric"
IMPEDANCE = "impedance"
IMPEDANCE_SPLIT = "impedance-split"

_INNER = QuadratureSpec(rtol=1e-8, atol=1e-16, limit=4000)
_OUTER_POINTS = [2.0**-k for k in range(1, 16)]
# black-body inner integral is 1
_KIRCHHOFF = QuadratureSpec(rtol=1e-10, atol=1e-14, limit=4000)


@dataclass(frozen=True)
class HeatConfig:
    """Two plates at separation ``a`` (m) and temperatures ``T1``, ``T2`` (K).

    ``model2`` defaults to ``model1``.  Each plate's response is evaluated
    at its own temperature.
    """

    a: float
    T1: float
    T2: float
    model1: ResponseModel
    model2: Optional[ResponseModel] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("separation must be positive")
        if self.T1 < 0 or self.T2 < 0:
            raise ValueError("temperatures must be non-negative")
        if self.model2 is None:
            object.__setattr__(self, "model2", self.model1)

    def swapped(self) -> "HeatConfig":
        return HeatConfig(self.a, self.T2, self.T1, self.model2, self.model1)


@dataclass(frozen=True)
class HeatFluxResult:
    """Heat flux (W/m^2) from plate 1 to plate 2 and its channels."""

    S_total: float
    S_PW: float
    S_EW: float
    te_pw: float
    tm_pw: float
    te_ew: float
    tm_ew: float
    formulation: str
    converged: bool = True
    dissipationless: bool = False

    def __post_init__(self):
        if not math.isclose(self.S_total, self.S_PW + self.S_EW, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("S_total must equal S_PW + S_EW")

    @classmethod
    def from_channels(cls, te_pw, tm_pw, te_ew, tm_ew, formulation, converged=True,
                      dissipationless=False) -> "HeatFluxResult":
        pw, ew = te_pw + tm_pw, te_ew + tm_ew
        return cls(pw + ew, pw, ew, te_pw, tm_pw, te_ew, tm_ew, formulation, converged,
                   dissipationless)


class BlackBody(ResponseModel):
    """Perfect absorber, r = 0 for both polarizations (heat transfer only)."""

    name = "black-body"
    dissipative = True


# ---------------------------------------------------------------------------
# plate response at one real frequency

class _Plate:
    """Reflection pair of one plate at fixed omega, in a chosen form."""

    def __init__(self, model: Optional[ResponseModel], omega: float, T: float, form: str):
        self.black = model is None or isinstance(model, BlackBody)
        self.kind, self.val = "z", 0j
        if self.black:
            return
        if isinstance(model, IdealMetal):
            return
        if form == "eps" or (form == "natural" and not model.uses_impedance):
            self.kind, self.val = "eps", complex(model.eps_real(omega, T))
        else:
            self.kind, self.val = "z", complex(model.impedance_real(omega, T))

    def reflect(self, w, kz):
        if self.black:
            zero = np.zeros(np.shape(kz), complex)
            return zero, zero.copy()
        if self.kind == "z":
            return real_impedance_dimless(self.val, w, kz)
        return real_eps_dimless(self.val, w, kz)

    def absorptance(self, w, kz):
        """(1 - |r_TM|^2, 1 - |r_TE|^2) for real kz, as 4 Re(A conj B)/|A + B|^2.

        Writing r = (A - B)/(A + B) avoids the cancellation in 1 - |r|^2
        for nearly perfect reflectors.
        """
        kz = np.asarray(kz, complex)
        if self.black:
            one = np.ones(kz.shape)
            return one, one.copy()
        if self.kind == "z":
            pairs = ((kz, self.val * w), (w + 0j * kz, kz * self.val))
        else:
            s = _branch_s(kz**2 + (self.val - 1.0) * w**2)
            pairs = ((self.val * kz, s), (s, kz))
        with np.errstate(invalid="ignore", divide="ignore"):
            return tuple(4.0 * np.real(A * np.conj(B)) / np.abs(A + B) ** 2 for A, B in pairs)

    @property
    def impedance(self) -> complex:
        return self.val if self.kind == "z" else 1.0 / np.sqrt(self.val)

    @property
    def length_scales(self):
        """|Z| and 1/|Z|: where the reflection pair varies with kz/w."""
        z = abs(self.impedance)
        return (z, 1.0 / z) if 0 < z < np.inf else ()


def _pw_spec(w):
    # the PW integrand is O(u) on [0, w]; the floor absorbs rounding in 1 - |r|^2
    return QuadratureSpec(_INNER.rtol, 1e-14 * w * w, _INNER.limit)


def _pw_points(w, D, plates):
    grid = np.unique(np.concatenate((np.linspace(0.0, w, max(129, int(20 * w))),
                                     w * np.geomspace(1e-6, 1.0, 60))))
    _, pts = resonance_breakpoints(D, grid, 0.0, w)
    extra = [w * s * f for p in plates for s in p.length_scales for f in (0.1, 1.0, 10.0)]
    return sorted(set(pts.tolist()) | {x for x in extra if 0 < x < w})


def _ew_points(w, D, plates):
    grid = np.geomspace(1e-10, Y_MAX, 600)
    _, pts = resonance_breakpoints(D, grid, 0.0, Y_MAX)
    extra = [w * s * f for p in plates for s in p.length_scales for f in (0.1, 0.3, 1.0, 3.0, 10.0)]
    extra += [1e-6, 1e-4, 1e-2, 0.1, 1.0, 3.0, 10.0]
    return sorted(set(pts.tolist()) | {x for x in extra if 0 < x < Y_MAX})


def _split_inner(w, p1: _Plate, p2: _Plate):
    """Inner integrals of the reflection-coefficient form: (te_pw, tm_pw, te_ew, tm_ew)."""
    out = np.zeros(4)
    flags = []
    for j in (1, 0):  # te, tm
        def rr_pw(u):
            return p1.reflect(w, u + 0j)[j] * p2.reflect(w, u + 0j)[j]

        def D_pw(u):
            return 1.0 - rr_pw(u) * np.exp(1j * u)

        def f_pw(u):
            r1, r2 = p1.reflect(w, u + 0j)[j], p2.reflect(w, u + 0j)[j]
            num = p1.absorptance(w, u)[j] * p2.absorptance(w, u)[j]
            return u * num / np.abs(1.0 - r1 * r2 * np.exp(1j * u)) ** 2

        def D_ew(y):
            return 1.0 - p1.reflect(w, 1j * y)[j] * p2.reflect(w, 1j * y)[j] * np.exp(-y)

        def f_ew(y):
            r1, r2 = p1.reflect(w, 1j * y)[j], p2.reflect(w, 1j * y)[j]
            e = np.exp(-y)
            return y * r1.imag * r2.imag * e / np.abs(1.0 - r1 * r2 * e) ** 2

        res = integrate(_finite(f_pw), 0.0, w, _pw_spec(w), points=_pw_points(w, D_pw, (p1, p2)))
        out[0 if j == 1 else 1] = res.value
        flags.append(res.converged)
        res = integrate(_finite(f_ew), 0.0, Y_MAX, _INNER, points=_ew_points(w, D_ew, (p1, p2)))
        out[2 if j == 1 else 3] = res.value
        flags.append(res.converged)
    return out, all(flags)


def _b_inner(w, p1: _Plate, p2: _Plate):
    """Inner integrals of the impedance form, without the Re Z1 Re Z2 factor."""
    z1, z2 = p1.impedance, p2.impedance
    out = np.zeros(4)
    flags = []

    # expanded in 1 - e = -expm1(.) so that B stays accurate as e -> 1
    def b_te(p, arg):
        return np.abs(-np.expm1(arg) * (1 + p * p * z1 * z2) + p * (z1 + z2) * (1 + np.exp(arg))) ** 2

    def b_tm(p, arg):
        return np.abs(-np.expm1(arg) * (p * p + z1 * z2) + p * (z1 + z2) * (1 + np.exp(arg))) ** 2

    for k, b in enumerate((b_te, b_tm)):
        j = 1 - k  # index into the reflection pair: te=1, tm=0

        def D_pw(u):
            return 1.0 - p1.reflect(w, u + 0j)[j] * p2.reflect(w, u + 0j)[j] * np.exp(1j * u)

        def D_ew(y):
            return 1.0 - p1.reflect(w, 1j * y)[j] * p2.reflect(w, 1j * y)[j] * np.exp(-y)

        res = integrate(_finite(lambda u: u**3 / b(u / w, 1j * u)), 0.0, w, _pw_spec(w),
                        points=_pw_points(w, D_pw, (p1, p2)))
        out[k] = res.value
        flags.append(res.converged)
        res = integrate(_finite(lambda y: y**3 * np.exp(-y) / b(1j * y / w, -y)), 0.0, Y_MAX,
                        _INNER, points=_ew_points(w, D_ew, (p1, p2)))
        out[2 + k] = res.value
        flags.append(res.converged)
    return out, all(flags)


def _finite(f):
    def g(x):
        with np.errstate(all="ignore"):
            v = f(x)
        return np.where(np.isfinite(v), v, 0.0)
    return g


def _bose(x):
    with np.errstate(over="ignore", divide="ignore"):
        return np.where(np.isinf(x), 0.0, 1.0 / np.expm1(x))


def _bose_difference(omega, T1, T2):
    def n(T):
        if T == 0:
            return 0.0
        return _bose(HBAR * omega / (KB * T))
    return n(T1) - n(T2)


def _heat(cfg: HeatConfig, formulation: str, rtol: float) -> HeatFluxResult:
    m1, m2 = cfg.model1, cfg.model2
    # the flux carries Re Z1 Re Z2: one lossless plate already blocks it
    dissipationless = not (m1.dissipative and m2.dissipative)
    if cfg.T1 == cfg.T2 or dissipationless:
        return HeatFluxResult.from_channels(0.0, 0.0, 0.0, 0.0, formulation, True, dissipationless)
    a = cfg.a
    L = 2.0 * a
    form = "z" if formulation in (IMPEDANCE, IMPEDANCE_SPLIT) else "natural"
    W = OMEGA_CUT * KB * max(cfg.T1, cfg.T2) / HBAR * L / C
    flags = []

    def inner(w):
        omega = w * C / L
        p1, p2 = _Plate(m1, omega, cfg.T1, form), _Plate(m2, omega, cfg.T2, form)
        dn = _bose_difference(omega, cfg.T1, cfg.T2)
        if formulation == IMPEDANCE:
            vals, ok = _b_inner(w, p1, p2)
            re = p1.impedance.real * p2.impedance.real
            flags.append(ok)
            return 4.0 * re * dn / w * vals
        vals, ok = _split_inner(w, p1, p2)
        flags.append(ok)
        return w * dn * vals * np.array([0.25, 0.25, 1.0, 1.0])

    # w = W t^2 concentrates nodes at low frequency where Re Z varies fastest
    def outer(t):
        w = W * t * t
        if w < W_MIN * W:
            return np.zeros(4)
        return 2.0 * W * t * inner(w)

    vals, err = quad_vec(outer, 0.0, 1.0, epsrel=rtol, epsabs=0.0, norm="max", limit=500,
                         points=_OUTER_POINTS)
    pref = HBAR * C**2 / (PI**2 * L**4)
    te_pw, tm_pw, te_ew, tm_ew = (pref * vals).tolist()
    converged = all(flags) and err <= 10 * rtol * max(np.max(np.abs(vals)), 1e-300)
    return HeatFluxResult.from_channels(te_pw, tm_pw, te_ew, tm_ew, formulation, bool(converged),
                                        dissipationless)


def heat_flux_dielectric(cfg: HeatConfig, rtol: float = 1e-6) -> HeatFluxResult:
    """Heat flux from the PW/EW split with each model's own reflection coefficients.

    Permittivity models use the dielectric coefficients; impedance models
    (which have no permittivity) their impedance coefficients.
    """
    return _heat(cfg, DIELECTRIC, rtol)


def heat_flux_split_impedance(cfg: HeatConfig, rtol: float = 1e-6) -> HeatFluxResult:
    """PW/EW split evaluated with impedance reflection coefficients for both plates."""
    return _heat(cfg, IMPEDANCE_SPLIT, rtol)


def heat_flux_impedance(cfg: HeatConfig, rtol: float = 1e-6) -> HeatFluxResult:
    """Heat flux from the Re Z1 Re Z2 / B form (permittivity models use Z = 1/sqrt(eps)).

    A pair with Re Z = 0 gives S = 0 identically and is flagged dissipationless.
    """
    return _heat(cfg, IMPEDANCE, rtol)


def heat_flux(cfg: HeatConfig, formulation: str = DIELECTRIC, rtol: float = 1e-6) -> HeatFluxResult:
    if formulation not in (DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT):
        raise ValueError(f"unknown formulation {formulation!r}")
    return _heat(cfg, formulation, rtol)


def te_ew_fraction(cfg: HeatConfig, formulation: str = DIELECTRIC) -> float:
    """S_TE,EW / S_total; NaN when no heat is exchanged (undefined)."""
    res = heat_flux(cfg, formulation)
    if not res.converged:
        raise ConvergenceError("heat flux did not converge")
    if res.S_total == 0.0:
        return math.nan
    return res.te_ew / res.S_total


# ---------------------------------------------------------------------------
# single surface

def _absorbed(p: _Plate, pp):
    """sum_pol (1 - |r|^2) at kz = p omega/c (w = 1)."""
    tm, te = p.absorptance(1.0, pp)
    return tm + te


def kirchhoff_flux(T: float, model: Optional[ResponseModel], rtol: float = 1e-8) -> float:
    """Radiated flux Phi(T) (W/m^2) of a surface; ``None`` or :class:`BlackBody` is a black body."""
    if not T > 0:
        raise ValueError("temperature must be positive")
    if isinstance(model, IdealMetal):
        return 0.0
    flags = []

    def inner(x):
        omega = x * KB * T / HBAR
        p = _Plate(model, omega, T, "natural")
        pts = [s * f for s in p.length_scales for f in (0.1, 0.3, 1.0, 3.0, 10.0) if 0 < s * f < 1]
        res = integrate(_finite(lambda q: q * _absorbed(p, q)), 0.0, 1.0, _KIRCHHOFF, points=sorted(set(pts)))
        flags.append(res.converged)
        return x**3 * _bose(x) * res.value

    def outer(t):
        x = OMEGA_CUT * t * t
        return 0.0 if x == 0 else 2.0 * OMEGA_CUT * t * inner(x)

    # black body: the outer integral is pi^4/15
    floor = 1e-13 * PI**4 / 15.0
    val, err = quad_vec(outer, 0.0, 1.0, epsrel=rtol, epsabs=floor, limit=500, points=_OUTER_POINTS[:8])
    if not (all(flags) and err <= 10 * max(rtol * abs(val), floor)):
        raise ConvergenceError("Kirchhoff flux did not converge")
    return float((KB * T) ** 4 / (4.0 * PI**2 * C**2 * HBAR**3) * val)


def black_body_flux(T: float) -> float:
    """Stefan law Theta T^4."""
    return STEFAN_BOLTZMANN * T**4


def emittivity(T: float, model: Optional[ResponseModel]) -> float:
    """e(T) = Phi(T) / (Theta T^4)."""
    return kirchhoff_flux(T, model) / black_body_flux(T)
