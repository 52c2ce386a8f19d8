"""Low-temperature behaviour of the free energy and entropy, and the Nernst test.

Two material descriptions are contrasted:

* the impedance of infrared optics, for which the thermal part of the free
  energy starts at order T^3 and the entropy vanishes as T -> 0;
* the Drude impedance, whose zero-frequency term gives r_TE^2(0) = 1 and
  leaves a positive entropy S_D(a, 0) = k_B zeta(3) rho (1 - 6 rho + ...)/(2 pi a^2)
  at zero temperature.

``rho = c/(2 a omega_p)`` is the ratio of the infrared penetration depth to
the gap and ``t = T/T_eff`` with k_B T_eff = hbar c/(2a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import binom, zeta

from .constants import C, HBAR, KB, PI, ZETA3, effective_temperature, kappa as kappa_of
from .lifshitz import Geometry, free_energy_parts, zero_point_parts
from .materials import DrudeZ, IdealMetal, InfraredZ, PlasmaEps, PlateParams, ResponseModel, gold
from .numerics import ConvergenceError, DomainError, QuadratureSpec, ddT, integrate_semi_infinite, polylog

NERNST_SATISFIED = "nernst-satisfied"
NERNST_VIOLATED = "nernst-violated"
INCONCLUSIVE = "inconclusive"
DEFAULT_LADDER = (300.0, 150.0, 77.0, 30.0, 10.0, 4.0, 2.0)

_QUAD = QuadratureSpec(rtol=1e-12, atol=1e-14, limit=4000)


class AsymptoticRangeError(ValueError):
    """Raised when an expansion is requested outside its range of validity."""


def rho_parameter(a: float, omega_p: float) -> float:
    """rho = lambda_p/(4 pi a) = c/(2 a omega_p)."""
    return C / (2.0 * a * omega_p)


def _check_ir_range(a, T, omega_p):
    t = T / effective_temperature(a)
    rho = rho_parameter(a, omega_p)
    if T < 0 or t >= 0.1:
        raise AsymptoticRangeError(f"T/T_eff = {t:.3g} outside [0, 0.1)")
    if rho >= 0.1:
        raise AsymptoticRangeError(f"rho = {rho:.3g} is not small (needs < 0.1)")
    return t, rho


# ---------------------------------------------------------------------------
# infrared optics

def ir_free_energy_shift(a: float, T, omega_p: float):
    """F - E for the infrared-optics impedance, to order rho and (T/T_eff)^4.

    Accepts complex ``T`` (no range check) so that it can be differentiated
    by complex step.
    """
    t = T / effective_temperature(a)
    d = C / (omega_p * a)  # delta_i / a = 2 rho
    c3 = 45.0 * ZETA3 / PI**3
    bracket = c3 * t**3 - t**4 + d * (2.0 * c3 * t**3 - 4.0 * t**4)
    return -(PI**2 * HBAR * C / (720.0 * a**3)) * bracket


def free_energy_lowT_ir(a: float, T: float, omega_p: float, E: Optional[float] = None) -> float:
    """Low-temperature free energy (J/m^2) for the impedance of infrared optics.

    ``E`` is the zero-temperature energy; by default it is computed
    numerically with :class:`InfraredZ` at the same plasma frequency.
    """
    _check_ir_range(a, T, omega_p)
    if E is None:
        E = zero_point_parts(Geometry(a, 0.0, InfraredZ(PlateParams(omega_p))))[0]
    return float(E + ir_free_energy_shift(a, T, omega_p))


def entropy_lowT_ir(a: float, T: float, omega_p: float) -> float:
    """Low-temperature entropy (J/(m^2 K)) for the impedance of infrared optics."""
    t, _ = _check_ir_range(a, T, omega_p)
    d = C / (omega_p * a)
    c = 4.0 * PI**3 / 135.0
    return 3.0 * KB / (8.0 * PI * a * a) * t * t * (ZETA3 - c * t + d * (2.0 * ZETA3 - 4.0 * c * t))


def i0_closed(x):
    """I_0(x) = 2 int_x^inf y ln(1 - e^{-y}) dy = -2[Li3(e^-x) + x Li2(e^-x)]."""
    x = np.asarray(x, float)
    q = np.exp(-x)
    return -2.0 * (polylog(3, q) + x * polylog(2, q))


def i1_closed(x):
    """I_1(x) = 4 int_x^inf (x^2 + y^2)/(e^y - 1) dy."""
    x = np.asarray(x, float)
    q = np.exp(-x)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.where(x > 0, x * x * np.log(-np.expm1(-x)), 0.0)
    return 8.0 * (polylog(3, q) + x * polylog(2, q) - log_term)


def i_integral(n: int, x: float) -> float:
    """I_n(x), n in {0, 1, 2}, by direct quadrature of the defining integrals."""
    if n == 0:
        def f(y):
            return 2.0 * y * np.log(-np.expm1(-y))
    elif n == 1:
        def f(y):
            return 4.0 * (x * x + y * y) / np.expm1(y)
    elif n == 2:
        def f(y):
            # e^y/(e^y - 1)^2 = e^{-y}/(1 - e^{-y})^2
            return -8.0 * (x**4 + y**4) * np.exp(-y) / (y * np.expm1(-y) ** 2)
    else:
        raise ValueError("n must be 0, 1 or 2")
    res = integrate_semi_infinite(f, _QUAD, a=x)
    if not res.converged:
        raise ConvergenceError(f"I_{n}({x}) did not converge")
    return res.value


def _ir_impedance_dimless(zeta, rho):
    return rho * zeta / np.sqrt(1.0 + (rho * zeta) ** 2)


def phi(x: complex, rho: float) -> complex:
    """Phi(x) = int_x^inf f(x, y) dy for the infrared-optics impedance, complex x.

    The path is y = x + s, s in [0, inf), which stays in Re y >= 0.
    """
    z = _ir_impedance_dimless(x, rho)

    def f(s):
        y = x + s
        tm = (y - z * x) / (y + z * x)
        te = (x - y * z) / (x + y * z)
        e = np.exp(-y)
        return y * (np.log(1.0 - tm * tm * e) + np.log(1.0 - te * te * e))

    re = integrate_semi_infinite(lambda s: np.real(f(s)), _QUAD)
    im = integrate_semi_infinite(lambda s: np.imag(f(s)), _QUAD)
    if not (re.converged and im.converged):
        raise ConvergenceError(f"Phi({x}) did not converge")
    return complex(re.value, im.value)


def phi_difference(kt: float, rho: float) -> complex:
    """Phi(i kt) - Phi(-i kt) by quadrature."""
    return phi(1j * kt, rho) - phi(-1j * kt, rho)


def phi_difference_series(kt: float, rho: float) -> complex:
    """Small-argument expansion of Phi(i kt) - Phi(-i kt), through (kt)^3 and order rho."""
    return 1j * (PI * kt**2 - 2.0 * kt**3 / 3.0 + 4.0 * rho * (PI * kt**2 - 4.0 * kt**3 / 3.0))


# ---------------------------------------------------------------------------
# Drude impedance

def _plasma_tail_integral(rho: float) -> float:
    """int_0^inf y ln(1 - ((1 - rho y)/(1 + rho y))^2 e^{-y}) dy."""
    def f(y):
        r = (1.0 - rho * y) / (1.0 + rho * y)
        # 1 - r^2 e^{-y} = (1 - r^2) - r^2 expm1(-y)
        return y * np.log((1.0 - r * r) - r * r * np.expm1(-y))

    res = integrate_semi_infinite(f, _QUAD)
    if not res.converged:
        raise ConvergenceError("zero-frequency integral did not converge")
    return res.value


def drude_zero_mode_terms(a: float, T: float, omega_p: float):
    """Zero-frequency free energies (J/m^2): (F_D, F_i, F_D - F_i).

    F_D uses r_TM^2 = r_TE^2 = 1; F_i the infrared-optics impedance, for which
    r_TE(0, y) = (1 - rho y)/(1 + rho y).
    """
    rho = rho_parameter(a, omega_p)
    if rho >= 0.5:
        raise AsymptoticRangeError(f"rho = {rho:.3g} too large (needs < 0.5)")
    pref = KB * T / (16.0 * PI * a * a)
    f_d = -2.0 * ZETA3 * pref
    f_i = pref * (-ZETA3 + _plasma_tail_integral(rho))
    return f_d, f_i, f_d - f_i


def _coulomb_moment(s: int, m: int) -> float:
    """int_0^inf y^s (e^y - 1)^-m dy as a combination of zeta values."""
    # (e^y - 1)^-m = sum_{j>=m} C(j-1, m-1) e^{-jy}; C(j-1, m-1) is a polynomial in j
    coef = np.array([1.0])
    for i in range(1, m):
        coef = np.polynomial.polynomial.polymul(coef, [-float(i), 1.0])
    coef = coef / math.factorial(m - 1)
    return math.factorial(s) * float(sum(c * zeta(s + 1 - k) for k, c in enumerate(coef)))


def _entropy_series_coefficients(order: int) -> np.ndarray:
    """c_n with S_D(a,0) = k_B zeta(3)/(2 pi a^2) * sum_n c_n rho^n, c_1 = 1, c_2 = -6."""
    out = np.zeros(order + 1)
    for n in range(1, order + 1):
        tot = 0.0
        for m in range(1, n + 1):
            # expand ln(1 + g/(e^y-1)) with g = 4u/(1+u)^2, u = rho y
            tot += (-1) ** (m + 1) / m * 4.0**m * (-1) ** (n - m) * binom(n + m - 1, n - m) \
                * _coulomb_moment(n + 1, m)
        out[n] = tot / (8.0 * ZETA3)
    return out


_SERIES = _entropy_series_coefficients(14)


def entropy_drude_T0_series(a: float, omega_p: float, order: Optional[int] = None) -> float:
    """S_D(a, 0) from its rho expansion (asymptotic; truncated at the smallest term)."""
    rho = rho_parameter(a, omega_p)
    terms = _SERIES[1:] * rho ** np.arange(1, _SERIES.size)
    if order is None:
        order = int(np.argmin(np.abs(terms))) + 1
    return KB * ZETA3 / (2.0 * PI * a * a) * float(np.sum(terms[:order]))


def entropy_drude_T0_quad(a: float, omega_p: float) -> float:
    """S_D(a, 0) from the zero-frequency integral."""
    rho = rho_parameter(a, omega_p)
    return KB / (16.0 * PI * a * a) * (ZETA3 + _plasma_tail_integral(rho))


def entropy_drude_T0(a: float, omega_p: float) -> float:
    """Entropy at T = 0 (J/(m^2 K)) for the Drude impedance.

    Computed by quadrature and cross-checked against the series route to
    relative 1e-3 * rho, or to the series' own truncation error where that
    is larger (rho above about 0.045).
    """
    rho = rho_parameter(a, omega_p)
    if rho >= 0.1:
        raise AsymptoticRangeError(f"rho = {rho:.3g} is not small (needs < 0.1)")
    s_quad = entropy_drude_T0_quad(a, omega_p)
    s_ser = entropy_drude_T0_series(a, omega_p)
    # above rho ~ 0.045 the optimally truncated series cannot reach 1e-3 rho;
    # its smallest retained term then sets the attainable tolerance
    terms = _SERIES[1:] * rho ** np.arange(1, _SERIES.size)
    trunc = float(np.min(np.abs(terms)) / abs(np.sum(terms[:int(np.argmin(np.abs(terms))) + 1])))
    if abs(s_quad - s_ser) > max(1e-3 * rho, trunc) * abs(s_quad):
        raise ConvergenceError(f"S_D(a,0): quadrature {s_quad:.9g} vs series {s_ser:.9g}")
    return s_quad


def drude_log_entropy(a: float, T: float, omega_p: float, gamma: float) -> float:
    """Relaxation correction to S_D(a,T): -(k_B zeta(3)/2 pi^2 a^2)(gamma/omega_p)(T_eff/T)(ln kappa + 1/2)."""
    if T <= 0 or gamma == 0:
        return 0.0
    teff = effective_temperature(a)
    return -KB * ZETA3 / (2.0 * PI**2 * a * a) * (gamma / omega_p) * (teff / T) \
        * (math.log(kappa_of(a, T)) + 0.5)


def free_energy_lowT_drude(a: float, T: float, omega_p: float, gamma: float, E: float) -> float:
    """Leading low-temperature free energy for the Drude impedance (J/m^2)."""
    k = kappa_of(a, T)
    _, _, dF0 = drude_zero_mode_terms(a, T, omega_p)
    return E + dF0 + KB * T * gamma / (2.0 * PI * a * a * omega_p) * math.log(k) / k * ZETA3


# ---------------------------------------------------------------------------
# Nernst test

@dataclass(frozen=True)
class LadderPoint:
    T: float
    F_numeric: float
    F_asymptotic: float
    S_numeric: float
    S_asymptotic: float


@dataclass(frozen=True)
class AsymptoticReport:
    """Outcome of a Nernst-theorem test on a descending temperature ladder."""

    model: str
    a: float
    points: tuple
    s0: float
    s2: float
    scale: float
    prediction: float
    verdict: str
    diagnostics: tuple = field(default_factory=tuple)

    def __post_init__(self):
        Ts = [p.T for p in self.points]
        if any(t2 >= t1 for t1, t2 in zip(Ts, Ts[1:])):
            raise ValueError("ladder temperatures must be strictly decreasing")
        if self.verdict not in (NERNST_SATISFIED, NERNST_VIOLATED, INCONCLUSIVE):
            raise ValueError(f"unknown verdict {self.verdict!r}")


def _relaxation(model: ResponseModel, T: float) -> float:
    g = getattr(model, "gamma", None)
    return float(g(T)) if callable(g) else 0.0


def _asymptotic_pair(model, a, T, omega_p, E):
    """(F, S) from the low-temperature expansions, or NaN outside their range."""
    teff = effective_temperature(a)
    if isinstance(model, IdealMetal):
        t = T / teff
        c3 = 45.0 * ZETA3 / PI**3
        F = E - PI**2 * HBAR * C / (720.0 * a**3) * (c3 * t**3 - t**4)
        S = 3.0 * KB / (8.0 * PI * a * a) * t * t * (ZETA3 - 4.0 * PI**3 / 135.0 * t)
        return F, S
    try:
        if isinstance(model, DrudeZ):
            gamma = _relaxation(model, T)
            F = free_energy_lowT_drude(a, T, omega_p, gamma, E)
            S = entropy_drude_T0_quad(a, omega_p) + drude_log_entropy(a, T, omega_p, gamma)
            return F, S
        if isinstance(model, (InfraredZ, PlasmaEps)):
            return free_energy_lowT_ir(a, T, omega_p, E=E), entropy_lowT_ir(a, T, omega_p)
    except AsymptoticRangeError:
        pass
    return math.nan, math.nan


def nernst_test(model: ResponseModel, a: float, T_ladder: Sequence[float] = DEFAULT_LADDER,
                params: Optional[PlateParams] = None) -> AsymptoticReport:
    """Entropy on a descending temperature ladder and its T -> 0 intercept.

    S = -dF/dT is differentiated numerically from the Matsubara free energy.
    After removing the relaxation term (Drude-type models), S = s0 + s2 T^2 is
    fitted on the three lowest temperatures.  The intercept is judged against
    the scale k_B zeta(3) rho/(2 pi a^2): ``nernst-satisfied`` if
    |s0| < 1e-2 * scale, ``nernst-violated`` if s0 exceeds half of S_D(a,0),
    ``inconclusive`` otherwise.  ``params`` supplies omega_p for models
    without one (the ideal metal); gold is the default.
    """
    Ts = [float(t) for t in T_ladder]
    if any(t2 >= t1 for t1, t2 in zip(Ts, Ts[1:])):
        raise ValueError("T_ladder must be strictly decreasing")
    if Ts and min(Ts) < 1.0:
        raise DomainError("ladder temperatures must be >= 1 K")
    omega_p = model.omega_p or (params or gold()).omega_p
    rho = rho_parameter(a, omega_p)
    scale = KB * ZETA3 * rho / (2.0 * PI * a * a)
    prediction = entropy_drude_T0_quad(a, omega_p)
    diagnostics = []

    def F(T):
        return free_energy_parts(Geometry(a, T, model)).F_total

    points = []
    for T in Ts:
        try:
            Fn = F(T)
            d = ddT(F, T)
            E = zero_point_parts(Geometry(a, T, model))[0]
        except ConvergenceError as exc:
            diagnostics.append(f"T={T}: {exc}")
            continue
        Fa, Sa = _asymptotic_pair(model, a, T, omega_p, E)
        points.append(LadderPoint(T, Fn, Fa, -d.value, Sa))
        if not (np.isfinite(Fn) and np.isfinite(d.value)):
            diagnostics.append(f"non-finite free energy or entropy at T={T}")

    s0 = s2 = math.nan
    if len(points) < 3:
        diagnostics.append("fewer than three temperatures: no extrapolation")
    else:
        low = points[-3:]
        T3 = np.array([p.T for p in low])
        S3 = np.array([p.S_numeric - drude_log_entropy(a, p.T, omega_p, _relaxation(model, p.T))
                       for p in low])
        A = np.column_stack((np.ones(3), T3**2))
        (s0, s2), *_ = np.linalg.lstsq(A, S3, rcond=None)
        s0, s2 = float(s0), float(s2)

    if diagnostics or not np.isfinite(s0):
        verdict = INCONCLUSIVE
    elif abs(s0) < 1e-2 * scale:
        verdict = NERNST_SATISFIED
    elif s0 > 0.5 * prediction:
        verdict = NERNST_VIOLATED
    else:
        verdict = INCONCLUSIVE
    return AsymptoticReport(model.name, a, tuple(points), s0, s2, scale, prediction, verdict,
                            tuple(diagnostics))
