"""TM/TE reflection coefficients in permittivity and impedance form.

Sign conventions follow the classic Lifshitz-theory choice

    r_TM = (eps q - k) / (eps q + k),    r_TE = (k - q) / (k + q)

on both axes, with the impedance analogues

    r_TM = (c q - Z xi) / (c q + Z xi),  r_TE = (xi - c q Z) / (xi + c q Z).

For a good metal both r_TE forms are close to +1, so permittivity- and
impedance-described plates can be mixed.  Observables only contain the
product r1*r2 or moduli.

Besides the SI-level API (:class:`SpectralPoint` based) the module provides
dimensionless vectorized kernels used by the integrators:

* imaginary axis: zeta = 2 a xi / c and y = 2 a q (y >= zeta);
* real axis: w = 2 a omega / c and kz = 2 a k_z, with kz = u real for
  propagating waves and kz = i*y for evanescent ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .constants import C
from .materials import IdealMetal, ModelMismatchError, ResponseModel

IMAG = "imag"
REAL = "real"


@dataclass(frozen=True)
class SpectralPoint:
    """A frequency (real omega or imaginary xi, rad/s) and a transverse wavenumber (1/m)."""

    frequency: Union[float, np.ndarray]
    k_perp: Union[float, np.ndarray]
    axis: str = IMAG

    def __post_init__(self):
        if self.axis not in (IMAG, REAL):
            raise ValueError("axis must be 'imag' or 'real'")
        if np.any(np.asarray(self.k_perp) < 0):
            raise ValueError("k_perp must be nonnegative")
        if np.any(np.asarray(self.frequency) < 0):
            raise ValueError("frequency must be nonnegative")

    @property
    def q(self):
        """q = sqrt(k_perp^2 + xi^2/c^2) on the imaginary axis, -i k_z on the real one."""
        if self.axis == IMAG:
            return np.sqrt(np.asarray(self.k_perp, float) ** 2 + (np.asarray(self.frequency) / C) ** 2)
        return -1j * self.k_z

    @property
    def k_z(self):
        """k_z = sqrt(omega^2/c^2 - k_perp^2), continued as +i q for evanescent waves."""
        if self.axis == IMAG:
            return 1j * self.q
        d = (np.asarray(self.frequency, float) / C) ** 2 - np.asarray(self.k_perp, float) ** 2
        return np.where(d >= 0, np.sqrt(np.abs(d)) + 0j, 1j * np.sqrt(np.abs(d)))

    @property
    def propagating(self):
        if self.axis == IMAG:
            return np.zeros(np.shape(self.frequency), bool)
        return np.asarray(self.k_perp) <= np.asarray(self.frequency) / C


@dataclass(frozen=True)
class ReflectionPair:
    tm: Union[float, complex, np.ndarray]
    te: Union[float, complex, np.ndarray]

    def __iter__(self):
        return iter((self.tm, self.te))


def _branch_s(arg):
    """sqrt with Im s >= 0; for real arguments s >= 0 or s = i|.|."""
    s = np.sqrt(np.asarray(arg, dtype=complex))
    s = np.where(s.imag < 0, -s, s)
    return np.where((s.imag == 0) & (s.real < 0), -s, s)


# ---------------------------------------------------------------------------
# dimensionless kernels


def imag_eps_dimless(eps, zeta, y):
    """Reflection pair from eps(i xi) at dimensionless (zeta, y); zeta > 0."""
    eps = np.asarray(eps, float)
    zeta = np.asarray(zeta, float)
    y = np.asarray(y, float)
    k = np.sqrt(y**2 + (eps - 1.0) * zeta**2)
    with np.errstate(invalid="ignore"):
        tm = (eps * y - k) / (eps * y + k)
        te = (k - y) / (k + y)
    inf = np.isinf(eps)
    if np.any(inf):
        tm = np.where(inf, 1.0, tm)
        te = np.where(inf, 1.0, te)
    return tm, te


def imag_impedance_dimless(z, zeta, y):
    """Reflection pair from Z(i xi) at dimensionless (zeta, y); zeta > 0."""
    z = np.asarray(z, float)
    tm = (y - z * zeta) / (y + z * zeta)
    te = (zeta - y * z) / (zeta + y * z)
    return tm, te


def zero_frequency_dimless(model: ResponseModel, y, a: float, T: float):
    """Exact zeta -> 0 limit of the reflection pair (the l = 0 Matsubara term).

    Impedance form: r_TM = 1 and r_TE = (1 - rho' y)/(1 + rho' y) with
    rho' = c Z'(0) / (2a); permittivity form: plasma gives the
    sqrt(1 + rho^2 y^2) expression, Drude gives r_TE = 0.
    """
    y = np.asarray(y, float)
    tm = np.ones_like(y)
    if isinstance(model, IdealMetal):
        return tm, np.ones_like(y)
    if model.uses_impedance:
        slope = model.impedance_slope0(T)
        if np.isinf(slope):
            return tm, -np.ones_like(y)
        rp = C * slope / (2.0 * a)
        return tm, (1.0 - rp * y) / (1.0 + rp * y)
    # permittivity models: eps zeta^2 -> (2 a omega_p / c)^2 for plasma-like behaviour
    slope = model.impedance_slope0(T)
    if np.isinf(slope):
        return tm, np.zeros_like(y)
    rho = C * slope / (2.0 * a)
    root = np.sqrt(1.0 + (rho * y) ** 2)
    return tm, (root - rho * y) / (root + rho * y)


def imag_axis_pair(model: ResponseModel, zeta, y, a: float, T: float):
    """Vectorized reflection pair on the imaginary axis, dimensionless variables.

    ``zeta`` may contain zeros; those entries use the exact static limit.
    """
    zeta = np.asarray(zeta, float)
    y = np.asarray(y, float)
    zeta, y = np.broadcast_arrays(zeta, y)
    tm = np.empty(zeta.shape)
    te = np.empty(zeta.shape)
    zero = zeta == 0
    pos = ~zero
    if np.any(pos):
        z, yy = zeta[pos], y[pos]
        xi = z * C / (2.0 * a)
        if isinstance(model, IdealMetal):
            tm[pos], te[pos] = 1.0, 1.0
        elif model.uses_impedance:
            tm[pos], te[pos] = imag_impedance_dimless(model.impedance_imag(xi, T), z, yy)
        else:
            tm[pos], te[pos] = imag_eps_dimless(model.eps_imag(xi, T), z, yy)
    if np.any(zero):
        tm[zero], te[zero] = zero_frequency_dimless(model, y[zero], a, T)
    return tm, te


def real_eps_dimless(eps, w, kz):
    """Reflection pair from eps(omega) at dimensionless (w, kz), kz complex."""
    eps = np.asarray(eps, complex)
    kz = np.asarray(kz, complex)
    s = _branch_s(kz**2 + (eps - 1.0) * np.asarray(w) ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        tm = (eps * kz - s) / (eps * kz + s)
        te = (s - kz) / (s + kz)
    inf = np.isinf(eps.real)
    if np.any(inf):
        tm = np.where(inf, 1.0 + 0j, tm)
        te = np.where(inf, 1.0 + 0j, te)
    return tm, te


def real_impedance_dimless(z, w, kz):
    """Reflection pair from Z(omega) at dimensionless (w, kz), kz complex."""
    z = np.asarray(z, complex)
    w = np.asarray(w, float)
    kz = np.asarray(kz, complex)
    with np.errstate(invalid="ignore", divide="ignore"):
        tm = (kz - z * w) / (kz + z * w)
        te = (w - kz * z) / (w + kz * z)
    return tm, te


def real_axis_pair(model: ResponseModel, w, kz, a: float, T: float, z=None, eps=None):
    """Vectorized reflection pair on the real axis.

    ``z``/``eps`` may carry precomputed response values at omega = w c/(2a)
    (useful when many kz share one frequency).
    """
    w = np.asarray(w, float)
    if isinstance(model, IdealMetal):
        shape = np.broadcast(w, np.asarray(kz)).shape
        one = np.ones(shape, complex)
        return one, one.copy()
    omega = w * C / (2.0 * a)
    if model.uses_impedance:
        if z is None:
            z = model.impedance_real(omega, T)
        return real_impedance_dimless(z, w, kz)
    if eps is None:
        eps = model.eps_real(omega, T)
    return real_eps_dimless(eps, w, kz)


# ---------------------------------------------------------------------------
# SI-level API


def longitudinal_wavenumbers(p: SpectralPoint, model: ResponseModel, T: float = 300.0):
    """Return (q, k) on the imaginary axis or (k_z, s) on the real axis."""
    kp2 = np.asarray(p.k_perp, float) ** 2
    f = np.asarray(p.frequency, float)
    if p.axis == IMAG:
        q = np.sqrt(kp2 + (f / C) ** 2)
        if isinstance(model, IdealMetal):
            return q, np.full_like(q, np.inf)
        if model.uses_impedance:
            raise ModelMismatchError(f"{model.name} has no permittivity; k is undefined")
        with np.errstate(divide="ignore", invalid="ignore"):
            eps = np.where(f > 0, model.eps_imag(np.where(f > 0, f, 1.0), T), np.inf)
            k = np.sqrt(kp2 + np.where(f > 0, eps * (f / C) ** 2, 0.0))
        return q, k
    if np.any(f <= 0):
        raise ValueError("real-axis frequency must be positive")
    kz = p.k_z
    eps = model.eps_real(f, T)
    s = _branch_s(kz**2 + (np.asarray(eps) - 1.0) * (f / C) ** 2)
    return kz, s


def _dimless_scale(p: SpectralPoint) -> float:
    """Length used to make the SI point dimensionless; any positive value works."""
    f = np.max(np.asarray(p.frequency, float))
    kp = np.max(np.asarray(p.k_perp, float))
    scale = max(f / C, kp)
    return 1.0 / scale if scale > 0 else 1.0


def reflect_imag_eps(p: SpectralPoint, model: ResponseModel, T: float = 300.0) -> ReflectionPair:
    """Permittivity-form coefficients at imaginary frequency."""
    if model.uses_impedance and not isinstance(model, IdealMetal):
        raise ModelMismatchError(f"{model.name} is impedance-only")
    return _reflect_imag(p, model, T, impedance=False)


def reflect_imag_impedance(p: SpectralPoint, model: ResponseModel, T: float = 300.0) -> ReflectionPair:
    """Impedance-form coefficients at imaginary frequency (any model with Z(i xi))."""
    return _reflect_imag(p, model, T, impedance=True)


def _reflect_imag(p, model, T, impedance):
    if p.axis != IMAG:
        raise ValueError("spectral point is not on the imaginary axis")
    L = _dimless_scale(p)   # plays the role of 2a
    a = L / 2.0
    zeta = np.asarray(p.frequency, float) * L / C
    y = np.asarray(p.q) * L
    zeta, y = np.broadcast_arrays(zeta, y)
    zero = zeta == 0
    tm = np.empty(zeta.shape)
    te = np.empty(zeta.shape)
    pos = ~zero
    if np.any(pos):
        xi = np.asarray(p.frequency, float) * np.ones(zeta.shape)
        if isinstance(model, IdealMetal):
            tm[pos], te[pos] = 1.0, 1.0
        elif impedance:
            tm[pos], te[pos] = imag_impedance_dimless(model.impedance_imag(xi[pos], T), zeta[pos], y[pos])
        else:
            tm[pos], te[pos] = imag_eps_dimless(model.eps_imag(xi[pos], T), zeta[pos], y[pos])
    if np.any(zero):
        if impedance and not model.uses_impedance and not isinstance(model, IdealMetal):
            # eps model evaluated through Z = 1/sqrt(eps): use the impedance static limit
            slope = model.impedance_slope0(T)
            yy = y[zero]
            if np.isinf(slope):
                tm[zero], te[zero] = 1.0, -1.0
            else:
                rp = C * slope / L
                tm[zero], te[zero] = 1.0, (1.0 - rp * yy) / (1.0 + rp * yy)
        else:
            tm[zero], te[zero] = zero_frequency_dimless(model, y[zero], a, T)
    return ReflectionPair(tm[()] if tm.ndim == 0 else tm, te[()] if te.ndim == 0 else te)


def reflect_real_eps(p: SpectralPoint, model: ResponseModel, T: float = 300.0) -> ReflectionPair:
    """Permittivity-form coefficients at real frequency (impedance models use eps = 1/Z^2)."""
    if p.axis != REAL:
        raise ValueError("spectral point is not on the real axis")
    f = np.asarray(p.frequency, float)
    if np.any(f <= 0):
        raise ValueError("real-axis frequency must be positive")
    L = _dimless_scale(p)
    w = f * L / C
    if isinstance(model, IdealMetal):
        one = np.ones(np.broadcast(w, p.k_perp).shape, complex)
        return ReflectionPair(one[()], one.copy()[()])
    tm, te = real_eps_dimless(model.eps_real(f, T), w, p.k_z * L)
    return ReflectionPair(tm[()], te[()])


def reflect_real_impedance(p: SpectralPoint, model: ResponseModel, T: float = 300.0) -> ReflectionPair:
    """Impedance-form coefficients at real frequency."""
    if p.axis != REAL:
        raise ValueError("spectral point is not on the real axis")
    f = np.asarray(p.frequency, float)
    if np.any(f <= 0):
        raise ValueError("real-axis frequency must be positive")
    L = _dimless_scale(p)
    tm, te = real_impedance_dimless(model.impedance_real(f, T), f * L / C, p.k_z * L)
    return ReflectionPair(tm[()], te[()])


def reflect(p: SpectralPoint, model: ResponseModel, T: float = 300.0) -> ReflectionPair:
    """Dispatch on the axis and on the model's preferred form."""
    if p.axis == IMAG:
        if model.uses_impedance or isinstance(model, IdealMetal):
            return reflect_imag_impedance(p, model, T)
        return reflect_imag_eps(p, model, T)
    if model.uses_impedance:
        return reflect_real_impedance(p, model, T)
    return reflect_real_eps(p, model, T)


Pair = Tuple[np.ndarray, np.ndarray]
