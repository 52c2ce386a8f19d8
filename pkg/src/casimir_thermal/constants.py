"""Physical constants (SI) and unit helpers.

Material formulas elsewhere in the package are written in Gaussian form
(``4*pi*sigma0`` with ``sigma0`` in 1/s); only hbar, k_B and c enter the
prefactors of the free energy, pressure and heat flux.
"""
from __future__ import annotations

import math

from scipy import constants as _sc

HBAR = _sc.hbar
KB = _sc.k
C = _sc.c
HBAR_EV = _sc.hbar / _sc.e  # eV*s, 6.582119569e-16
STEFAN_BOLTZMANN = _sc.Stefan_Boltzmann
ZETA3 = 1.2020569031595942853997381615114499907649862923405
PI = math.pi


def ev_to_rad_s(energy_ev: float) -> float:
    """Photon energy in eV -> angular frequency in rad/s."""
    return energy_ev / HBAR_EV


def rad_s_to_ev(omega: float) -> float:
    return omega * HBAR_EV


def matsubara_xi(T: float, l: int = 1) -> float:
    """Matsubara frequency xi_l = 2 pi k_B T l / hbar (rad/s)."""
    return 2.0 * PI * KB * T * l / HBAR


def effective_temperature(a: float) -> float:
    """T_eff defined by k_B T_eff = hbar c / (2a)."""
    return HBAR * C / (2.0 * a * KB)


def kappa(a: float, T: float) -> float:
    """Dimensionless thermal parameter 4 pi k_B a T / (hbar c) = xi_1 * 2a / c."""
    return 4.0 * PI * KB * a * T / (HBAR * C)
