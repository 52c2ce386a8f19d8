from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_thermal.asymptotics import (DEFAULT_LADDER, INCONCLUSIVE, NERNST_SATISFIED, NERNST_VIOLATED,
                                         AsymptoticRangeError, AsymptoticReport, LadderPoint,
                                         drude_log_entropy, drude_zero_mode_terms, entropy_drude_T0,
                                         entropy_drude_T0_quad, entropy_drude_T0_series, entropy_lowT_ir,
                                         free_energy_lowT_ir, i0_closed, i1_closed, i_integral,
                                         ir_free_energy_shift, nernst_test, phi_difference,
                                         phi_difference_series, rho_parameter)
from casimir_thermal.constants import C, HBAR, KB, ZETA3
from casimir_thermal.lifshitz import Geometry, free_energy_parts, zero_point_parts
from casimir_thermal.materials import IdealMetal, InfraredZ, PlateParams, gold
from casimir_thermal.numerics import DomainError, ddT

GOLD = gold()
WP = GOLD.omega_p


def teff(a):
    return HBAR * C / (2 * KB * a)


# -- parameters ----------------------------------------------------------------

def test_rho_parameter():
    lam_p = 2 * math.pi * C / WP
    assert rho_parameter(1e-6, WP) == pytest.approx(lam_p / (4 * math.pi * 1e-6), rel=1e-14)


# -- infrared optics -----------------------------------------------------------

def test_zero_temperature_returns_energy():
    assert free_energy_lowT_ir(1e-6, 0.0, WP, E=-1.5e-9) == -1.5e-9
    E = zero_point_parts(Geometry(1e-6, 0.0, InfraredZ(GOLD)))[0]
    assert free_energy_lowT_ir(1e-6, 0.0, WP) == E
    assert entropy_lowT_ir(1e-6, 0.0, WP) == 0.0


def test_vanishing_skin_depth_gives_ideal_bracket():
    a, T = 1e-6, 20.0
    t = T / teff(a)
    ideal = -(math.pi**2 * HBAR * C / (720 * a**3)) * (45 * ZETA3 / math.pi**3 * t**3 - t**4)
    assert ir_free_energy_shift(a, T, 1e12 * WP) == pytest.approx(ideal, rel=1e-10)


def test_range_errors():
    with pytest.raises(AsymptoticRangeError):
        free_energy_lowT_ir(1e-6, 0.2 * teff(1e-6), WP, E=0.0)
    with pytest.raises(AsymptoticRangeError):
        entropy_lowT_ir(50e-9, 1.0, WP)
    with pytest.raises(AsymptoticRangeError):
        entropy_drude_T0(50e-9, WP)


@settings(max_examples=50)
@given(st.floats(0.2e-6, 5e-6), st.floats(1e-3, 0.09))
def test_entropy_is_minus_temperature_derivative(a, t):
    """Complex-step derivative of the free-energy shift against the entropy formula."""
    T = t * teff(a)
    h = 1e-20 * T
    dFdT = ir_free_energy_shift(a, complex(T, h), WP).imag / h
    assert entropy_lowT_ir(a, T, WP) == pytest.approx(-dFdT, rel=1e-12)


@settings(max_examples=30)
@given(st.floats(0.2e-6, 5e-6), st.floats(1e-4, 1e-2))
def test_entropy_leading_coefficient(a, t):
    T = t * teff(a)
    d = C / (WP * a)
    lead = 3 * KB * ZETA3 * (1 + 2 * d) / (8 * math.pi * a * a * teff(a) ** 2)
    S = entropy_lowT_ir(a, T, WP)
    assert S > 0
    assert S / T**2 == pytest.approx(lead, rel=5 * t)


@pytest.mark.slow
def test_entropy_matches_numeric_derivative_at_30K():
    a, T = 1e-6, 30.0
    F = lambda tt: free_energy_parts(Geometry(a, tt, InfraredZ(GOLD))).F_total  # noqa: E731
    S_num = -ddT(F, T).value
    assert entropy_lowT_ir(a, T, WP) == pytest.approx(S_num, rel=5e-2)


# -- I integrals ---------------------------------------------------------------

@pytest.mark.parametrize("x", [0.01, 0.1, 1.0])
def test_closed_forms_match_quadrature(x):
    assert i0_closed(x) == pytest.approx(i_integral(0, x), rel=1e-8)
    assert i1_closed(x) == pytest.approx(i_integral(1, x), rel=1e-8)


def test_i_integrals_at_zero():
    assert float(i0_closed(0.0)) == pytest.approx(-2 * ZETA3, rel=1e-14)
    assert float(i1_closed(0.0)) == pytest.approx(8 * ZETA3, rel=1e-14)
    with pytest.raises(ValueError):
        i_integral(3, 0.1)


def test_i2_approaches_its_limit_quartically():
    xs = np.array([0.5, 0.25, 0.1, 0.05, 0.02, 0.01])
    dev = np.array([abs(i_integral(2, x) + 48 * ZETA3) for x in xs])
    # the remainder carries a logarithm, so the bound uses x^4 (1 + |ln x|)
    bound = xs**4 * (1 + np.abs(np.log(xs)))
    C_fit = np.max(dev / bound)
    assert np.all(dev <= C_fit * bound * (1 + 1e-12))
    assert C_fit < 100
    assert np.all(np.diff(dev) < 0)


# -- Phi difference ------------------------------------------------------------

@pytest.mark.parametrize("rho", [0.0, 0.01])
@pytest.mark.parametrize("kt", [0.05, 0.1])
def test_phi_difference_series(kt, rho):
    quad = phi_difference(kt, rho)
    ser = phi_difference_series(kt, rho)
    assert abs(quad.real) < 1e-10
    assert abs(quad - ser) <= 2.0 * kt**4


def test_phi_difference_series_is_exact_for_ideal_metal():
    for kt in (0.05, 0.1, 0.3):
        assert abs(phi_difference(kt, 0.0) - phi_difference_series(kt, 0.0)) < 1e-13


# -- Drude impedance -----------------------------------------------------------

def test_zero_mode_terms_identity():
    a, T = 1e-6, 300.0
    FD, Fi, dF = drude_zero_mode_terms(a, T, WP)
    assert FD == pytest.approx(-ZETA3 * KB * T / (8 * math.pi * a * a), rel=1e-12)
    assert dF == FD - Fi


def test_zero_mode_difference_vanishes_with_rho():
    a, T = 1e-6, 300.0
    scale = KB * T * ZETA3 / (16 * math.pi * a * a)
    vals = [abs(drude_zero_mode_terms(a, T, C / (2 * a * r))[2]) for r in (1e-2, 1e-3, 1e-4)]
    assert vals[2] < 1e-3 * scale
    assert vals[0] > vals[1] > vals[2]
    with pytest.raises(AsymptoticRangeError):
        drude_zero_mode_terms(a, T, C / (2 * a * 0.6))


@pytest.mark.parametrize("rho", [1e-4, 1e-3, 1e-2, 0.04])
def test_drude_T0_entropy_two_routes(rho):
    a = 1e-6
    wp = C / (2 * a * rho)
    sq = entropy_drude_T0_quad(a, wp)
    ss = entropy_drude_T0_series(a, wp)
    assert sq > 0
    assert abs(sq - ss) <= 1e-3 * rho * sq
    assert entropy_drude_T0(a, wp) == sq
    lead = KB * ZETA3 * rho / (2 * math.pi * a * a)
    assert sq == pytest.approx(lead * (1 - 6 * rho), abs=lead * 60 * rho**2)


@pytest.mark.parametrize("rho", [0.05, 0.07, 0.099])
def test_drude_T0_entropy_defined_up_to_range_limit(rho):
    a = 1e-6
    wp = C / (2 * a * rho)
    sq = entropy_drude_T0(a, wp)
    assert sq == entropy_drude_T0_quad(a, wp) > 0
    assert entropy_drude_T0_series(a, wp) == pytest.approx(sq, rel=0.1)


def test_gold_T0_entropy_positive_and_vanishing_limit():
    assert entropy_drude_T0(1e-6, WP) > 0
    assert entropy_drude_T0_quad(1e-6, 1e8 * WP) < 1e-6 * entropy_drude_T0_quad(1e-6, WP)


def test_log_entropy_term():
    assert drude_log_entropy(1e-6, 0.0, WP, 1e12) == 0.0
    assert drude_log_entropy(1e-6, 10.0, WP, 0.0) == 0.0
    # kappa < e^{-1/2} makes the correction positive
    assert drude_log_entropy(1e-6, 10.0, WP, 1e12) > 0


# -- Nernst engine -------------------------------------------------------------

def test_one_point_ladder_is_inconclusive():
    rep = nernst_test(InfraredZ(GOLD), 1e-6, [30.0])
    assert rep.verdict == INCONCLUSIVE
    assert len(rep.points) == 1 and math.isnan(rep.s0)
    assert rep.diagnostics


def test_ladder_validation():
    with pytest.raises(ValueError):
        nernst_test(IdealMetal(), 1e-6, [10.0, 20.0])
    with pytest.raises(DomainError):
        nernst_test(IdealMetal(), 1e-6, [10.0, 0.5])
    assert list(DEFAULT_LADDER) == sorted(DEFAULT_LADDER, reverse=True)


def test_report_validation():
    p = [LadderPoint(T, 0.0, 0.0, 0.0, 0.0) for T in (3.0, 2.0)]
    with pytest.raises(ValueError):
        AsymptoticReport("x", 1e-6, tuple(reversed(p)), 0.0, 0.0, 1.0, 1.0, NERNST_SATISFIED)
    with pytest.raises(ValueError):
        AsymptoticReport("x", 1e-6, tuple(p), 0.0, 0.0, 1.0, 1.0, "maybe")
    assert NERNST_VIOLATED != NERNST_SATISFIED


def test_ideal_metal_uses_supplied_plasma_frequency():
    rep = nernst_test(IdealMetal(), 1e-6, [30.0], params=PlateParams(2 * WP))
    assert rep.scale == pytest.approx(KB * ZETA3 * rho_parameter(1e-6, 2 * WP) / (2 * math.pi * 1e-12))
