from __future__ import annotations

import math
import warnings

import numpy as np
import pytest

from casimir_thermal.asymptotics import ir_free_energy_shift
from casimir_thermal.constants import KB, ZETA3
from casimir_thermal.lifshitz import (IMAGINARY, REAL, Geometry, channel_decomposition, free_energy_matsubara,
                                      free_energy_parts, ideal_metal_closed_form, ideal_metal_reference,
                                      matsubara_term, pressure, pressure_matsubara, thermal_correction,
                                      zero_point_parts)
from casimir_thermal.materials import DrudeEps, DrudeZ, IdealMetal, InfraredZ, PlasmaEps, gold
from casimir_thermal.numerics import SumSpec

GOLD = gold()


# -- geometry ------------------------------------------------------------------

def test_geometry_validation_and_defaults():
    g = Geometry(1e-6, 300.0, DrudeEps(GOLD))
    assert g.model2 is g.model1
    assert g.rho == pytest.approx(2.998e8 / (2e-6 * GOLD.omega_p), rel=1e-3)
    assert g.kappa == pytest.approx(300.0 / g.t_eff * 2 * math.pi, rel=1e-14)
    with pytest.raises(ValueError):
        Geometry(0.0, 300.0, IdealMetal())
    with pytest.raises(ValueError):
        Geometry(1e-6, -1.0, IdealMetal())
    assert Geometry(1e-6, 0.0, IdealMetal()).rho is None


def test_impedance_below_200nm_warns():
    with pytest.warns(UserWarning):
        Geometry(150e-9, 300.0, DrudeZ(GOLD))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Geometry(150e-9, 300.0, DrudeEps(GOLD))


# -- zero-frequency terms ------------------------------------------------------

@pytest.mark.parametrize("model", [IdealMetal(), DrudeZ(GOLD)], ids=["ideal", "drude-z"])
def test_weighted_zero_term(model):
    a, T = 1e-6, 300.0
    half = 0.5 * matsubara_term(Geometry(a, T, model), 0)
    assert half == pytest.approx(-ZETA3 * KB * T / (8 * math.pi * a * a), rel=1e-10)


def test_drude_eps_zero_term_has_tm_only():
    a, T = 1e-6, 300.0
    half = 0.5 * matsubara_term(Geometry(a, T, DrudeEps(GOLD)), 0)
    assert half == pytest.approx(-ZETA3 * KB * T / (16 * math.pi * a * a), rel=1e-10)


# -- zero-point parts ----------------------------------------------------------

def test_ideal_zero_point_scales_as_inverse_fourth_power():
    _, p1 = zero_point_parts(Geometry(0.5e-6, 0.0, IdealMetal()))
    _, p2 = zero_point_parts(Geometry(1.0e-6, 0.0, IdealMetal()))
    assert p2 == pytest.approx(p1 / 16, rel=1e-10)


def test_plasma_and_infrared_zero_point_agree():
    _, pp = zero_point_parts(Geometry(400e-9, 300.0, PlasmaEps(GOLD)))
    _, pi = zero_point_parts(Geometry(400e-9, 300.0, InfraredZ(GOLD)))
    assert pi == pytest.approx(pp, rel=1e-2)


def test_zero_temperature_has_no_thermal_part():
    g = Geometry(500e-9, 0.0, DrudeEps(GOLD))
    tc = thermal_correction(g)
    assert (tc.dP, tc.dF) == (0.0, 0.0)
    fb = free_energy_parts(g)
    assert fb.F_total == fb.E
    with pytest.raises(ValueError):
        pressure_matsubara(g)


# -- Matsubara sums ------------------------------------------------------------

def test_parts_reproduce_direct_sum():
    g = Geometry(500e-9, 300.0, DrudeEps(GOLD))
    E, P0 = zero_point_parts(g)
    tc = thermal_correction(g)
    assert P0 + tc.dP == pytest.approx(pressure_matsubara(g), rel=1e-9)
    assert E + tc.dF == pytest.approx(free_energy_matsubara(g), rel=1e-9)
    fb = free_energy_parts(g)
    assert fb.F_total == fb.E + fb.dF


def test_pressure_is_minus_energy_gradient():
    g = Geometry(500e-9, 300.0, DrudeEps(GOLD))
    h = 1e-11
    grad = (free_energy_matsubara(g.at(a=g.a + h)) - free_energy_matsubara(g.at(a=g.a - h))) / (2 * h)
    assert pressure_matsubara(g) == pytest.approx(-grad, rel=1e-6)


@pytest.mark.parametrize("model", [DrudeEps(GOLD), InfraredZ(GOLD)], ids=["drude", "ir"])
def test_attractive_and_monotone(model):
    grid = [250e-9, 400e-9, 700e-9, 1.2e-6, 2e-6]
    P = [pressure_matsubara(Geometry(a, 300.0, model)) for a in grid]
    F = [free_energy_matsubara(Geometry(a, 300.0, model)) for a in grid]
    assert all(p < 0 for p in P) and all(f < 0 for f in F)
    assert np.all(np.diff(np.abs(P)) < 0)


# -- ideal-metal reference -----------------------------------------------------

def test_ideal_reference_value_and_halves():
    dP, dP_te = ideal_metal_reference(0.2e-6, 300.0)
    assert dP == pytest.approx(-2.0427e-6, rel=1e-4)
    assert dP_te == pytest.approx(dP / 2, rel=1e-12)


def test_ideal_reference_matches_low_temperature_closed_form():
    dP, _ = ideal_metal_reference(1e-6, 30.0)
    assert dP == pytest.approx(ideal_metal_closed_form(1e-6, 30.0), rel=1e-5)


# -- real-axis channels --------------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("model", [IdealMetal(), PlasmaEps(GOLD)], ids=["ideal", "plasma"])
def test_channel_closure_and_lossless_ew(model):
    g = Geometry(500e-9, 300.0, model)
    br = channel_decomposition(g)
    ch = br.channels
    assert sum(ch.values()) == pytest.approx(br.dP, rel=1e-6)
    assert br.P_total == br.P0 + br.dP
    assert ch["TE_EW"] == 0.0
    if isinstance(model, IdealMetal):
        assert ch["TM_EW"] == 0.0
    assert br.dP == pytest.approx(thermal_correction(g).dP, rel=1e-6)


def test_breakdown_ratio_and_formulation_validation():
    g = Geometry(500e-9, 300.0, DrudeEps(GOLD))
    br = pressure(g)
    assert br.formulation == IMAGINARY
    assert br.ratio_to_ideal == pytest.approx(br.dP / ideal_metal_reference(g.a, g.T)[0], rel=1e-12)
    with pytest.raises(ValueError):
        thermal_correction(g, "complex")
    with pytest.raises(ValueError):
        channel_decomposition(g.at(T=0.0))
    assert REAL != IMAGINARY


# -- low temperature -----------------------------------------------------------

@pytest.mark.slow
def test_plasma_low_temperature_free_energy():
    """At 0.1 K the thermal shift is ~1e-13 of E; the residual sits at the rounding floor."""
    a, T = 300e-9, 0.1
    E = zero_point_parts(Geometry(a, 0.0, PlasmaEps(GOLD)))[0]
    F = free_energy_matsubara(Geometry(a, T, PlasmaEps(GOLD)), SumSpec(lmax=1e6))
    shift = ir_free_energy_shift(a, T, GOLD.omega_p)
    assert abs(F - (E + shift)) <= 1e-13 * abs(E)
    assert (F - E) == pytest.approx(shift, rel=0.2)
