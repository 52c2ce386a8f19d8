from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from casimir_thermal.constants import C, HBAR, KB, PI, STEFAN_BOLTZMANN
from casimir_thermal.heat_transfer import (DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT, BlackBody, HeatConfig,
                                           HeatFluxResult, _bose_difference, _Plate, black_body_flux,
                                           emittivity, heat_flux, heat_flux_impedance,
                                           heat_flux_split_impedance, kirchhoff_flux, te_ew_fraction)
from casimir_thermal.materials import DrudeEps, DrudeZ, IdealMetal, InfraredZ, NormalSkinZ, PlasmaEps, Zp, gold

GOLD = gold()


# -- configuration -------------------------------------------------------------

def test_config_validation_and_swap():
    cfg = HeatConfig(1e-6, 320.0, 300.0, DrudeZ(GOLD), NormalSkinZ(GOLD))
    sw = cfg.swapped()
    assert (sw.T1, sw.T2, sw.model1, sw.model2) == (300.0, 320.0, cfg.model2, cfg.model1)
    assert HeatConfig(1e-6, 1.0, 2.0, DrudeZ(GOLD)).model2 is not None
    with pytest.raises(ValueError):
        HeatConfig(0.0, 1.0, 2.0, DrudeZ(GOLD))
    with pytest.raises(ValueError):
        HeatConfig(1e-6, -1.0, 2.0, DrudeZ(GOLD))
    with pytest.raises(ValueError):
        heat_flux(cfg, "far-field")


def test_result_closure_is_enforced():
    r = HeatFluxResult.from_channels(1.0, 2.0, 3.0, 4.0, DIELECTRIC)
    assert (r.S_PW, r.S_EW, r.S_total) == (3.0, 7.0, 10.0)
    with pytest.raises(ValueError):
        HeatFluxResult(1.0, 1.0, 1.0, 0.5, 0.5, 0.5, 0.5, DIELECTRIC)


# -- trivial limits ------------------------------------------------------------

@pytest.mark.parametrize("form", [DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT])
def test_equal_temperatures_give_zero(form):
    r = heat_flux(HeatConfig(0.3e-6, 300.0, 300.0, DrudeZ(GOLD)), form)
    assert r.S_total == 0.0 and r.converged


@pytest.mark.parametrize("model", [InfraredZ(GOLD), PlasmaEps(GOLD), IdealMetal()], ids=lambda m: m.name)
def test_lossless_plates_exchange_no_heat(model):
    r = heat_flux(HeatConfig(0.3e-6, 320.0, 300.0, model))
    assert r.S_total == 0.0 and r.dissipationless
    assert math.isnan(te_ew_fraction(HeatConfig(0.3e-6, 320.0, 300.0, model)))
    mixed = heat_flux_impedance(HeatConfig(0.3e-6, 320.0, 300.0, model, DrudeZ(GOLD)))
    assert mixed.S_total == 0.0 and mixed.dissipationless


def test_bose_difference():
    assert _bose_difference(1e14, 300.0, 300.0) == 0.0
    assert _bose_difference(1e14, 320.0, 300.0) > 0
    x = HBAR * 1e14 / (KB * 300.0)
    assert _bose_difference(1e14, 300.0, 0.0) == pytest.approx(1 / math.expm1(x), rel=1e-14)


# -- finite-gap flux -----------------------------------------------------------

@pytest.fixture(scope="module")
def drude_z_pair():
    cfg = HeatConfig(0.3e-6, 320.0, 300.0, DrudeZ(GOLD))
    return cfg, heat_flux(cfg), heat_flux(cfg.swapped())


def test_flux_positive_channels(drude_z_pair):
    _, r, _ = drude_z_pair
    assert r.converged
    assert r.S_PW > 0 and r.S_EW > 0
    assert min(r.te_pw, r.tm_pw, r.te_ew, r.tm_ew) > 0


def test_swap_reverses_flux(drude_z_pair):
    _, r, back = drude_z_pair
    assert back.S_total == pytest.approx(-r.S_total, rel=1e-6)
    assert back.te_ew == pytest.approx(-r.te_ew, rel=1e-6)


def test_split_and_impedance_forms_agree(drude_z_pair):
    cfg, r, _ = drude_z_pair
    b = heat_flux_impedance(cfg)
    s = heat_flux_split_impedance(cfg)
    for x in (b, s):
        assert x.converged
        assert x.S_total == pytest.approx(r.S_total, rel=1e-6)
        assert x.te_ew == pytest.approx(r.te_ew, rel=1e-6)
        assert x.tm_pw == pytest.approx(r.tm_pw, rel=1e-6)


def test_normal_skin_flux_dominated_by_te_evanescent():
    frac = te_ew_fraction(HeatConfig(0.3e-6, 320.0, 300.0, NormalSkinZ(GOLD)))
    assert frac > 0.5


def test_swap_antisymmetry_between_different_plates():
    cfg = HeatConfig(0.5e-6, 320.0, 300.0, DrudeZ(GOLD), Zp(GOLD))
    fwd = heat_flux(cfg)
    back = heat_flux(cfg.swapped())
    assert fwd.S_total > 0
    assert back.S_total == pytest.approx(-fwd.S_total, rel=1e-6)


@pytest.mark.slow
def test_evanescent_flux_decreases_with_gap():
    ew = [heat_flux(HeatConfig(a, 320.0, 300.0, DrudeZ(GOLD))).S_EW for a in (0.2e-6, 0.5e-6, 1e-6, 2e-6)]
    assert np.all(np.diff(ew) < 0)


# -- single surface ------------------------------------------------------------

def test_black_body_flux_is_stefan_law():
    for T in (100.0, 295.0, 1000.0):
        assert kirchhoff_flux(T, BlackBody()) == pytest.approx(STEFAN_BOLTZMANN * T**4, rel=1e-10)
        assert kirchhoff_flux(T, None) == pytest.approx(black_body_flux(T), rel=1e-10)
    assert STEFAN_BOLTZMANN == pytest.approx(5.6704e-8, rel=1e-4)


def test_ideal_mirror_radiates_nothing():
    assert kirchhoff_flux(300.0, IdealMetal()) == 0.0
    with pytest.raises(ValueError):
        kirchhoff_flux(0.0, DrudeEps(GOLD))


@pytest.mark.parametrize("model", [DrudeEps(GOLD), DrudeZ(GOLD), NormalSkinZ(GOLD), Zp(GOLD)],
                         ids=lambda m: m.label)
@pytest.mark.parametrize("T", [200.0, 295.0, 400.0])
def test_emittivity_is_a_fraction(model, T):
    e = emittivity(T, model)
    assert 0.0 < e < 1.0


@pytest.mark.slow
def test_black_body_partner_reduces_to_kirchhoff():
    r = heat_flux(HeatConfig(1e-6, 320.0, 0.0, DrudeEps(GOLD), BlackBody()))
    assert r.S_EW == 0.0
    assert r.S_PW == pytest.approx(kirchhoff_flux(320.0, DrudeEps(GOLD)), rel=1e-5)


def _incoherent_limit(model, T1, T2):
    """Far-field flux between two emitters: sum over polarizations of A1 A2/(A1 + A2 - A1 A2)."""
    def inner(x):
        om = x * KB * T1 / HBAR
        p1, p2 = _Plate(model, om, T1, "natural"), _Plate(model, om, T2, "natural")

        def f(q):
            return sum(q * u * v / (u + v - u * v) for u, v in zip(p1.absorptance(1.0, q), p2.absorptance(1.0, q)))
        return om**3 * _bose_difference(om, T1, T2) * quad(f, 0, 1, points=[1e-3, 1e-2, 0.1], limit=200,
                                                          epsrel=1e-10)[0]
    val = quad(inner, 1e-6, 40, limit=400, epsrel=1e-9)[0]
    return HBAR / (4 * PI**2 * C**2) * val * KB * T1 / HBAR


@pytest.mark.slow
def test_far_field_approaches_incoherent_limit():
    model = DrudeZ(GOLD)
    lim = _incoherent_limit(model, 320.0, 300.0)
    pw = [heat_flux(HeatConfig(a, 320.0, 300.0, model)).S_PW for a in (8e-6, 16e-6)]
    assert abs(pw[1] - lim) < abs(pw[0] - lim)
    assert pw[1] == pytest.approx(lim, rel=0.15)
