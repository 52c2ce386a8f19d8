"""Generate the bundled stand-in optical table for Re Z of gold.

The table is a smooth surrogate for measured data above 0.125 eV: a Drude
term with an effective damping chosen so that Re Z(0.125 eV) = 0.00389,
plus one Lorentz oscillator mimicking the interband edge near 2.5 eV.
Real optical data can be supplied through ``--optical-table`` instead.

    python scripts/make_optical_standin.py > src/casimir_thermal/data/gold_rez_standin.txt
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

OMEGA_P = 9.0     # eV
TARGET = 0.00389  # Re Z at 0.125 eV
E0 = 0.125
# interband oscillator (eV)
W0, GL, FL = 2.9, 0.9, 25.0


def re_z(e, g):
    eps = 1 - OMEGA_P**2 / (e * (e + 1j * g)) + FL / (W0**2 - e**2 - 1j * GL * e)
    return (1 / np.sqrt(eps)).real


def main():
    g = brentq(lambda g: re_z(E0, g) - TARGET, 1e-3, 1.0, xtol=1e-15)
    energies = np.geomspace(E0, 5.0, 121)
    print("# stand-in Re Z for gold; smooth Drude + one Lorentz term, not measured data")
    print(f"# omega_p={OMEGA_P} eV, gamma_eff={g:.6f} eV, oscillator w0={W0} g={GL} f={FL}")
    print("# energy_eV  ReZ")
    for e in energies:
        print(f"{e:.6f} {re_z(e, g):.8e}")


if __name__ == "__main__":
    main()
