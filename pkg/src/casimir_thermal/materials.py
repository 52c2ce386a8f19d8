"""Material response models for metal plates.

Every model evaluates the dielectric permittivity and/or the Leontovich
surface impedance on the real frequency axis (``omega``) and on the
imaginary axis (``xi``).  All evaluators accept scalars or numpy arrays.

Units: frequencies in rad/s, conductivities in Gaussian 1/s.  Plasma
frequencies and photon energies may be given in eV through the helper
constructors.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .constants import C, HBAR_EV, PI, ev_to_rad_s

ArrayLike = Union[float, np.ndarray]

#: upper end of the frequency window in which Z_t is extrapolated (eV)
ZT_TABLE_START_EV = 0.125
#: admissible range for the Z_t junction parameter beta (eV)
ZT_BETA_RANGE_EV = (0.08, 0.125)


class ModelMismatchError(TypeError):
    """A quantity was requested from a model that does not define it."""


class FrequencyDomainError(ValueError):
    """Frequency outside the domain of an evaluator."""


class TableRangeError(FrequencyDomainError):
    """Frequency outside the coverage of an optical table."""


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class PlateParams:
    """Drude-type parameters of a metal.

    ``omega_p`` and ``gamma300`` are in rad/s.  The static conductivity and
    relaxation time follow from omega_p**2 = 4 pi gamma sigma0 = 4 pi sigma0 / tau.
    """

    omega_p: float
    gamma300: float = 5.32e13
    debye_temperature: float = 165.0
    fermi_velocity: float = 1.78e6

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("plasma frequency must be positive")
        if self.gamma300 < 0:
            raise ValueError("relaxation parameter must be nonnegative")
        if not self.debye_temperature > 0:
            raise ValueError("Debye temperature must be positive")

    @classmethod
    def from_ev(cls, omega_p_ev: float, gamma300: float = 5.32e13, **kw) -> "PlateParams":
        return cls(omega_p=ev_to_rad_s(omega_p_ev), gamma300=gamma300, **kw)

    @classmethod
    def from_parameters(cls, omega_p: Optional[float] = None, gamma: Optional[float] = None,
                        sigma0: Optional[float] = None, tau: Optional[float] = None,
                        **kw) -> "PlateParams":
        """Build from any sufficient subset of (omega_p, gamma, sigma0, tau).

        When the set is over-determined the relation omega_p**2 = 4 pi gamma sigma0
        must hold to relative 1e-6.
        """
        if gamma is not None and tau is not None:
            if not math.isclose(gamma, 1.0 / tau, rel_tol=1e-6):
                raise ValueError("gamma and tau are inconsistent (gamma != 1/tau)")
        if gamma is None and tau is not None:
            if not tau > 0:
                raise ValueError("relaxation time must be positive")
            gamma = 1.0 / tau
        if sigma0 is not None and not sigma0 > 0:
            raise ValueError("static conductivity must be positive")
        if omega_p is None:
            if gamma is None or sigma0 is None:
                raise ValueError("need omega_p, or both sigma0 and gamma/tau")
            omega_p = math.sqrt(4.0 * PI * gamma * sigma0)
        elif gamma is None:
            if sigma0 is None:
                raise ValueError("need gamma, tau or sigma0 together with omega_p")
            gamma = omega_p**2 / (4.0 * PI * sigma0)
        elif sigma0 is not None:
            if not math.isclose(omega_p**2, 4.0 * PI * gamma * sigma0, rel_tol=1e-6):
                raise ValueError("omega_p**2 = 4 pi gamma sigma0 violated")
        return cls(omega_p=omega_p, gamma300=gamma, **kw)

    @classmethod
    def from_conductivity(cls, sigma0: float, tau: float, **kw) -> "PlateParams":
        return cls.from_parameters(sigma0=sigma0, tau=tau, **kw)

    @property
    def omega_p_ev(self) -> float:
        return self.omega_p * HBAR_EV

    @property
    def sigma0(self) -> float:
        """Static conductivity at 300 K (Gaussian, 1/s)."""
        if self.gamma300 == 0:
            return math.inf
        return self.omega_p**2 / (4.0 * PI * self.gamma300)

    @property
    def tau(self) -> float:
        return math.inf if self.gamma300 == 0 else 1.0 / self.gamma300

    @property
    def plasma_wavelength(self) -> float:
        return 2.0 * PI * C / self.omega_p

    @property
    def skin_depth(self) -> float:
        """delta_i = c / omega_p."""
        return C / self.omega_p

    def rho(self, a: float) -> float:
        """rho = lambda_p / (4 pi a) = delta_i / (2a)."""
        return self.plasma_wavelength / (4.0 * PI * a)

    def relaxation_law(self, **kw) -> "RelaxationLaw":
        return RelaxationLaw(gamma300=self.gamma300, debye_temperature=self.debye_temperature, **kw)


def gold(omega_p_ev: float = 9.0, gamma300: float = 5.32e13) -> PlateParams:
    """Default gold parameters (omega_p = 9.0 eV, gamma = 5.32e13 rad/s, T_D = 165 K)."""
    return PlateParams.from_ev(omega_p_ev, gamma300=gamma300, debye_temperature=165.0,
                               fermi_velocity=1.78e6)


@dataclass(frozen=True)
class RelaxationLaw:
    """Temperature dependence of the relaxation parameter gamma(T).

    Linear above T_D/4, Bloch-Grueneisen T**5 between ``helium_temperature``
    and T_D/4, and T**2 below ``helium_temperature``.  Coefficients follow
    from gamma(300 K) = gamma300 and continuity.  ``residual`` adds a
    temperature-independent impurity contribution (0 for a perfect lattice).
    """

    gamma300: float
    debye_temperature: float = 165.0
    helium_temperature: float = 10.0
    residual: float = 0.0

    def __post_init__(self):
        if self.gamma300 < 0 or self.residual < 0:
            raise ValueError("relaxation parameters must be nonnegative")
        if not 0 < self.helium_temperature < self.debye_temperature / 4.0:
            raise ValueError("need 0 < helium_temperature < T_D/4")

    @property
    def bloch_temperature(self) -> float:
        return self.debye_temperature / 4.0

    def __call__(self, T: ArrayLike) -> ArrayLike:
        T = np.asarray(T, dtype=float)
        if np.any(T < 0):
            raise ValueError("temperature must be nonnegative")
        t_bg = self.bloch_temperature
        t_he = self.helium_temperature
        slope = self.gamma300 / 300.0
        g_bg = slope * t_bg
        g_he = g_bg * (t_he / t_bg) ** 5
        out = np.where(
            T >= t_bg,
            slope * T,
            np.where(T >= t_he, g_bg * (T / t_bg) ** 5, g_he * (T / t_he) ** 2),
        )
        out = out + self.residual
        return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# optical table


@dataclass(frozen=True, eq=False)
class OpticalTable:
    """Tabulated real part of the surface impedance, Re Z(omega).

    ``energies_ev`` strictly increasing, ``re_z`` nonnegative.
    """

    energies_ev: np.ndarray
    re_z: np.ndarray
    source: str = ""

    def __post_init__(self):
        e = np.asarray(self.energies_ev, dtype=float)
        y = np.asarray(self.re_z, dtype=float)
        if e.ndim != 1 or e.shape != y.shape:
            raise ValueError("optical table needs two columns of equal length")
        if e.size < 2:
            raise ValueError("optical table needs at least 2 rows")
        if np.any(np.diff(e) <= 0):
            raise ValueError("optical table energies must be strictly increasing")
        if np.any(y < 0):
            raise ValueError("optical table Re Z must be nonnegative")
        if e[0] > ZT_TABLE_START_EV * (1 + 1e-12):
            raise ValueError(f"optical table must start at or below {ZT_TABLE_START_EV} eV")
        e.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "energies_ev", e)
        object.__setattr__(self, "re_z", y)

    def __len__(self):
        return self.energies_ev.size

    @property
    def max_ev(self) -> float:
        return float(self.energies_ev[-1])

    def __call__(self, energy_ev: ArrayLike) -> ArrayLike:
        return np.interp(energy_ev, self.energies_ev, self.re_z)


def load_optical_table(path: Union[str, Path]) -> OpticalTable:
    """Read a two-column ``energy_eV  ReZ`` text file.

    Lines starting with ``#`` and blank lines are ignored.  Rows may be in any
    order; duplicated energies are rejected.
    """
    path = Path(path)
    rows = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
            try:
                e, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: cannot parse numbers from {s!r}") from None
            if not (math.isfinite(e) and math.isfinite(y)):
                raise ValueError(f"{path}:{lineno}: non-finite value")
            if y < 0:
                raise ValueError(f"{path}:{lineno}: negative Re Z")
            rows.append((e, y))
    if not rows:
        raise ValueError(f"{path}: empty optical table")
    rows.sort()
    e = np.array([r[0] for r in rows])
    if np.any(np.diff(e) == 0):
        dup = e[np.nonzero(np.diff(e) == 0)[0][0]]
        raise ValueError(f"{path}: duplicated energy {dup} eV")
    return OpticalTable(e, np.array([r[1] for r in rows]), source=str(path))


def default_optical_table() -> OpticalTable:
    """Bundled smooth stand-in for tabulated gold Re Z above 0.125 eV."""
    return load_optical_table(Path(__file__).parent / "data" / "gold_rez_standin.txt")


# ---------------------------------------------------------------------------
# helpers


def _check_omega(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise FrequencyDomainError("real frequency must be positive")
    return w


def _check_xi(xi) -> np.ndarray:
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0):
        raise FrequencyDomainError("imaginary frequency must be nonnegative")
    return x


def _out(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def _ir_impedance_real(omega: np.ndarray, omega_p: float) -> np.ndarray:
    """-i omega / sqrt(omega_p^2 - omega^2), continued as omega/sqrt(omega^2-omega_p^2) above omega_p."""
    d = omega_p**2 - omega**2
    root = np.where(d >= 0, np.sqrt(np.abs(d)) + 0j, -1j * np.sqrt(np.abs(d)))
    with np.errstate(divide="ignore", invalid="ignore"):
        return -1j * omega / root


def _ir_impedance_imag(xi: np.ndarray, omega_p: float) -> np.ndarray:
    return xi / np.sqrt(omega_p**2 + xi**2)


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class ResponseModel:
    """Base class.  Subclasses set ``uses_impedance`` to select the form of the
    reflection coefficients used by the Lifshitz and heat-transfer routes."""

    name = "model"
    uses_impedance = True
    dissipative = False
    temperature_dependent = False

    @property
    def label(self) -> str:
        return self.name

    def eps_imag(self, xi, T: float = 300.0):
        raise ModelMismatchError(f"{self.name} has no permittivity on the imaginary axis")

    def eps_real(self, omega, T: float = 300.0):
        z = self.impedance_real(omega, T)
        return _out(1.0 / np.asarray(z) ** 2)

    def impedance_imag(self, xi, T: float = 300.0):
        raise NotImplementedError

    def impedance_real(self, omega, T: float = 300.0):
        raise NotImplementedError

    def impedance_slope0(self, T: float = 300.0) -> float:
        """lim_{xi->0} Z(i xi)/xi; fixes the exact zero-frequency TE reflection."""
        raise NotImplementedError

    @property
    def omega_p(self) -> Optional[float]:
        p = getattr(self, "params", None)
        return None if p is None else p.omega_p


@dataclass(frozen=True)
class IdealMetal(ResponseModel):
    name = "ideal"

    def eps_imag(self, xi, T=300.0):
        x = _check_xi(xi)
        return _out(np.full_like(x, np.inf))

    def eps_real(self, omega, T=300.0):
        w = _check_omega(omega)
        return _out(np.full_like(w, np.inf, dtype=complex))

    def impedance_imag(self, xi, T=300.0):
        return _out(np.zeros_like(_check_xi(xi)))

    def impedance_real(self, omega, T=300.0):
        return _out(np.zeros_like(_check_omega(omega), dtype=complex))

    def impedance_slope0(self, T=300.0):
        return 0.0


@dataclass(frozen=True)
class PlasmaEps(ResponseModel):
    """Plasma-model permittivity eps = 1 - omega_p^2/omega^2."""

    params: PlateParams
    name = "plasma"
    uses_impedance = False

    def eps_imag(self, xi, T=300.0):
        x = _check_xi(xi)
        with np.errstate(divide="ignore"):
            return _out(1.0 + self.params.omega_p**2 / x**2)

    def eps_real(self, omega, T=300.0):
        w = _check_omega(omega)
        return _out(1.0 - self.params.omega_p**2 / w**2 + 0j)

    def impedance_imag(self, xi, T=300.0):
        return _out(_ir_impedance_imag(_check_xi(xi), self.params.omega_p))

    def impedance_real(self, omega, T=300.0):
        return _out(_ir_impedance_real(_check_omega(omega), self.params.omega_p))

    def impedance_slope0(self, T=300.0):
        return 1.0 / self.params.omega_p


@dataclass(frozen=True)
class InfraredZ(ResponseModel):
    """Impedance of infrared optics, Z_i = -i omega / sqrt(omega_p^2 - omega^2)."""

    params: PlateParams
    name = "ir"

    def impedance_imag(self, xi, T=300.0):
        return _out(_ir_impedance_imag(_check_xi(xi), self.params.omega_p))

    def impedance_real(self, omega, T=300.0):
        return _out(_ir_impedance_real(_check_omega(omega), self.params.omega_p))

    def impedance_slope0(self, T=300.0):
        return 1.0 / self.params.omega_p


class _RelaxingMixin:
    def gamma(self, T: float) -> float:
        law = self.relaxation if self.relaxation is not None else self.params.relaxation_law()
        return float(law(T))


@dataclass(frozen=True)
class DrudeEps(_RelaxingMixin, ResponseModel):
    """Drude permittivity eps = 1 - omega_p^2 / [omega (omega + i gamma(T))]."""

    params: PlateParams
    relaxation: Optional[RelaxationLaw] = None
    name = "drude-eps"
    uses_impedance = False
    dissipative = True
    temperature_dependent = True

    def eps_imag(self, xi, T=300.0):
        x = _check_xi(xi)
        g = self.gamma(T)
        with np.errstate(divide="ignore"):
            return _out(1.0 + self.params.omega_p**2 / (x * (x + g)))

    def eps_real(self, omega, T=300.0):
        w = _check_omega(omega)
        g = self.gamma(T)
        return _out(1.0 - self.params.omega_p**2 / (w * (w + 1j * g)))

    def impedance_imag(self, xi, T=300.0):
        x = _check_xi(xi)
        g = self.gamma(T)
        wp2 = self.params.omega_p**2
        # 1/sqrt(1 + wp^2/(x(x+g))) written to stay finite at x = 0
        return _out(np.sqrt(x * (x + g) / (x * (x + g) + wp2)))

    def impedance_real(self, omega, T=300.0):
        return _out(1.0 / np.sqrt(np.asarray(self.eps_real(omega, T))))

    def impedance_slope0(self, T=300.0):
        return math.inf if self.gamma(T) > 0 else 1.0 / self.params.omega_p

    @property
    def dissipative(self):  # type: ignore[override]
        return self.params.gamma300 > 0 or (self.relaxation is not None and self.relaxation.gamma300 > 0)


@dataclass(frozen=True)
class DrudeZ(DrudeEps):
    """Leontovich impedance of the Drude model, Z_D = 1/sqrt(eps_D)."""

    name = "drude-z"
    uses_impedance = True


@dataclass(frozen=True)
class NormalSkinZ(_RelaxingMixin, ResponseModel):
    """Normal-skin-effect impedance Z_N = (1 - i) sqrt(omega / (8 pi sigma0(T))).

    sigma0(T) = omega_p^2 / (4 pi gamma(T)).  On the imaginary axis the
    analytic continuation is real: Z_N(i xi) = sqrt(xi / (4 pi sigma0)).
    """

    params: PlateParams
    relaxation: Optional[RelaxationLaw] = None
    name = "normal-skin"
    dissipative = True
    temperature_dependent = True

    def sigma0(self, T: float) -> float:
        return self.params.omega_p**2 / (4.0 * PI * self.gamma(T))

    def impedance_imag(self, xi, T=300.0):
        x = _check_xi(xi)
        return _out(np.sqrt(x / (4.0 * PI * self.sigma0(T))))

    def impedance_real(self, omega, T=300.0):
        w = _check_omega(omega)
        return _out((1.0 - 1.0j) * np.sqrt(w / (8.0 * PI * self.sigma0(T))))

    def eps_real(self, omega, T=300.0):
        w = _check_omega(omega)
        return _out(1j * 4.0 * PI * self.sigma0(T) / w)

    def impedance_slope0(self, T=300.0):
        return math.inf


@dataclass(frozen=True)
class Zp(ResponseModel):
    """Infrared impedance with a small real part, Z_p = C omega^2 - i omega/sqrt(omega_p^2 - omega^2).

    ``c_ev2`` is C in eV^-2 (0.004 for gold).
    """

    params: PlateParams
    c_ev2: float = 0.004
    name = "zp"

    def __post_init__(self):
        if self.c_ev2 < 0:
            raise ValueError("C must be nonnegative")

    @property
    def dissipative(self):  # type: ignore[override]
        return self.c_ev2 > 0

    @property
    def _c(self) -> float:
        return self.c_ev2 * HBAR_EV**2

    def impedance_imag(self, xi, T=300.0):
        x = _check_xi(xi)
        return _out(-self._c * x**2 + _ir_impedance_imag(x, self.params.omega_p))

    def impedance_real(self, omega, T=300.0):
        w = _check_omega(omega)
        return _out(self._c * w**2 + _ir_impedance_real(w, self.params.omega_p))

    def impedance_slope0(self, T=300.0):
        return 1.0 / self.params.omega_p


@dataclass(frozen=True)
class Zt(ResponseModel):
    """Infrared impedance whose real part follows tabulated optical data.

    Re Z_t = B sin(pi omega^2 / 2 beta^2) below beta, B up to 0.125 eV and the
    interpolated table above.  The imaginary part is that of infrared optics.
    On the imaginary axis the model coincides with :class:`InfraredZ`.

    ``B`` defaults to the table value at 0.125 eV so that Re Z is continuous.
    ``extrapolate`` ("hold") keeps the last table value beyond its coverage;
    by default such frequencies raise :class:`TableRangeError`.
    """

    params: PlateParams
    beta_ev: float = 0.125
    table: OpticalTable = field(default_factory=default_optical_table)
    B: Optional[float] = None
    extrapolate: Optional[str] = None
    name = "zt"
    dissipative = True

    def __post_init__(self):
        lo, hi = ZT_BETA_RANGE_EV
        if not (lo - 1e-12 <= self.beta_ev <= hi + 1e-12):
            raise ValueError(f"beta must lie in [{lo}, {hi}] eV, got {self.beta_ev}")
        if self.extrapolate not in (None, "hold"):
            raise ValueError("extrapolate must be None or 'hold'")
        y0 = float(self.table(ZT_TABLE_START_EV))
        if self.B is None:
            object.__setattr__(self, "B", y0)
        elif not math.isclose(self.B, y0, rel_tol=1e-3):
            warnings.warn(f"B={self.B} differs from table value {y0:.6g} at 0.125 eV; "
                          "Re Z_t is discontinuous there", stacklevel=2)

    @property
    def label(self) -> str:
        return f"zt(beta={self.beta_ev:g})"

    def re_impedance(self, omega) -> np.ndarray:
        e = np.asarray(omega, dtype=float) * HBAR_EV
        if self.extrapolate is None and np.any(e > self.table.max_ev):
            raise TableRangeError(
                f"Z_t requested at {np.max(e):.4g} eV beyond table coverage {self.table.max_ev:.4g} eV")
        ramp = self.B * np.sin(0.5 * PI * (e / self.beta_ev) ** 2)
        tab = self.table(np.clip(e, None, self.table.max_ev))
        return np.where(e <= self.beta_ev, ramp, np.where(e <= ZT_TABLE_START_EV, self.B, tab))

    def impedance_real(self, omega, T=300.0):
        w = _check_omega(omega)
        return _out(self.re_impedance(w) + _ir_impedance_real(w, self.params.omega_p))

    def impedance_imag(self, xi, T=300.0):
        return _out(_ir_impedance_imag(_check_xi(xi), self.params.omega_p))

    def impedance_slope0(self, T=300.0):
        return 1.0 / self.params.omega_p


MODEL_NAMES = ("ideal", "plasma", "ir", "drude-eps", "drude-z", "normal-skin", "zp", "zt")


def make_model(name: str, params: Optional[PlateParams] = None, **kw) -> ResponseModel:
    """Construct a model by its short name (see ``MODEL_NAMES``)."""
    params = params if params is not None else gold()
    factories: dict[str, Callable[..., ResponseModel]] = {
        "ideal": lambda: IdealMetal(),
        "plasma": lambda: PlasmaEps(params),
        "ir": lambda: InfraredZ(params),
        "drude-eps": lambda: DrudeEps(params, **kw),
        "drude-z": lambda: DrudeZ(params, **kw),
        "normal-skin": lambda: NormalSkinZ(params, **kw),
        "zp": lambda: Zp(params, **kw),
        "zt": lambda: Zt(params, **kw),
    }
    try:
        return factories[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}") from None


# ---------------------------------------------------------------------------
# module-level operations


def eps_imag(model: ResponseModel, xi, T: float = 300.0):
    if np.any(np.asarray(xi) <= 0):
        raise FrequencyDomainError("eps_imag needs xi > 0")
    return model.eps_imag(xi, T)


def impedance_imag(model: ResponseModel, xi, T: float = 300.0):
    return model.impedance_imag(xi, T)


def impedance_real(model: ResponseModel, omega, T: float = 300.0):
    return model.impedance_real(omega, T)


def eps_real(model: ResponseModel, omega, T: float = 300.0):
    return model.eps_real(omega, T)


def ac_conductivity(sigma0: float, tau: float, omega):
    """sigma(omega) = sigma0 / (1 - i tau omega)."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise FrequencyDomainError("omega must be nonnegative")
    return _out(sigma0 / (1.0 - 1j * tau * w))


INFRARED_OPTICS = "infrared-optics"
NORMAL_SKIN = "normal-skin"
NEITHER = "neither"


def classify_regime(omega: float, T: float, params: PlateParams,
                    v_F: Optional[float] = None, mean_free_path: Optional[float] = None,
                    margin: float = 1.5) -> str:
    """Tag a frequency as infrared optics, normal skin effect, or neither.

    Each strong inequality ``x << y`` is read as ``margin * x <= y``.  The
    mean free path defaults to v_F / gamma(T).
    """
    if not (omega > 0 and T > 0):
        raise ValueError("omega and T must be positive")
    if margin < 1:
        raise ValueError("margin must be >= 1")
    v_F = params.fermi_velocity if v_F is None else v_F
    gamma = params.relaxation_law()(T)
    if mean_free_path is None:
        mean_free_path = math.inf if gamma == 0 else v_F / gamma
    sigma0 = math.inf if gamma == 0 else params.omega_p**2 / (4.0 * PI * gamma)
    delta_i = params.skin_depth
    delta_n = C / math.sqrt(2.0 * PI * sigma0 * omega)
    ell = mean_free_path
    infrared = (margin * v_F / omega <= delta_i and margin * delta_i <= ell
                and margin * omega <= params.omega_p)
    normal = margin * ell <= delta_n and margin * ell <= v_F / omega
    if infrared:
        return INFRARED_OPTICS
    if normal:
        return NORMAL_SKIN
    return NEITHER
