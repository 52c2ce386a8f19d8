"""Command-line front end: tables, figure data, Nernst ladders, pressures and heat fluxes as CSV.

Every output starts with ``#`` comment lines that record the full
configuration, so a CSV file is enough to reproduce itself.

Exit codes: 0 success, 1 usage error, 2 computation did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .asymptotics import DEFAULT_LADDER, nernst_test
from .heat_transfer import (DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT, HeatConfig, emittivity,
                            heat_flux)
from .lifshitz import (EXPERIMENT_MPA, IMAGINARY, REAL, Geometry, channel_decomposition,
                       ideal_metal_reference, thermal_correction, zero_point_parts)
from .materials import (MODEL_NAMES, PlateParams, Zt, load_optical_table, make_model)
from .numerics import ConvergenceError

EXIT_OK, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2

TABLE_SEPARATIONS_UM = (0.2, 0.25, 0.3, 0.35, 0.4, 1.0)
#: conductivity and relaxation time quoted for the normal-skin table
TABLE1_SIGMA0 = 3e17
TABLE1_TAU = 1.88e-14
MEASURED_EMITTIVITY = 0.02
FIG_MODELS = ("drude-eps", "normal-skin", "drude-z", "zt:0.08", "zt:0.125")
TABLE3_MODELS = ("drude-eps", "normal-skin", "drude-z", "zt:0.08", "zt:0.125", "zp")
COMMANDS = ("table1", "table2", "table3", "fig3", "fig4", "nernst", "pressure", "heat")

_DEFAULTS = {
    "table1": dict(model="normal-skin", t1=300.0, formulation=REAL),
    "table2": dict(model="zp", t1=300.0, formulation=REAL),
    "table3": dict(t1=295.0),
    "fig3": dict(t1=320.0, t2=300.0, a_min=0.2, a_max=1.0, a_steps=5, formulation=DIELECTRIC),
    "fig4": dict(t1=320.0, t2=300.0, a_min=0.2, a_max=1.0, a_steps=5, formulation=DIELECTRIC),
    "nernst": dict(model="ir", a_min=0.5),
    "pressure": dict(model="normal-skin", t1=300.0, formulation=IMAGINARY),
    "heat": dict(model="drude-z", t1=320.0, t2=300.0, a_min=0.5, formulation=DIELECTRIC),
}
_FORMULATIONS = {
    "table1": (IMAGINARY, REAL), "table2": (IMAGINARY, REAL), "pressure": (IMAGINARY, REAL),
    "fig3": (DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT), "fig4": (DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT),
    "heat": (DIELECTRIC, IMPEDANCE, IMPEDANCE_SPLIT), "table3": (), "nernst": (IMAGINARY,),
}


class UsageError(Exception):
    """Invalid command line or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Resolved configuration of one command."""

    command: str
    model: Optional[str] = None
    model2: Optional[str] = None
    a_um: tuple = ()
    t1: Optional[float] = None
    t2: Optional[float] = None
    beta: Optional[float] = None
    optical_table: Optional[str] = None
    omega_p_ev: Optional[float] = None
    gamma: Optional[float] = None
    sigma0: Optional[float] = None
    formulation: Optional[str] = None
    tol: Optional[float] = None
    ladder: tuple = ()
    out: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def header(self) -> list:
        keys = ["command", "model", "model2", "a_um", "t1", "t2", "beta", "optical_table",
                "omega_p_ev", "gamma", "sigma0", "formulation", "tol", "ladder"]
        lines = [f"casimir-thermal {__version__}"]
        for k in keys:
            v = getattr(self, k)
            if v is None or v == ():
                continue
            if isinstance(v, tuple):
                v = ",".join(f"{x:g}" for x in v)
            lines.append(f"{k} = {v}")
        lines += [f"{k} = {v}" for k, v in sorted(self.extra.items())]
        return lines

    # -- materials --------------------------------------------------------

    def params(self) -> PlateParams:
        omega_p = None if self.omega_p_ev is None else PlateParams.from_ev(self.omega_p_ev).omega_p
        gamma, sigma0 = self.gamma, self.sigma0
        if self.command == "table1" and sigma0 is None and omega_p is None:
            sigma0 = TABLE1_SIGMA0
            gamma = 1.0 / TABLE1_TAU if gamma is None else gamma
        try:
            if sigma0 is None:
                return PlateParams(omega_p if omega_p is not None else PlateParams.from_ev(9.0).omega_p,
                                   gamma if gamma is not None else 5.32e13)
            if omega_p is None and gamma is None:
                gamma = 5.32e13
            return PlateParams.from_parameters(omega_p=omega_p, gamma=gamma, sigma0=sigma0)
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def build_model(self, spec: str):
        """Model from ``name`` or ``zt:beta``; Z_t honours --beta and --optical-table."""
        name, _, beta = spec.partition(":")
        if name not in MODEL_NAMES:
            raise UsageError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")
        params = self.params()
        if name != "zt":
            return make_model(name, params)
        kw = {}
        if self.optical_table:
            try:
                kw["table"] = load_optical_table(self.optical_table)
            except (OSError, ValueError) as exc:
                raise UsageError(f"cannot read optical table: {exc}") from None
        b = float(beta) if beta else (self.beta if self.beta is not None else 0.125)
        try:
            return Zt(params, beta_ev=b, **kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# output

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x) if x == 0 else f"{x:.10g}"


def write_csv(cfg: RunConfig, columns: Sequence[str], rows: Sequence[Sequence], notes: Sequence[str] = (),
              stream=None) -> str:
    buf = io.StringIO()
    for line in cfg.header() + list(notes):
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    text = buf.getvalue()
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        (stream or sys.stdout).write(text)
    return text


def _with_status(columns, rows, flags):
    """Append a status column when any row failed to converge."""
    if all(flags):
        return list(columns), rows, EXIT_OK
    rows = [list(r) + ["ok" if f else "not-converged"] for r, f in zip(rows, flags)]
    return list(columns) + ["status"], rows, EXIT_NONCONVERGED


# ---------------------------------------------------------------------------
# commands

def cmd_table(cfg: RunConfig) -> int:
    columns = ("a_um", "dP_mPa", "ratio_ideal", "fTE_EW", "fTE_PW", "fTM_EW", "fTM_PW")
    T = cfg.t1
    rows, flags = [], []
    kw = {} if cfg.tol is None else {"rtol": cfg.tol}
    for a_um in cfg.a_um:
        geom = Geometry(a_um * 1e-6, T, cfg.build_model(cfg.model))
        br = channel_decomposition(geom, P0=0.0, **kw)
        dP, ratio = br.dP, br.ratio_to_ideal
        if cfg.formulation == IMAGINARY:
            dP = thermal_correction(geom).dP
            ratio = dP / ideal_metal_reference(geom.a, T)[0]
        f = br.fractions()
        rows.append((a_um, dP * 1e3, ratio, f["TE_EW"], f["TE_PW"], f["TM_EW"], f["TM_PW"]))
        flags.append(br.converged)
    columns, rows, code = _with_status(columns, rows, flags)
    notes = ["channel fractions are from the real-frequency decomposition"]
    write_csv(cfg, columns, rows, notes)
    return code


def cmd_table3(cfg: RunConfig) -> int:
    models = (cfg.model,) if cfg.model else TABLE3_MODELS
    rows = []
    for spec in models:
        m = cfg.build_model(spec)
        rows.append((m.label, cfg.t1, emittivity(cfg.t1, m), MEASURED_EMITTIVITY))
    write_csv(cfg, ("model", "T_K", "emittivity", "measured"), rows)
    return EXIT_OK


def _fig(cfg: RunConfig, fraction: bool) -> int:
    models = (cfg.model,) if cfg.model else FIG_MODELS
    built = [cfg.build_model(s) for s in models]
    prefix = "fTE_EW_" if fraction else "S_"
    columns = ["a_um"] + [prefix + m.label for m in built]
    rows, flags = [], []
    kw = {} if cfg.tol is None else {"rtol": cfg.tol}
    for a_um in cfg.a_um:
        row, ok = [a_um], True
        for m in built:
            res = heat_flux(HeatConfig(a_um * 1e-6, cfg.t1, cfg.t2, m), cfg.formulation, **kw)
            ok &= res.converged
            if fraction:
                row.append(res.te_ew / res.S_total if res.S_total != 0 else math.nan)
            else:
                row.append(res.S_total)
        rows.append(row)
        flags.append(ok)
    columns, rows, code = _with_status(columns, rows, flags)
    write_csv(cfg, columns, rows, ["S in W/m^2"] if not fraction else [])
    return code


def cmd_nernst(cfg: RunConfig) -> int:
    model = cfg.build_model(cfg.model)
    ladder = cfg.ladder or DEFAULT_LADDER
    try:
        rep = nernst_test(model, cfg.a_um[0] * 1e-6, ladder, params=cfg.params())
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    notes = [f"verdict = {rep.verdict}", f"s0 = {_fmt(rep.s0)}", f"s2 = {_fmt(rep.s2)}",
             f"scale = {_fmt(rep.scale)}", f"S_D(a,0) = {_fmt(rep.prediction)}"]
    notes += [f"diagnostic: {d}" for d in rep.diagnostics]
    rows = [(p.T, p.F_numeric, p.F_asymptotic, p.S_numeric, p.S_asymptotic) for p in rep.points]
    write_csv(cfg, ("T_K", "F_numeric", "F_asymptotic", "S_numeric", "S_asymptotic"), rows, notes)
    print(f"{rep.model}: {rep.verdict} (s0 = {rep.s0:.4g} J/(m^2 K))", file=sys.stderr)
    return EXIT_OK


def cmd_pressure(cfg: RunConfig) -> int:
    columns = ["a_um", "P0_mPa", "dP_mPa", "P_total_mPa", "P_exp_mPa", "delta_exp_mPa"]
    rows, flags = [], []
    kw = {} if cfg.tol is None or cfg.formulation != REAL else {"rtol": cfg.tol}
    for a_um in cfg.a_um:
        geom = Geometry(a_um * 1e-6, cfg.t1, cfg.build_model(cfg.model))
        P0 = zero_point_parts(geom)[1]
        dP = thermal_correction(geom, cfg.formulation, **kw).dP if cfg.t1 > 0 else 0.0
        tot = (P0 + dP) * 1e3
        exp = next((v for k, v in EXPERIMENT_MPA.items() if math.isclose(k, a_um * 1e-6, rel_tol=1e-9)), None)
        delta = None if exp is None else abs(tot) - exp
        rows.append((a_um, P0 * 1e3, dP * 1e3, tot, exp, delta))
        flags.append(all(math.isfinite(x) for x in (P0, dP)))
    columns, rows, code = _with_status(columns, rows, flags)
    write_csv(cfg, columns, rows, ["P0 from the imaginary-frequency route; negative is attraction"])
    return code


def cmd_heat(cfg: RunConfig) -> int:
    m1 = cfg.build_model(cfg.model)
    m2 = cfg.build_model(cfg.model2) if cfg.model2 else None
    columns = ["a_um", "S_total", "S_PW", "S_EW", "S_TE_PW", "S_TM_PW", "S_TE_EW", "S_TM_EW"]
    rows, flags = [], []
    kw = {} if cfg.tol is None else {"rtol": cfg.tol}
    for a_um in cfg.a_um:
        r = heat_flux(HeatConfig(a_um * 1e-6, cfg.t1, cfg.t2, m1, m2), cfg.formulation, **kw)
        rows.append((a_um, r.S_total, r.S_PW, r.S_EW, r.te_pw, r.tm_pw, r.te_ew, r.tm_ew))
        flags.append(r.converged)
    columns, rows, code = _with_status(columns, rows, flags)
    write_csv(cfg, columns, rows, ["fluxes in W/m^2 from plate 1 to plate 2"])
    return code


_HANDLERS: dict = {
    "table1": cmd_table, "table2": cmd_table, "table3": cmd_table3,
    "fig3": lambda c: _fig(c, False), "fig4": lambda c: _fig(c, True),
    "nernst": cmd_nernst, "pressure": cmd_pressure, "heat": cmd_heat,
}


# ---------------------------------------------------------------------------
# argument handling

def read_config_file(path: str) -> dict:
    """key = value lines; '#' starts a comment; dashes and underscores are equivalent."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="casimir-thermal", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key=value file; command-line flags take precedence")
        s.add_argument("--a-min", type=float, help="smallest separation (um)")
        s.add_argument("--a-max", type=float, help="largest separation (um)")
        s.add_argument("--a-steps", type=int, help="number of separations")
        s.add_argument("--t1", type=float, help="temperature (K); plate 1 for heat transfer")
        s.add_argument("--t2", type=float, help="temperature of plate 2 (K)")
        s.add_argument("--model", help=f"one of {', '.join(MODEL_NAMES)} (zt accepts zt:BETA)")
        s.add_argument("--model2", help="model of plate 2 (heat)")
        s.add_argument("--beta", type=float, help="Z_t ramp width (eV)")
        s.add_argument("--optical-table", help="two-column file: energy (eV), Re Z")
        s.add_argument("--omega-p-ev", type=float, help="plasma frequency (eV)")
        s.add_argument("--gamma", type=float, help="relaxation parameter at 300 K (rad/s)")
        s.add_argument("--sigma0", type=float, help="static conductivity at 300 K (1/s)")
        s.add_argument("--formulation", help="imaginary|real (Casimir); dielectric|impedance|impedance-split (heat)")
        s.add_argument("--tol", type=float, help="relative tolerance of the real-frequency integrals")
        s.add_argument("--ladder", help="comma-separated descending temperatures (nernst)")
        s.add_argument("--out", help="output CSV path (default stdout)")
    return p


_FLOAT_KEYS = ("a_min", "a_max", "t1", "t2", "beta", "omega_p_ev", "gamma", "sigma0", "tol")


def resolve(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.command
    merged = dict(_DEFAULTS[cmd])
    if ns.config:
        for k, v in read_config_file(ns.config).items():
            if k not in vars(ns) or k in ("config", "command"):
                raise UsageError(f"unknown config key {k!r}")
            try:
                merged[k] = int(v) if k == "a_steps" else float(v) if k in _FLOAT_KEYS else v
            except ValueError:
                raise UsageError(f"bad value for {k}: {v!r}") from None
    merged.update({k: v for k, v in vars(ns).items() if v is not None and k not in ("config", "command")})

    if cmd == "table3":
        a_um = ()
    elif cmd in ("table1", "table2", "pressure") and not any(k in merged for k in ("a_min", "a_max", "a_steps")):
        a_um = TABLE_SEPARATIONS_UM if cmd != "pressure" else (0.2, 0.3)
    else:
        a_min = merged.get("a_min")
        a_max = merged.get("a_max", a_min)
        steps = merged.get("a_steps", 1 if a_max == a_min else 2)
        if a_min is None or a_max is None or steps is None or steps < 1:
            raise UsageError("separation range is empty")
        if not 0 < a_min <= a_max or (steps == 1 and a_max != a_min):
            raise UsageError("separation range is empty or invalid")
        a_um = tuple(float(x) for x in np.linspace(a_min, a_max, steps))

    form = merged.get("formulation")
    allowed = _FORMULATIONS[cmd]
    if form is not None and allowed and form not in allowed:
        raise UsageError(f"{cmd} supports --formulation {'|'.join(allowed)}")
    for key in ("t1", "t2"):
        if key in merged and merged[key] < 0:
            raise UsageError("temperatures must be non-negative")
    if cmd in ("fig3", "fig4", "heat") and ("t1" not in merged or "t2" not in merged):
        raise UsageError("heat transfer needs --t1 and --t2")
    if merged.get("tol") is not None and not merged["tol"] > 0:
        raise UsageError("--tol must be positive")

    ladder = ()
    if merged.get("ladder"):
        try:
            ladder = tuple(float(x) for x in str(merged["ladder"]).split(","))
        except ValueError:
            raise UsageError("--ladder must be comma-separated numbers") from None

    return RunConfig(command=cmd, model=merged.get("model"), model2=merged.get("model2"), a_um=a_um,
                     t1=merged.get("t1"), t2=merged.get("t2"), beta=merged.get("beta"),
                     optical_table=merged.get("optical_table"), omega_p_ev=merged.get("omega_p_ev"),
                     gamma=merged.get("gamma"), sigma0=merged.get("sigma0"), formulation=form,
                     tol=merged.get("tol"), ladder=ladder, out=merged.get("out"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve(ns)
        return _HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"casimir-thermal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"casimir-thermal: not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
