"""INI-style run configuration and the case library.

Sections: ``[gas]``, ``[grid]``, ``[mesh]``, ``[case]``, ``[output]``.  Unknown
sections or keys are errors.  Every value records where it came from
(``default``, ``file`` or ``cli``).
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .collide_bgk import TauLaw
from .errors import ConfigError
from .state import ReducedState, equilibrium_state
from .thermo import EnergyModel, Gas, default_gas
from .transport import RunConfig, SpatialMesh, WallSpec
from .vgrid import build_grid

CASES = ("relax", "couette", "fourier", "sod", "custom")
GAS_KINDS = ("monatomic", "rotational-linear", "harmonic-vibrational", "rot-vib",
             "tabulated", "polynomial")


def _floats(text):
    return [float(t) for t in str(text).replace(",", " ").split()]


# key -> (parser, default); a default of None means "no default"
SCHEMA = {
    "gas": {
        "kind": (str, "rotational-linear"),
        "R": (float, 1.0),
        "T0": (float, 2.0),
        "table": (str, None),
        "coefficients": (_floats, None),
        "T_min": (float, None),
        "T_max": (float, None),
    },
    "grid": {
        "n": (_floats, [32.0]),
        "span": (_floats, [6.0]),
        "center": (_floats, [0.0, 0.0, 0.0]),
        "T_ref": (float, 1.0),
    },
    "mesh": {
        "n_cells": (int, None),
        "x_min": (float, -0.5),
        "x_max": (float, 0.5),
        "boundary": (str, None),
    },
    "case": {
        "name": (str, "relax"),
        "model": (str, "bgk"),
        "kn": (float, 1.0),
        "tau": (float, 1.0),
        "tau_law": (str, "constant"),
        "mu_ref": (float, 1.0),
        "omega": (float, 0.0),
        "T_ref": (float, 1.0),
        "t_end": (float, None),
        "cfl": (float, 0.9),
        "dt_max": (float, float("inf")),
        "splitting": (str, "strang"),
        "order": (int, 2),
        "rho": (float, 1.0),
        "u": (_floats, [0.0, 0.0, 0.0]),
        "T": (float, 1.0),
        "T_wall": (float, 1.0),
        "u_wall": (float, None),
        "dT": (float, None),
        "amplitude": (float, 0.0),
        "wavenumber": (int, 1),
        "rho_left": (float, 1.0),
        "p_left": (float, 1.0),
        "rho_right": (float, 0.125),
        "p_right": (float, 0.1),
        "seed": (int, 12345),
    },
    "output": {
        "directory": (str, "output"),
        "snapshots": (int, 1),
        "diag_every": (int, 0),
    },
}


@dataclass
class SolverConfig:
    """Validated configuration plus the provenance of every value."""

    values: dict
    provenance: dict
    source: str | None = None

    def __getitem__(self, key):
        sec, k = key.split(".")
        return self.values[sec][k]

    def effective_text(self):
        lines = []
        for sec in SCHEMA:
            lines.append(f"[{sec}]")
            for k, v in self.values[sec].items():
                if v is None:
                    continue
                if isinstance(v, list):
                    v = " ".join(repr(x) for x in v)
                lines.append(f"{k} = {v}    ; {self.provenance[sec][k]}")
            lines.append("")
        return "\n".join(lines)

    def hash(self):
        payload = json.dumps(self.values, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()

    def write_effective(self, directory):
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "effective_config.ini").write_text(self.effective_text())


def parse_config(path=None, overrides=None, text=None) -> SolverConfig:
    """Read, validate and default a configuration.

    ``overrides`` maps ``"section.key"`` to a value and beats the file.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    if text is not None:
        cp.read_string(text)
    elif path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file {p} not found", "config")
        cp.read(p)
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    prov = {s: {k: "default" for k in keys} for s, keys in SCHEMA.items()}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", sec)
        for k, raw in cp.items(sec):
            if k not in SCHEMA[sec]:
                raise ConfigError(f"unknown key", f"[{sec}].{k}")
            values[sec][k] = _parse(sec, k, raw)
            prov[sec][k] = "file"
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        sec, k = key.split(".")
        if sec not in SCHEMA or k not in SCHEMA[sec]:
            raise ConfigError("unknown override", f"[{sec}].{k}")
        values[sec][k] = _parse(sec, k, val) if isinstance(val, str) else val
        prov[sec][k] = "cli"
    cfg = SolverConfig(values, prov, str(path) if path else None)
    _apply_case_defaults(cfg)
    _validate(cfg)
    return cfg


def _parse(sec, k, raw):
    fn = SCHEMA[sec][k][0]
    try:
        return fn(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse {raw!r}: {exc}", f"[{sec}].{k}") from exc


CASE_DEFAULTS = {
    "relax": {"mesh.n_cells": 1, "mesh.boundary": "periodic", "case.t_end": 5.0},
    "couette": {"mesh.n_cells": 100, "mesh.boundary": "diffuse-wall", "case.t_end": 2.0,
                "case.kn": 0.005},
    "fourier": {"mesh.n_cells": 100, "mesh.boundary": "diffuse-wall", "case.t_end": 2.0,
                "case.kn": 0.005},
    "sod": {"mesh.n_cells": 200, "mesh.boundary": "inflow-outflow", "case.t_end": 0.2,
            "case.kn": 0.01, "grid.n": [48.0, 16.0, 16.0], "grid.span": [7.5, 6.6, 6.6]},
    "custom": {"mesh.n_cells": 64, "mesh.boundary": "periodic", "case.t_end": 1.0},
}


def _apply_case_defaults(cfg):
    name = cfg.values["case"]["name"]
    if name not in CASES:
        raise ConfigError(f"unknown case {name!r}; expected one of {CASES}", "[case].name")
    for key, val in CASE_DEFAULTS[name].items():
        sec, k = key.split(".")
        if cfg.provenance[sec][k] == "default":
            cfg.values[sec][k] = val
            cfg.provenance[sec][k] = f"default ({name})"


def _validate(cfg):
    v = cfg.values
    c, g, m = v["case"], v["grid"], v["mesh"]
    def need(cond, msg, key):
        if not cond:
            raise ConfigError(msg, key)
    need(v["gas"]["kind"] in GAS_KINDS, f"unknown gas kind; expected one of {GAS_KINDS}",
         "[gas].kind")
    need(v["gas"]["R"] > 0, "must be positive", "[gas].R")
    need(c["model"] in ("bgk", "fp"), "expected bgk or fp", "[case].model")
    need(c["kn"] > 0, "must be positive", "[case].kn")
    need(c["tau"] > 0, "must be positive", "[case].tau")
    need(c["tau_law"] in ("constant", "power"), "expected constant or power", "[case].tau_law")
    need(c["t_end"] is not None and c["t_end"] > 0, "must be positive", "[case].t_end")
    need(0 < c["cfl"] <= 1, "must lie in (0, 1]", "[case].cfl")
    need(c["splitting"] in ("strang", "lie"), "expected strang or lie", "[case].splitting")
    need(c["order"] in (1, 2), "expected 1 or 2", "[case].order")
    need(c["rho"] > 0 and c["T"] > 0, "initial density and temperature must be positive",
         "[case].T")
    need(len(c["u"]) == 3, "needs three components", "[case].u")
    need(len(g["n"]) in (1, 3) and min(g["n"]) >= 8, "needs 1 or 3 values >= 8", "[grid].n")
    need(len(g["span"]) in (1, 3) and min(g["span"]) >= 3, "needs 1 or 3 values >= 3",
         "[grid].span")
    need(len(g["center"]) == 3, "needs three components", "[grid].center")
    need(g["T_ref"] > 0, "must be positive", "[grid].T_ref")
    need(m["n_cells"] >= 1, "must be >= 1", "[mesh].n_cells")
    need(m["x_max"] > m["x_min"], "must exceed x_min", "[mesh].x_max")
    need(m["boundary"] in ("periodic", "diffuse-wall", "inflow-outflow"),
         "expected periodic, diffuse-wall or inflow-outflow", "[mesh].boundary")
    need(v["output"]["snapshots"] >= 0, "must be >= 0", "[output].snapshots")
    name = c["name"]
    if name == "couette":
        need(c["u_wall"] is not None, "couette case requires the wall speed", "[case].u_wall")
        need(m["boundary"] == "diffuse-wall", "couette needs diffuse walls", "[mesh].boundary")
    if name == "fourier":
        need(c["dT"] is not None, "fourier case requires the wall temperature difference",
             "[case].dT")
        need(abs(c["dT"]) <= 0.05 * c["T_wall"] + 1e-15, "dT/T_wall must not exceed 0.05",
             "[case].dT")
        need(m["boundary"] == "diffuse-wall", "fourier needs diffuse walls", "[mesh].boundary")
    if name == "sod":
        need(v["gas"]["kind"] == "rotational-linear",
             "sod needs the calorically perfect rotational gas", "[gas].kind")
        need(m["boundary"] == "inflow-outflow", "sod needs inflow-outflow", "[mesh].boundary")
    if m["boundary"] != "periodic":
        need(m["n_cells"] >= 2, "wall and inflow boundaries need >= 2 cells", "[mesh].n_cells")
    if v["gas"]["kind"] == "tabulated":
        need(v["gas"]["table"] is not None, "tabulated gas requires a table file", "[gas].table")
    if v["gas"]["kind"] == "polynomial":
        need(v["gas"]["coefficients"] is not None, "polynomial gas requires coefficients",
             "[gas].coefficients")


# -- case library ---------------------------------------------------------------------


def build_gas(cfg: SolverConfig) -> Gas:
    gs = cfg.values["gas"]
    kind, R = gs["kind"], gs["R"]
    if kind == "tabulated":
        return Gas(R, (EnergyModel.from_file(gs["table"], R),))
    if kind == "polynomial":
        kw = {k: gs[k] for k in ("T_min", "T_max") if gs[k] is not None}
        return Gas(R, (EnergyModel.polynomial(R, gs["coefficients"], **kw),))
    return default_gas(kind, R=R, T0=gs["T0"])


def build_grid_from(cfg: SolverConfig, T_ref=None):
    g = cfg.values["grid"]
    n = [int(x) for x in g["n"]]
    return build_grid(g["center"], T_ref or g["T_ref"], cfg.values["gas"]["R"],
                      n if len(n) == 3 else n[0], g["span"] if len(g["span"]) == 3 else g["span"][0])


def build_tau(cfg: SolverConfig) -> TauLaw:
    c = cfg.values["case"]
    return TauLaw(c["tau_law"], c["tau"], c["mu_ref"], c["T_ref"], c["omega"], c["kn"])


@dataclass
class CaseSetup:
    run: RunConfig
    state: ReducedState
    seed: int
    extra: dict = field(default_factory=dict)


def build_case(cfg: SolverConfig, output_dir=None) -> CaseSetup:
    """Assemble gas, grids, initial state and run parameters for the configured case."""
    v = cfg.values
    c, m = v["case"], v["mesh"]
    gas = build_gas(cfg)
    grid = build_grid_from(cfg)
    rng = np.random.default_rng(c["seed"])
    name = c["name"]
    left = right = None
    if m["boundary"] == "diffuse-wall":
        uw = c["u_wall"] or 0.0
        dT = c["dT"] or 0.0
        left = WallSpec(c["T_wall"] - 0.5 * dT, (0.0, -0.5 * uw, 0.0))
        right = WallSpec(c["T_wall"] + 0.5 * dT, (0.0, 0.5 * uw, 0.0))
    mesh = SpatialMesh(m["n_cells"], m["x_min"], m["x_max"], m["boundary"], left, right)
    x = mesh.x
    N = mesh.n_cells
    extra = {}
    if name == "relax":
        state = relax_initial_state(gas, grid, c["rho"], np.array(c["u"]), c["T"], rng,
                                    n_cells=N)
    elif name in ("couette", "fourier"):
        from .chapman import ChannelConfig, _channel
        ch = ChannelConfig(model=c["model"], kn=c["kn"], n_cells=N, gas=gas,
                           U=c["u_wall"] or 0.0, dT=c["dT"] or 0.0, T_w=c["T_wall"],
                           n_v=int(v["grid"]["n"][0]), span=v["grid"]["span"][0])
        _, _, _, _, _, state = _channel(ch, name)
    elif name == "sod":
        rho = np.where(x < 0.5 * (m["x_min"] + m["x_max"]), c["rho_left"], c["rho_right"])
        p = np.where(x < 0.5 * (m["x_min"] + m["x_max"]), c["p_left"], c["p_right"])
        T = p / (rho * gas.R)
        state = equilibrium_state(rho, np.zeros((N, 3)), T, grid, gas)
    else:
        k = 2 * np.pi * c["wavenumber"] / (m["x_max"] - m["x_min"])
        rho = c["rho"] * (1 + c["amplitude"] * np.sin(k * x))
        T = np.full(N, c["T"])
        u = np.broadcast_to(np.asarray(c["u"]), (N, 3)).copy()
        state = equilibrium_state(rho, u, T, grid, gas)
    nsnap = v["output"]["snapshots"]
    times = tuple(c["t_end"] * (i + 1) / nsnap for i in range(nsnap)) if nsnap else ()
    run = RunConfig(gas, grid, mesh, c["model"], build_tau(cfg), c["t_end"], c["cfl"],
                    c["dt_max"], c["splitting"], c["order"] == 2, times,
                    v["output"]["diag_every"], output_dir)
    return CaseSetup(run, state, c["seed"], extra)


def relax_initial_state(gas: Gas, grid, rho, u, T, rng=None, n_cells=None, spread=0.3):
    """Bimodal, out-of-equilibrium state with density ``rho`` and velocity ``u``.

    Two Maxwellians at ``0.8 T`` and ``0.6 T`` displaced along ``+/- d`` (random
    direction when ``rng`` is given), with internal energies off their
    equilibrium share.
    """
    lead = () if n_cells is None else (n_cells,)
    if rng is None:
        d = np.array([1.0, 0.0, 0.0])
    else:
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
    d = spread * 2.0 * np.sqrt(gas.R * T) * d
    r = np.full(lead, 0.5 * rho)
    a = equilibrium_state(r, np.broadcast_to(u + d, lead + (3,)), np.full(lead, 0.8 * T),
                          grid, gas)
    b = equilibrium_state(r, np.broadcast_to(u - d, lead + (3,)), np.full(lead, 0.6 * T),
                          grid, gas)
    G = [1.3 * ga + 0.7 * gb for ga, gb in zip(a.G, b.G)]
    return ReducedState(a.F + b.F, G)
