"""Reading and writing run configurations (INI-style ``key = value`` with sections).

Example::

    [grid]
    n = 32
    box_length = 2pi

    [solver]
    nu = 1.0
    dt = 0.01
    t_end = 5.0
    nonlinear = true
    output_every = 10

    [initial_condition]
    kind = random_gevrey
    amplitude = 0.1

    [gevrey]
    a = 0.5
    sigma = 2.0

    [diagnostics]
    deltas = 4, 2, 1, 0.5
    t0_cap = 1.0

Omitted keys take the :class:`~gevrey_nse.solver.SolverConfig` defaults.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .norms import GevreyParams
from .solver import ConfigError, InitialCondition, SolverConfig

_PI = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$")


def parse_float(raw: str) -> float:
    """Float, also accepting multiples of pi such as ``2pi`` or ``2*pi``."""
    m = _PI.match(raw)
    if m:
        factor = m.group(1)
        return (float(factor) if factor not in ("", "+") else 1.0) * math.pi
    return float(raw)


def parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


_SCHEMA = {
    "grid": {"n": int, "box_length": parse_float},
    "solver": {"nu": parse_float, "dt": parse_float, "t_end": parse_float,
               "dealias": str, "nonlinear": parse_bool, "output_every": int,
               "seed": int, "cfl": parse_float, "exponent_cap": parse_float},
    "initial_condition": {"kind": str, "amplitude": parse_float, "q": parse_float,
                          "a": parse_float, "sigma": parse_float, "seed": int,
                          "path": str, "mode": lambda r: tuple(int(x) for x in r.split(","))},
    "gevrey": {"a": parse_float, "sigma": parse_float},
    "diagnostics": {"deltas": lambda r: tuple(parse_float(x) for x in r.split(",")),
                    "t0_cap": parse_float},
}

RESERVED_SECTIONS = ("manifest",)


def _section_values(cp, section):
    if not cp.has_section(section):
        return {}
    schema = _SCHEMA[section]
    out = {}
    for key, raw in cp.items(section):
        if key not in schema:
            raise ConfigError(f"[{section}] unknown key {key!r}")
        try:
            out[key] = schema[key](raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from None
    return out


def config_from_parser(cp: configparser.ConfigParser) -> SolverConfig:
    for section in cp.sections():
        if section not in _SCHEMA and section not in RESERVED_SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
    top = {}
    top.update(_section_values(cp, "grid"))
    top.update(_section_values(cp, "solver"))
    diag = _section_values(cp, "diagnostics")
    top.update(diag)
    ic = InitialCondition(**_section_values(cp, "initial_condition"))
    defaults = SolverConfig()
    gev = _section_values(cp, "gevrey")
    try:
        gevrey = GevreyParams(gev.get("a", defaults.gevrey.a),
                              gev.get("sigma", defaults.gevrey.sigma), 1.0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = SolverConfig(ic=ic, gevrey=gevrey, **top)
    return cfg.validate()


def read_config(path) -> SolverConfig:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    return config_from_parser(cp)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def config_to_parser(cfg: SolverConfig) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp["grid"] = {"n": _fmt(cfg.n), "box_length": _fmt(float(cfg.box_length))}
    cp["solver"] = {k: _fmt(getattr(cfg, k)) for k in _SCHEMA["solver"]}
    cp["initial_condition"] = {f.name: _fmt(getattr(cfg.ic, f.name))
                               for f in fields(InitialCondition)
                               if getattr(cfg.ic, f.name) is not None}
    cp["gevrey"] = {"a": _fmt(float(cfg.gevrey.a)), "sigma": _fmt(float(cfg.gevrey.sigma))}
    cp["diagnostics"] = {"deltas": _fmt(tuple(float(d) for d in cfg.deltas)),
                         "t0_cap": _fmt(float(cfg.t0_cap))}
    return cp


@dataclass(frozen=True)
class RunManifest:
    config_path: str
    config: SolverConfig
    suite: str
    outputs: tuple[str, ...]
    seed: int
    version: str = __version__

    def write(self, path):
        cp = config_to_parser(self.config)
        cp["manifest"] = {
            "config_path": self.config_path,
            "suite": self.suite,
            "outputs": ", ".join(self.outputs),
            "seed": str(self.seed),
            "version": self.version,
        }
        with open(path, "w") as fh:
            cp.write(fh)

    @classmethod
    def read(cls, path) -> RunManifest:
        cp = configparser.ConfigParser()
        with open(path) as fh:
            cp.read_file(fh)
        m = cp["manifest"]
        outputs = tuple(x.strip() for x in m.get("outputs", "").split(",") if x.strip())
        return cls(m["config_path"], config_from_parser(cp), m["suite"], outputs,
                   int(m["seed"]), m["version"])


def write_config(cfg: SolverConfig, path):
    with open(path, "w") as fh:
        config_to_parser(cfg).write(fh)


def load_config_text(text: str) -> SolverConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return config_from_parser(cp)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
