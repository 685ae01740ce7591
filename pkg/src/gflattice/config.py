"""INI run configuration.

Grammar: standard ``configparser`` INI (``key = value``, ``#`` comments).
Numbers accept a trailing multiple of pi (``8*pi``, ``3*pi/2``, ``pi``).
Lists are comma separated.  Every key is validated; unknown sections or keys
are errors, and messages name the offending ``section.key``.

Noise semantics (``[noise] kind``):

* ``none``  no dephasing.
* ``white`` delta-correlated frequency noise of intensity ``gamma``; the
  master equation carries ``gamma`` as its dephasing coefficient.
* ``ou``    Ornstein-Uhlenbeck noise of strength ``gamma`` and bandwidth
  ``lambda``; the master equation uses ``gamma (1 - exp(-lambda t))``.
* ``pln``   power-law schedule, master coefficient ``gamma / (lambda t + 1)**3``
  (master and moment-ode engines only).
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .errors import ValidationError
from .lattice import GeometrySpec, LatticeMode, LatticeSpec
from .master import CorrelationMode, DephasingSchedule, ScheduleKind
from .noise import NoiseKind, NoiseModel

_PI_RE = re.compile(r"^\s*([-+]?[0-9.]*(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*(?:/\s*([0-9.]+(?:[eE][-+]?\d+)?))?\s*$")


class RunEngine(str, Enum):
    UNITARY = "unitary"
    MASTER = "master"
    TRAJECTORIES = "trajectories"
    MOMENT_ODE = "moment-ode"
    SCAN = "scan"


class NoiseChoice(str, Enum):
    NONE = "none"
    WHITE = "white"
    OU = "ou"
    PLN = "pln"


@dataclass(frozen=True)
class NoiseSection:
    kind: NoiseChoice = NoiseChoice.NONE
    gamma: float = 0.0
    lam: float = 1.0
    correlation: CorrelationMode = CorrelationMode.CORRELATED

    def decay_schedule(self) -> DephasingSchedule:
        """Decay-rate schedule of <a> (half the master-equation coefficient)."""
        if self.kind is NoiseChoice.NONE:
            return DephasingSchedule.constant(0.0)
        if self.kind is NoiseChoice.WHITE:
            return DephasingSchedule.constant(0.5 * self.gamma)
        if self.kind is NoiseChoice.OU:
            return DephasingSchedule.oun(self.gamma, self.lam)
        return DephasingSchedule.pln(self.gamma, self.lam)

    def schedule_kind(self) -> ScheduleKind:
        return {NoiseChoice.OU: ScheduleKind.OUN, NoiseChoice.PLN: ScheduleKind.PLN}.get(self.kind,
                                                                                         ScheduleKind.CONSTANT)

    def noise_model(self) -> NoiseModel:
        if self.kind is NoiseChoice.PLN:
            raise ValidationError("noise.kind: pln has no trajectory model")
        kind = NoiseKind.OU if self.kind is NoiseChoice.OU else NoiseKind.WHITE
        gamma = 0.0 if self.kind is NoiseChoice.NONE else self.gamma
        return NoiseModel(kind, gamma, self.lam, self.correlation)


@dataclass(frozen=True)
class RunSection:
    engine: RunEngine
    t_max: Optional[float] = None
    dt: Optional[float] = None
    initial_sites: Tuple[int, ...] = (0,)
    realizations: int = 200
    seed: int = 0
    k: int = 1
    points: int = 200
    method: str = "rk4"


@dataclass(frozen=True)
class ScanSection:
    engine: str = "closed-form"
    variable: str = "gamma"
    start: float = 0.01
    stop: float = 100.0
    points: int = 25
    scale: str = "log"
    leakage: float = 1e-8

    def values(self):
        import numpy as np

        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class OutputSection:
    directory: Optional[str] = None
    name: str = "run"
    formats: Tuple[str, ...] = ("csv",)
    snapshot: bool = False


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeSpec
    run: RunSection
    noise: NoiseSection = field(default_factory=NoiseSection)
    scan: Optional[ScanSection] = None
    output: OutputSection = field(default_factory=OutputSection)
    geometry: Optional[GeometrySpec] = None
    hopping_file: Optional[str] = None


# key -> (attribute, parser, required)
def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_RE.match(text)
    if not m:
        raise ValueError(f"not a number: {text!r}")
    coef = m.group(1)
    value = (float(coef) if coef not in ("", "+", "-") else (-1.0 if coef == "-" else 1.0)) * math.pi
    if m.group(2):
        value /= float(m.group(2))
    return value


def _parse_int(text: str) -> int:
    value = int(text, 0)
    return value


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(text: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in text.split(",") if item.strip())


_SCHEMA: Dict[str, Dict[str, Tuple[str, object, bool]]] = {
    "lattice": {
        "sites": ("num_sites", _parse_int, True),
        "c1": ("coupling_c1", _parse_float, False),
        "alpha": ("ramp_alpha", _parse_float, False),
        "mode": ("mode", str, False),
        "hopping_file": ("hopping_file", str, False),
    },
    "geometry": {
        "d1": ("d1", _parse_float, True),
        "s": ("s", _parse_float, True),
    },
    "noise": {
        "kind": ("kind", str, False),
        "gamma": ("gamma", _parse_float, False),
        "lambda": ("lam", _parse_float, False),
        "correlation": ("correlation", str, False),
    },
    "run": {
        "engine": ("engine", str, True),
        "t_max": ("t_max", _parse_float, False),
        "z_max": ("t_max", _parse_float, False),
        "dt": ("dt", _parse_float, False),
        "initial_site": ("initial_sites", lambda t: tuple(_parse_int(x) for x in _parse_list(t)), False),
        "realizations": ("realizations", _parse_int, False),
        "seed": ("seed", _parse_int, False),
        "k": ("k", _parse_int, False),
        "points": ("points", _parse_int, False),
        "method": ("method", str, False),
    },
    "scan": {
        "engine": ("engine", str, False),
        "variable": ("variable", str, False),
        "from": ("start", _parse_float, True),
        "to": ("stop", _parse_float, True),
        "points": ("points", _parse_int, False),
        "scale": ("scale", str, False),
        "leakage": ("leakage", _parse_float, False),
    },
    "output": {
        "directory": ("directory", str, False),
        "name": ("name", str, False),
        "formats": ("formats", _parse_list, False),
        "snapshot": ("snapshot", _parse_bool, False),
    },
}


def _section(parser: configparser.ConfigParser, name: str) -> Dict[str, object]:
    schema = _SCHEMA[name]
    values: Dict[str, object] = {}
    for key, raw in parser.items(name):
        if key not in schema:
            raise ValidationError(f"unknown key {name}.{key} (allowed: {', '.join(sorted(schema))})")
        attr, conv, _ = schema[key]
        if attr in values:
            raise ValidationError(f"{name}.{key}: duplicates another key for the same setting")
        try:
            values[attr] = conv(raw.strip())
        except ValueError as exc:
            raise ValidationError(f"{name}.{key}: {exc}") from None
    missing = [k for k, (attr, _, req) in schema.items() if req and attr not in values]
    if missing:
        optional = [k for k, (_, _, req) in schema.items() if not req]
        raise ValidationError(
            f"missing required key(s) {', '.join(f'{name}.{k}' for k in missing)}; "
            f"keys with defaults: {', '.join(f'{name}.{k}' for k in optional)}"
        )
    return values


def _enum(enum, value, path):
    try:
        return enum(value)
    except ValueError:
        raise ValidationError(f"{path}: {value!r} is not one of {', '.join(e.value for e in enum)}") from None


def _check(cond: bool, message: str):
    if not cond:
        raise ValidationError(message)


def parse_config(text: str) -> RunConfig:
    """Parse and validate an INI document."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"malformed config: {exc}") from None
    for name in parser.sections():
        if name not in _SCHEMA:
            raise ValidationError(f"unknown section [{name}] (allowed: {', '.join(_SCHEMA)})")
    for name in ("lattice", "run"):
        if not parser.has_section(name):
            raise ValidationError(f"missing section [{name}]")

    lat = _section(parser, "lattice")
    hopping_file = lat.pop("hopping_file", None)
    mode = _enum(LatticeMode, lat.pop("mode", LatticeMode.GLAUBER_FOCK.value), "lattice.mode")
    _check(lat["num_sites"] >= 2, "lattice.sites: must be >= 2")
    _check(lat.get("coupling_c1", 1.0) >= 0, "lattice.c1: must be >= 0")
    _check(lat.get("ramp_alpha", 0.5) >= 0, "lattice.alpha: must be >= 0")
    custom = None
    if mode is LatticeMode.CUSTOM:
        _check(hopping_file is not None, "lattice.hopping_file: required when lattice.mode = custom")
        from .io import read_matrix

        custom = read_matrix(hopping_file)
    try:
        lattice = LatticeSpec(mode=mode, custom_hopping=custom, **lat)
    except ValidationError as exc:
        raise ValidationError(f"lattice: {exc}") from None

    noise = NoiseSection()
    if parser.has_section("noise"):
        nz = _section(parser, "noise")
        kind = _enum(NoiseChoice, nz.pop("kind", "none"), "noise.kind")
        corr = _enum(CorrelationMode, nz.pop("correlation", "correlated"), "noise.correlation")
        noise = NoiseSection(kind, correlation=corr, **nz)
        _check(noise.gamma >= 0, "noise.gamma: must be >= 0")
        _check(noise.lam > 0, "noise.lambda: must be > 0")

    rs = _section(parser, "run")
    engine = _enum(RunEngine, rs.pop("engine"), "run.engine")
    run = RunSection(engine, **rs)
    _check(run.dt is None or run.dt > 0, "run.dt: must be > 0")
    _check(run.t_max is None or run.t_max > 0, "run.t_max: must be > 0")
    _check(engine is RunEngine.SCAN or run.t_max is not None, "run.t_max: required for this engine")
    _check(len(run.initial_sites) >= 1, "run.initial_site: needs at least one site")
    for site in run.initial_sites:
        _check(0 <= site < lattice.num_sites, f"run.initial_site: {site} must lie in [0, lattice.sites)")
    _check(run.realizations >= 1, "run.realizations: must be >= 1")
    _check(0 <= run.seed < 2**64, "run.seed: must be an unsigned 64-bit integer")
    _check(run.k >= 1, "run.k: must be >= 1")
    _check(run.points >= 1, "run.points: must be >= 1")
    _check(run.method in ("rk4", "etd"), "run.method: must be rk4 or etd")
    if engine is RunEngine.TRAJECTORIES:
        _check(noise.kind is not NoiseChoice.PLN,
               "run.engine: trajectories cannot simulate noise.kind = pln (no generating process)")
    if engine is RunEngine.MOMENT_ODE:
        _check(lattice.mode is LatticeMode.GLAUBER_FOCK, "run.engine: moment-ode needs lattice.mode = glauber-fock")
        _check(noise.correlation is CorrelationMode.CORRELATED or noise.kind is NoiseChoice.NONE,
               "run.engine: moment-ode describes correlated noise only")

    scan = None
    if parser.has_section("scan"):
        sc = _section(parser, "scan")
        scan = ScanSection(**sc)
        _check(scan.engine in ("closed-form", "moment-ode", "master", "trajectories"),
               "scan.engine: must be closed-form, moment-ode, master or trajectories")
        _check(scan.variable in ("gamma", "gamma_tilde"), "scan.variable: must be gamma or gamma_tilde")
        _check(scan.scale in ("log", "linear"), "scan.scale: must be log or linear")
        _check(scan.points >= 1, "scan.points: must be >= 1")
        _check(scan.stop > scan.start if scan.points > 1 else scan.stop >= scan.start, "scan.to: must exceed scan.from")
        _check(scan.start > 0 or scan.scale == "linear", "scan.from: must be > 0 on a log scale")
        _check(scan.start >= 0, "scan.from: must be >= 0")
        _check(scan.leakage > 0, "scan.leakage: must be > 0")
        _check(noise.kind is not NoiseChoice.NONE, "noise.kind: a scan needs a noise family")
        if scan.engine == "closed-form":
            _check(noise.kind is NoiseChoice.WHITE, "scan.engine: closed-form covers white (Markovian) noise only")
        if scan.engine == "trajectories":
            _check(noise.kind is not NoiseChoice.PLN, "scan.engine: trajectories cannot simulate noise.kind = pln")
        _check(lattice.ramp_alpha > 0, "lattice.alpha: scans evaluate at the revival time, which needs alpha > 0")
    if engine is RunEngine.SCAN:
        _check(scan is not None, "missing section [scan] for run.engine = scan")

    output = OutputSection()
    if parser.has_section("output"):
        out = _section(parser, "output")
        output = OutputSection(**out)
        for fmt in output.formats:
            _check(fmt in ("csv", "pgm", "svg"), f"output.formats: unknown format {fmt!r} (csv, pgm, svg)")
        _check(re.fullmatch(r"[A-Za-z0-9_.-]+", output.name) is not None,
               "output.name: use letters, digits, '_', '-' or '.'")

    geometry = None
    if parser.has_section("geometry"):
        g = _section(parser, "geometry")
        try:
            geometry = GeometrySpec(**g)
        except ValidationError as exc:
            raise ValidationError(f"geometry: {exc}") from None

    return RunConfig(lattice, run, noise, scan, output, geometry, hopping_file)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def serialize(cfg: RunConfig) -> str:
    """Canonical INI text; ``parse_config(serialize(cfg)) == cfg``."""
    lines: List[str] = ["[lattice]"]
    lat = cfg.lattice
    lines += [f"sites = {lat.num_sites}", f"c1 = {_fmt(float(lat.coupling_c1))}",
              f"alpha = {_fmt(float(lat.ramp_alpha))}", f"mode = {lat.mode.value}"]
    if cfg.hopping_file:
        lines.append(f"hopping_file = {cfg.hopping_file}")
    if cfg.geometry is not None:
        lines += ["", "[geometry]", f"d1 = {_fmt(float(cfg.geometry.d1))}", f"s = {_fmt(float(cfg.geometry.s))}"]
    nz = cfg.noise
    lines += ["", "[noise]", f"kind = {nz.kind.value}", f"gamma = {_fmt(float(nz.gamma))}",
              f"lambda = {_fmt(float(nz.lam))}", f"correlation = {nz.correlation.value}"]
    run = cfg.run
    lines += ["", "[run]", f"engine = {run.engine.value}"]
    if run.t_max is not None:
        lines.append(f"t_max = {_fmt(float(run.t_max))}")
    if run.dt is not None:
        lines.append(f"dt = {_fmt(float(run.dt))}")
    lines += [f"initial_site = {_fmt(run.initial_sites)}", f"realizations = {run.realizations}",
              f"seed = {run.seed}", f"k = {run.k}", f"points = {run.points}", f"method = {run.method}"]
    if cfg.scan is not None:
        sc = cfg.scan
        lines += ["", "[scan]", f"engine = {sc.engine}", f"variable = {sc.variable}",
                  f"from = {_fmt(float(sc.start))}", f"to = {_fmt(float(sc.stop))}", f"points = {sc.points}",
                  f"scale = {sc.scale}", f"leakage = {_fmt(float(sc.leakage))}"]
    out = cfg.output
    lines += ["", "[output]"]
    if out.directory is not None:
        lines.append(f"directory = {out.directory}")
    lines += [f"name = {out.name}", f"formats = {_fmt(out.formats)}",
              f"snapshot = {_fmt(out.snapshot)}"]
    return "\n".join(lines) + "\n"


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    from dataclasses import replace

    if not 0 <= seed < 2**64:
        raise ValidationError("--seed: must be an unsigned 64-bit integer")
    return replace(cfg, run=replace(cfg.run, seed=seed))


__all__ = [
    "RunConfig", "RunEngine", "NoiseChoice", "NoiseSection", "RunSection", "ScanSection", "OutputSection",
    "parse_config", "load_config", "serialize", "with_seed",
]
