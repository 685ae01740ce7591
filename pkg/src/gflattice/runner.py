"""Run orchestration: config in, artifact files out."""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from . import __version__
from .config import NoiseChoice, RunConfig, RunEngine, serialize
from .errors import ValidationError
from .io import remove_quietly, write_intensity_csv, write_manifest, write_matrix, write_pgm, write_svg, write_table
from .lattice import build_hamiltonian
from .master import DensityMatrix, default_master_step, integrate_master
from .observables import Engine, lindblad_schedule, moment_ode_mean_n, scan_dephasing
from .stochastic import run_ensemble
from .unitary import PropagationGrid, PureState, default_step, intensity, propagate_unitary

log = logging.getLogger(__name__)

OUT_ENV = "GFLATTICE_OUT"
DEFAULT_OUT = "gflattice-out"


@dataclass
class RunResult:
    files: List[str]
    manifest: str
    wall_time: float


def resolve_output_dir(cfg: RunConfig, cli_out: Optional[str] = None) -> str:
    """--out, then output.directory, then $GFLATTICE_OUT, then ./gflattice-out."""
    return cli_out or cfg.output.directory or os.environ.get(OUT_ENV) or DEFAULT_OUT


class _Writer:
    """Serialized file writer that remembers what it wrote."""

    def __init__(self, directory: str, name: str, formats):
        self.directory = directory
        self.name = name
        self.formats = set(formats)
        self.paths: List[str] = []

    def path(self, suffix: str) -> str:
        p = os.path.join(self.directory, f"{self.name}{suffix}")
        self.paths.append(p)
        return p

    def heatmap(self, stem: str, axis_name: str, axis, values):
        if "csv" in self.formats:
            write_intensity_csv(self.path(f"{stem}.csv"), axis_name, axis, values)
        if "pgm" in self.formats:
            write_pgm(self.path(f"{stem}.pgm"), values)
        if "svg" in self.formats:
            write_svg(self.path(f"{stem}.svg"), values)


def _grid(cfg: RunConfig, default_dt: float) -> PropagationGrid:
    dt = cfg.run.dt if cfg.run.dt is not None else default_dt
    return PropagationGrid.with_outputs(cfg.run.t_max, min(dt, cfg.run.t_max), cfg.run.points)


def _scan(cfg: RunConfig, w: _Writer, threads: int):
    sc, nz = cfg.scan, cfg.noise
    values = sc.values()
    omega = cfg.lattice.ramp_alpha
    if sc.variable == "gamma_tilde":
        params = values * omega
    else:
        params = values
    if nz.kind is NoiseChoice.WHITE and sc.variable == "gamma":
        params = 0.5 * params  # white intensity -> decay rate of <a>
    for m in cfg.run.initial_sites:
        curve = scan_dephasing(cfg.lattice, nz.schedule_kind(), params, lam=nz.lam, mode=nz.correlation,
                               k=cfg.run.k, m=m, engine=Engine(sc.engine), realizations=cfg.run.realizations,
                               seed=cfg.run.seed, dt=cfg.run.dt, threads=threads, leakage=sc.leakage)
        curve = replace(curve, parameter_grid=values)
        with open(w.path(f"_m{m}.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(curve.to_csv())
        if curve.sites_used:
            log.info("m=%d: sites used per point %s", m, curve.sites_used)


def _execute(cfg: RunConfig, w: _Writer, threads: int):
    engine = cfg.run.engine
    if engine is RunEngine.SCAN:
        _scan(cfg, w, threads)
        return
    nz = cfg.noise
    n = cfg.lattice.num_sites
    h = build_hamiltonian(cfg.lattice)
    for m in cfg.run.initial_sites:
        if engine is RunEngine.UNITARY:
            states = propagate_unitary(h, PureState.localized(n, m), _grid(cfg, default_step(h)))
            w.heatmap(f"_m{m}", "z", [s.z for s in states], intensity(states))
        elif engine is RunEngine.MASTER:
            sched = lindblad_schedule(nz.decay_schedule())
            grid = _grid(cfg, default_master_step(h, sched, nz.correlation, cfg.run.method))
            states = integrate_master(h, DensityMatrix.localized(n, m), sched, nz.correlation, grid,
                                      method=cfg.run.method)
            w.heatmap(f"_m{m}", "t", [s.t for s in states], np.array([s.populations for s in states]))
            if cfg.output.snapshot:
                write_matrix(w.path(f"_m{m}_rho.txt"), states[-1].elements)
        elif engine is RunEngine.TRAJECTORIES:
            ens = run_ensemble(h, PureState.localized(n, m), nz.noise_model(), _grid(cfg, default_step(h)),
                               cfg.run.realizations, cfg.run.seed, threads)
            w.heatmap(f"_m{m}", "t", ens.times, ens.populations)
            if "csv" in w.formats:
                write_intensity_csv(w.path(f"_m{m}_se.csv"), "t", ens.times, ens.population_errors)
            if cfg.output.snapshot:
                write_matrix(w.path(f"_m{m}_sigma.txt"), ens.snapshots[-1])
                write_matrix(w.path(f"_m{m}_se.txt"), ens.std_errors[-1])
        elif engine is RunEngine.MOMENT_ODE:
            ts = np.linspace(0.0, cfg.run.t_max, cfg.run.points + 1)
            states = moment_ode_mean_n(cfg.lattice.coupling_c1, cfg.lattice.ramp_alpha, nz.decay_schedule(),
                                       ts, m)
            write_table(w.path(f"_m{m}.csv"), "t", ts, {
                "mean_n": [s.mean_n for s in states],
                "re_a": [s.mean_a.real for s in states],
                "im_a": [s.mean_a.imag for s in states],
            })
        else:  # pragma: no cover - enum exhausted
            raise ValidationError(f"run.engine: {engine}")


def run(cfg: RunConfig, out_dir: str, threads: int = 1) -> RunResult:
    """Execute ``cfg`` and write its artifacts into ``out_dir``.

    On any failure every file written so far is removed and the exception
    propagates.
    """
    if threads < 0:
        raise ValidationError("--threads: must be >= 0")
    os.makedirs(out_dir, exist_ok=True)
    w = _Writer(out_dir, cfg.output.name, cfg.output.formats)
    start = time.perf_counter()
    try:
        _execute(cfg, w, threads)
        wall = time.perf_counter() - start
        files = [os.path.basename(p) for p in w.paths]
        manifest = w.path("_manifest.txt")
        write_manifest(manifest, serialize(cfg), cfg.run.seed, __version__, wall, files)
    except BaseException:
        remove_quietly(w.paths)
        raise
    return RunResult([p for p in w.paths if p != manifest], manifest, wall)
