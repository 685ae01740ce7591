"""Transport observables, closed-form solutions and dephasing scans.

Rate convention: the closed forms and the moment equations are written for
the decay rate gamma(t) of <a>.  The master equation with Lindblad
coefficient r(t) damps <a> at r(t)/2, so the master engine is always run
with ``lindblad_schedule(schedule)`` (twice the rate).  Likewise white noise
of intensity G and OU noise of strength G correspond to decay schedules
constant(G/2) and OUN(G, lam) respectively.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, ValidationError
from .integrators import rk4_step
from .lattice import LatticeSpec, build_hamiltonian, revival_time
from .master import (CorrelationMode, DensityMatrix, DephasingSchedule, ScheduleKind, etd_step_size,
                     integrate_master, rate_step)
from .unitary import PropagationGrid, PureState, boundary_leakage

SCAN_LEAKAGE = 1e-8
MOMENT_RATE_VARIATION = 1e-3
MOMENT_RTOL = 1e-10
MOMENT_ATOL = 1e-13
MAX_SITES = 2048


class Engine(str, Enum):
    CLOSED_FORM = "closed-form"
    MOMENT_ODE = "moment-ode"
    MASTER = "master"
    TRAJECTORIES = "trajectories"


def mean_site_index(rho) -> float:
    """Sum_n n P_n for a DensityMatrix, a density matrix array or a population row."""
    if isinstance(rho, DensityMatrix):
        p = rho.populations
    elif isinstance(rho, PureState):
        p = np.abs(rho.amplitudes) ** 2
    else:
        arr = np.asarray(rho)
        p = np.real(np.diag(arr)) if arr.ndim == 2 else np.real(arr)
    return float(np.dot(np.arange(p.size), p))


def closed_form_unitary(m: float, g: float, omega: float, t):
    """m + (2g/omega)^2 sin^2(omega t/2); the omega -> 0 limit is m + (g t)^2."""
    t = np.asarray(t, dtype=float)
    if omega == 0:
        out = m + (g * t) ** 2
    else:
        out = m + (2.0 * g / omega) ** 2 * np.sin(0.5 * omega * t) ** 2
    return float(out) if out.ndim == 0 else out


def closed_form_markovian(m: float, g: float, omega: float, gamma: float, t):
    """<n(t)> for constant decay rate gamma of <a>, starting from |m>."""
    if omega == 0 and gamma == 0:
        raise ValidationError("closed_form_markovian needs (omega, gamma) != (0, 0)")
    t = np.asarray(t, dtype=float)
    w2, y2 = omega**2, gamma**2
    f = y2 * (gamma * t - 1.0) + w2 * (gamma * t + 1.0)
    osc = (y2 - w2) * np.cos(omega * t) - 2.0 * gamma * omega * np.sin(omega * t)
    out = m + 2.0 * g**2 / (w2 + y2) ** 2 * (f + np.exp(-gamma * t) * osc)
    return float(out) if out.ndim == 0 else out


def mean_n_at_revival(m: float, g: float, omega: float, gamma_tilde, k: int = 1):
    """<n(t_rev)> at t_rev = 2 pi k / omega as a function of gamma_tilde = gamma/omega."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    x = np.asarray(gamma_tilde, dtype=float)
    if np.any(x < 0):
        raise ValidationError("gamma_tilde must be >= 0")
    a = 2.0 * math.pi * k
    bracket = a * x / (1.0 + x**2) + (1.0 - x**2) / (1.0 + x**2) ** 2 * -np.expm1(-a * x)
    out = m + 2.0 * g**2 / omega**2 * bracket
    return float(out) if out.ndim == 0 else out


def lindblad_schedule(schedule: DephasingSchedule) -> DephasingSchedule:
    """Master-equation coefficient that damps <a> at ``schedule``'s rate."""
    return schedule.scaled(2.0)


@dataclass(frozen=True)
class MomentState:
    mean_a: complex
    mean_n: float
    t: float


def moment_ode_mean_n(g: float, omega: float, schedule: DephasingSchedule, t_grid, m: float = 0.0,
                      method: str = "radau") -> List[MomentState]:
    """Solve d<a>/dt = (-i omega - gamma(t)) <a> - i g,  d<n>/dt = -2 g Im<a>.

    ``method="radau"`` (default) hands the real 3-component system to
    scipy's implicit Radau solver at tight tolerances, which stays cheap for
    rates in the thousands.  ``method="rk4"`` is classical RK4 with steps
    bounded by the fastest rate, practical only for moderate rates.
    """
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or ts[0] < 0 or np.any(np.diff(ts) <= 0):
        raise ValidationError("t_grid must be a non-empty strictly increasing sequence of times >= 0")
    if method == "radau":
        return _moment_radau(g, omega, schedule, ts, m)
    if method != "rk4":
        raise ValidationError(f"unknown method {method!r}")
    span = float(ts[-1]) if ts[-1] > 0 else 1.0
    h_max = min(0.02 / max(abs(omega) + schedule.peak_rate + abs(g), 1e-12), span / 16.0)

    def rhs(t, y):
        a = y[0]
        return np.array([(-1j * omega - schedule.rate_at(t)) * a - 1j * g, -2.0 * g * a.imag])

    y = np.array([0.0 + 0.0j, float(m)], dtype=complex)
    t = 0.0
    out = []
    for target in ts:
        while target - t > 1e-13 * max(1.0, target):
            h = rate_step(schedule, t, min(h_max, target - t), MOMENT_RATE_VARIATION)
            if target - t - h < 0.25 * h:
                h = target - t
            y = rk4_step(rhs, t, y, h)
            t = t + h if target - t > h else target
        out.append(MomentState(complex(y[0]), float(y[1].real), float(target)))
    return out


def _moment_radau(g, omega, schedule, ts, m):
    # y = [Re a, Im a, n]
    def rhs(t, y):
        r = schedule.rate_at(t)
        return [-r * y[0] + omega * y[1], -omega * y[0] - r * y[1] - g, -2.0 * g * y[1]]

    def jac(t, y):
        r = schedule.rate_at(t)
        return [[-r, omega, 0.0], [-omega, -r, 0.0], [0.0, -2.0 * g, 0.0]]

    if ts[-1] == 0:
        return [MomentState(0j, float(m), 0.0) for _ in ts]
    sol = solve_ivp(rhs, (0.0, float(ts[-1])), [0.0, 0.0, float(m)], method="Radau", t_eval=ts, jac=jac,
                    rtol=MOMENT_RTOL, atol=MOMENT_ATOL)
    if not sol.success:
        raise IntegrationError(f"moment equations failed: {sol.message}")
    return [MomentState(complex(y[0], y[1]), float(y[2]), float(t)) for t, y in zip(ts, sol.y.T)]


@dataclass
class TransportCurve:
    parameter_grid: np.ndarray
    mean_n_values: np.ndarray
    engine_tag: Engine
    k: int
    m: int
    sites_used: Optional[List[int]] = field(default=None, compare=False)

    def __post_init__(self):
        self.parameter_grid = np.asarray(self.parameter_grid, dtype=float)
        self.mean_n_values = np.asarray(self.mean_n_values, dtype=float)
        self.engine_tag = Engine(self.engine_tag)
        if np.any(np.diff(self.parameter_grid) <= 0):
            raise ValidationError("scan grid must be strictly increasing")

    @property
    def argmax(self) -> float:
        return float(self.parameter_grid[int(np.argmax(self.mean_n_values))])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("gamma,mean_n,engine,k,m\n")
        for x, y in zip(self.parameter_grid, self.mean_n_values):
            buf.write(f"{x:.17g},{y:.17g},{self.engine_tag.value},{self.k},{self.m}\n")
        return buf.getvalue()


def _schedule(kind: ScheduleKind, gamma: float, lam: float) -> DephasingSchedule:
    return DephasingSchedule(ScheduleKind(kind), gamma, lam if kind != ScheduleKind.CONSTANT else 1.0)


def master_mean_n(spec: LatticeSpec, schedule: DephasingSchedule, mode: CorrelationMode, t: float, m: int,
                  leakage: float = SCAN_LEAKAGE):
    """Master-equation <n(t)> with the site count doubled until boundary leakage < ``leakage``.

    ``schedule`` is the decay rate of <a>; returns (mean_n, num_sites_used).
    """
    n = spec.num_sites
    while True:
        if n > MAX_SITES:
            raise IntegrationError(f"leakage stays above {leakage:.0e} up to {MAX_SITES} sites")
        if m >= n:
            n *= 2
            continue
        lat = spec.with_sites(n)
        h = build_hamiltonian(lat)
        grid = PropagationGrid.with_outputs(t, etd_step_size(h), 16)
        states = integrate_master(h, DensityMatrix.localized(n, m), lindblad_schedule(schedule), mode, grid,
                                  method="etd")
        leak = boundary_leakage(np.array([s.populations for s in states]))
        if leak < leakage:
            return mean_site_index(states[-1]), n
        n *= 2


def scan_dephasing(spec: LatticeSpec, kind: ScheduleKind, gammas: Sequence[float], *, lam: float = 1.0,
                   mode: CorrelationMode = CorrelationMode.CORRELATED, k: int = 1, m: int = 0,
                   engine: Engine = Engine.CLOSED_FORM, realizations: int = 200, seed: int = 0,
                   dt: Optional[float] = None, threads: int = 1, leakage: float = SCAN_LEAKAGE) -> TransportCurve:
    """<n(t_rev)> across decay-rate parameters ``gammas`` for one schedule family.

    g and omega are the lattice's C1 and alpha; t_rev = 2 pi k / omega for
    every schedule.  Engines: closed form (constant only), moment ODE, master
    equation (site count doubled until boundary leakage < ``leakage``) and trajectories
    (white noise for constant, OU noise for OUN).
    """
    engine = Engine(engine)
    kind = ScheduleKind(kind)
    grid = np.asarray(gammas, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0) or np.any(grid < 0):
        raise ValidationError("gammas must be a non-empty, strictly increasing grid of values >= 0")
    if engine is Engine.CLOSED_FORM and kind is not ScheduleKind.CONSTANT:
        raise ValidationError("the closed form covers constant dephasing only")
    if engine is Engine.TRAJECTORIES and kind is ScheduleKind.PLN:
        raise ValidationError("power-law noise has no trajectory model; use master or moment-ode")
    g, omega = spec.coupling_c1, spec.ramp_alpha
    t_rev = revival_time(omega, k)

    values, sites = [], []
    for gamma in grid:
        sched = _schedule(kind, float(gamma), lam)
        if engine is Engine.CLOSED_FORM:
            values.append(mean_n_at_revival(m, g, omega, gamma / omega, k))
        elif engine is Engine.MOMENT_ODE:
            values.append(moment_ode_mean_n(g, omega, sched, [t_rev], m)[-1].mean_n)
        elif engine is Engine.MASTER:
            val, n = master_mean_n(spec, sched, mode, t_rev, m, leakage)
            values.append(val)
            sites.append(n)
        else:
            from .noise import NoiseKind, NoiseModel
            from .stochastic import run_ensemble

            if kind is ScheduleKind.CONSTANT:
                model = NoiseModel(NoiseKind.WHITE, 2.0 * gamma, correlation=mode)
            else:
                model = NoiseModel(NoiseKind.OU, gamma, lam, correlation=mode)
            h = build_hamiltonian(spec)
            ens = run_ensemble(h, PureState.localized(spec.num_sites, m), model, PropagationGrid(t_rev, dt),
                               realizations, seed, threads)
            values.append(mean_site_index(ens.populations[-1]))
    return TransportCurve(grid, np.array(values), engine, k, m, sites or None)
