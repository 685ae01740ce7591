"""Density-matrix evolution under pure dephasing.

A single right-hand side covers the four master equations of the model:

    d(rho_nm)/dt = -i[H, rho]_nm - 1/2 (G_n + G_m) rho_nm + sqrt(G_n G_m) c_nm rho_nm

with ``G_n(t) = rate(t) * n**2`` and ``c_nm = 1`` when one noise process
drives every site (correlated; identical to the driven-oscillator Lindblad
equation with L = n) or ``c_nm = delta_nm`` for independent site noise.

The rate entering here is the coefficient of the Lindblad dissipator.  The
moment equations and closed forms in :mod:`gflattice.observables` are
written for the decay rate of <a>, which is half of it; see
:func:`gflattice.observables.lindblad_schedule`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .errors import IntegrationError, ValidationError
from .integrators import etd_coefficients, etdrk4_step, rk4_step
try:
    from . import _kernels
except ImportError:  # pragma: no cover - numba missing
    _kernels = None
from .unitary import LEAKAGE_WARN, PropagationGrid, PureState, boundary_leakage, default_step

log = logging.getLogger(__name__)

TRACE_TOL = 1e-6
POSITIVITY_TOL = 1e-6
RATE_VARIATION = 0.002
USE_COMPILED = True


class CorrelationMode(str, Enum):
    CORRELATED = "correlated"
    UNCORRELATED = "uncorrelated"


class ScheduleKind(str, Enum):
    CONSTANT = "constant"
    OUN = "oun"
    PLN = "pln"


@dataclass(frozen=True)
class DephasingSchedule:
    """Time-dependent dephasing rate.

    constant: ``gamma``;  OUN: ``gamma/2 * (1 - exp(-lam t))``;
    PLN: ``gamma / (2 (lam t + 1)**3)``.
    """

    kind: ScheduleKind = ScheduleKind.CONSTANT
    gamma: float = 0.0
    lam: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ScheduleKind(self.kind))
        if self.gamma < 0:
            raise ValidationError("dephasing strength gamma must be >= 0")
        if self.kind is not ScheduleKind.CONSTANT and not self.lam > 0:
            raise ValidationError("noise bandwidth lam must be > 0")

    @classmethod
    def constant(cls, gamma: float) -> "DephasingSchedule":
        return cls(ScheduleKind.CONSTANT, gamma)

    @classmethod
    def oun(cls, gamma: float, lam: float) -> "DephasingSchedule":
        return cls(ScheduleKind.OUN, gamma, lam)

    @classmethod
    def pln(cls, gamma: float, lam: float) -> "DephasingSchedule":
        return cls(ScheduleKind.PLN, gamma, lam)

    def scaled(self, factor: float) -> "DephasingSchedule":
        return replace(self, gamma=self.gamma * factor)

    def markovian_limit(self) -> "DephasingSchedule":
        """Constant schedule reached as the memory time goes to zero."""
        if self.kind is ScheduleKind.CONSTANT:
            return self
        return DephasingSchedule.constant(0.5 * self.gamma)

    @property
    def peak_rate(self) -> float:
        return self.gamma if self.kind is ScheduleKind.CONSTANT else 0.5 * self.gamma

    def rate_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind is ScheduleKind.CONSTANT:
            out = np.full_like(t, self.gamma)
        elif self.kind is ScheduleKind.OUN:
            out = 0.5 * self.gamma * -np.expm1(-self.lam * t)
        else:
            out = self.gamma / (2.0 * (self.lam * t + 1.0) ** 3)
        return float(out) if out.ndim == 0 else out

    def integral(self, t):
        """Integral of the rate from 0 to t (closed form)."""
        t = np.asarray(t, dtype=float)
        lam = self.lam
        if self.kind is ScheduleKind.CONSTANT:
            out = self.gamma * t
        elif self.kind is ScheduleKind.OUN:
            out = 0.5 * self.gamma * (t + np.expm1(-lam * t) / lam)
        else:
            out = self.gamma / (4.0 * lam) * (1.0 - 1.0 / (lam * t + 1.0) ** 2)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t: float) -> float:
        if self.kind is ScheduleKind.CONSTANT:
            return 0.0
        if self.kind is ScheduleKind.OUN:
            return 0.5 * self.gamma * self.lam * math.exp(-self.lam * t)
        return -1.5 * self.gamma * self.lam / (self.lam * t + 1.0) ** 4


def rate_step(schedule: DephasingSchedule, t: float, limit: float, variation: float = RATE_VARIATION) -> float:
    """Largest step <= limit over which the rate changes by ``variation`` of its scale."""
    if schedule.kind is ScheduleKind.CONSTANT or schedule.gamma == 0:
        return limit
    slope = abs(schedule.derivative(t))
    if slope == 0:
        return limit
    scale = schedule.rate_at(t) + 0.1 * schedule.peak_rate
    return min(limit, variation * scale / slope)


def dephasing_rate(schedule: DephasingSchedule, t: float) -> float:
    if t < 0:
        raise ValidationError("t must be >= 0")
    return schedule.rate_at(t)


@dataclass(frozen=True)
class DensityMatrix:
    elements: np.ndarray
    t: float = 0.0

    @classmethod
    def from_pure(cls, psi, t: float = 0.0) -> "DensityMatrix":
        amps = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi, dtype=complex)
        return cls(np.outer(amps, amps.conj()), t)

    @classmethod
    def localized(cls, num_sites: int, site: int) -> "DensityMatrix":
        return cls.from_pure(PureState.localized(num_sites, site))

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.elements)).copy()

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.elements))

    @property
    def purity(self) -> float:
        r = self.elements
        return float(np.real(np.vdot(r.conj().T, r)))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.elements - self.elements.conj().T)))


def _elements(rho) -> np.ndarray:
    return rho.elements if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def dephasing_weights(num_sites: int, mode: CorrelationMode) -> np.ndarray:
    """Elementwise dephasing factor B with d(rho)/dt|deph = rate(t) * B * rho."""
    n = np.arange(num_sites, dtype=float)
    b = -0.5 * (n[:, None] ** 2 + n[None, :] ** 2)
    if CorrelationMode(mode) is CorrelationMode.CORRELATED:
        b += np.outer(n, n)
    else:
        b[np.diag_indices(num_sites)] += n**2
    return b


def master_rhs(rho, h: np.ndarray, schedule: DephasingSchedule, mode: CorrelationMode, t: float,
               weights: Optional[np.ndarray] = None) -> np.ndarray:
    """d(rho)/dt for either correlation mode at time t."""
    r = _elements(rho)
    if weights is None:
        weights = dephasing_weights(r.shape[0], mode)
    return -1j * (h @ r - r @ h) + schedule.rate_at(t) * weights * r


def lindblad_rhs(rho, h: np.ndarray, rate: float, jump: Optional[np.ndarray] = None) -> np.ndarray:
    """Oscillator form -i[H, rho] + rate (L rho L^+ - 1/2 {L^+ L, rho}), with L = n by default."""
    r = _elements(rho)
    if jump is None:
        jump = np.diag(np.arange(r.shape[0], dtype=float)).astype(complex)
    ld = jump.conj().T
    ldl = ld @ jump
    return -1j * (h @ r - r @ h) + rate * (jump @ r @ ld - 0.5 * (ldl @ r + r @ ldl))


def _check(rho: np.ndarray, t: float):
    drift = abs(np.trace(rho).real - 1.0)
    if drift > TRACE_TOL:
        raise IntegrationError(f"trace drift {drift:.2e} at t={t:.4g}; reduce the step or use method='etd'")
    low = float(np.min(np.real(np.diag(rho))))
    if low < -POSITIVITY_TOL:
        raise IntegrationError(f"negative population {low:.2e} at t={t:.4g}; reduce the step")


def rk4_step_size(h: np.ndarray, schedule: DephasingSchedule, weights: np.ndarray) -> float:
    """Default RK4 step: accuracy for the commutator, stability for dephasing."""
    dt = 0.5 * default_step(h)
    stiff = schedule.peak_rate * float(np.max(np.abs(weights)))
    if stiff > 0:
        dt = min(dt, 0.5 / stiff)
    return dt


def etd_step_size(h: np.ndarray) -> float:
    """ETD step: 1/8 over the largest hopping (detunings and dephasing are exact)."""
    off = np.abs(h - np.diag(np.diag(h)))
    kmax = float(off.max()) if off.size > 1 else 0.0
    return 0.125 / kmax if kmax > 0 else 0.1


def default_master_step(h: np.ndarray, schedule: DephasingSchedule, mode: CorrelationMode,
                        method: str = "rk4") -> float:
    if method == "etd":
        return etd_step_size(h)
    return rk4_step_size(h, schedule, dephasing_weights(h.shape[0], CorrelationMode(mode)))


def integrate_master(h: np.ndarray, rho0, schedule: DephasingSchedule, mode: CorrelationMode,
                     grid: PropagationGrid, method: str = "rk4", form: str = "network") -> List[DensityMatrix]:
    """Evolve ``rho0`` and return density matrices at the grid's output points.

    method
        ``"rk4"``: classical RK4, rate evaluated at the stage times.
        ``"etd"``: exponential RK4 treating site detunings and dephasing
        exactly (elementwise) and hopping explicitly; for stiff rates.
    form
        ``"network"`` uses :func:`master_rhs`; ``"lindblad"`` uses the
        operator form :func:`lindblad_rhs` (correlated mode only, rk4 only),
        an independent route to the same equation.
    """
    h = np.asarray(h, dtype=complex)
    r0 = _elements(rho0).astype(complex)
    t0 = rho0.t if isinstance(rho0, DensityMatrix) else 0.0
    n = r0.shape[0]
    if h.shape != (n, n):
        raise ValidationError(f"H is {h.shape} but rho is {r0.shape}")
    if np.max(np.abs(r0 - r0.conj().T)) > 1e-10:
        raise ValidationError("rho0 must be Hermitian")
    if abs(np.trace(r0).real - 1.0) > 1e-8:
        raise ValidationError("rho0 must have unit trace")
    mode = CorrelationMode(mode)
    weights = dephasing_weights(n, mode)

    if form == "lindblad":
        if mode is not CorrelationMode.CORRELATED:
            raise ValidationError("the Lindblad form describes correlated noise only")
        if method != "rk4":
            raise ValidationError("the Lindblad form is integrated with rk4 only")
        rhs = lambda t, r: lindblad_rhs(r, h, schedule.rate_at(t))  # noqa: E731
    elif form == "network":
        rhs = lambda t, r: master_rhs(r, h, schedule, mode, t, weights)  # noqa: E731
    else:
        raise ValidationError(f"unknown form {form!r}")

    if method == "rk4":
        n_steps, dt = grid.resolve(rk4_step_size(h, schedule, weights))
        stepper = lambda t, r, _dt=dt: rk4_step(rhs, t, r, _dt)  # noqa: E731
    elif method == "etd":
        etd = _ETDStepper(h, schedule, weights)
        n_steps, dt = grid.resolve(etd.max_step)
        stepper = lambda t, r, _dt=dt: etd.advance(t, r, _dt)  # noqa: E731
    else:
        raise ValidationError(f"unknown method {method!r}")

    wanted = set(grid.output_steps(n_steps))
    out = [DensityMatrix(r0.copy(), t0)]
    r = r0.copy()
    for step in range(1, n_steps + 1):
        r = stepper(t0 + (step - 1) * dt, r)
        if step in wanted:
            t = t0 + step * dt
            _check(r, t)
            out.append(DensityMatrix(r.copy(), t))

    leak = boundary_leakage(np.array([d.populations for d in out]))
    if leak > LEAKAGE_WARN:
        log.warning("boundary leakage %.2e exceeds %.0e; try num_sites=%d", leak, LEAKAGE_WARN, 2 * n)
    return out


class _ETDStepper:
    """ETDRK4 for d(rho)/dt = Lambda(t) * rho - i[K, rho] (elementwise Lambda).

    The integrating factor uses the rate's exact average over each substep;
    the remainder (rate(t) - average) * B * rho joins the explicit terms, so
    the scheme stays fourth order for time-dependent rates.  Substeps are
    shortened where the rate changes quickly (see :func:`rate_step`).
    Tridiagonal hopping runs through a compiled kernel when numba is present.
    """

    def __init__(self, h: np.ndarray, schedule: DephasingSchedule, weights: np.ndarray):
        self.schedule = schedule
        n = h.shape[0]
        diag = np.real(np.diag(h))
        off = h - np.diag(np.diag(h))
        upper = np.diagonal(off, 1).copy()
        tridiagonal = n > 1 and not np.any(np.triu(off, 2)) and np.allclose(upper.conj(), np.diagonal(off, -1))
        self.compiled = USE_COMPILED and _kernels is not None and tridiagonal
        self.max_step = etd_step_size(h)
        detune = diag[:, None] - diag[None, :]
        # the linear part is rate * B - i * detune; index its distinct values
        key = weights - 1j * detune
        uniq, inv = np.unique(key.ravel(), return_inverse=True)
        self._b = uniq.real
        self._detune = -uniq.imag
        self._inv = inv.reshape(n, n)
        self._weights = weights
        self._cache: Dict[Tuple[float, float], object] = {}
        if self.compiled:
            p = n + 2
            self._inv_p = np.zeros((p, p), dtype=np.int64)
            self._inv_p[1:-1, 1:-1] = self._inv
            self._w_p = np.zeros((p, p))
            self._w_p[1:-1, 1:-1] = weights
            # stencil coefficients: K[i, i+1], K[i, i-1], K[j-1, j], K[j+1, j]
            ca = np.zeros(p, dtype=complex)
            cb = np.zeros(p, dtype=complex)
            ca[1:n] = upper
            cb[2:n + 1] = upper.conj()
            self._stencil = (ca, cb, cb.conj(), ca.conj())
            self._bufs = [np.zeros((p, p), dtype=complex) for _ in range(8)]
        else:
            self.hop = sp.csr_matrix(off)

    def _coefficients(self, step: float, mean_rate: float):
        key = (step, mean_rate)
        c = self._cache.get(key)
        if c is None:
            lin = mean_rate * self._b - 1j * self._detune
            c = etd_coefficients(lin, step)
            if not self.compiled:
                for name in ("e", "e_half", "q", "f1", "f2", "f3"):
                    setattr(c, name, getattr(c, name)[self._inv])
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[key] = c
        return c

    def _nonlin(self, _t, r):
        kr = self.hop @ r
        return -1j * (kr - kr.conj().T)

    def advance(self, t: float, r: np.ndarray, dt: float) -> np.ndarray:
        s = self.schedule
        end = t + dt
        if self.compiled:
            u, out = self._bufs[0], self._bufs[1]
            u[1:-1, 1:-1] = r
        while True:
            remaining = end - t
            if remaining <= 1e-12 * max(1.0, abs(end)):
                break
            step = rate_step(s, t, min(remaining, self.max_step))
            if step < remaining and remaining - step < 0.25 * step:
                step = 0.5 * remaining
            if step >= remaining:
                step = remaining
            if s.kind is ScheduleKind.CONSTANT:
                mean_rate = s.gamma
                deltas = (0.0, 0.0, 0.0)
            else:
                mean_rate = (s.integral(t + step) - s.integral(t)) / step
                deltas = tuple(s.rate_at(t + f * step) - mean_rate for f in (0.0, 0.5, 1.0))
            c = self._coefficients(step, mean_rate)
            if self.compiled:
                _kernels.etdrk4_tridiagonal(u, *self._stencil, self._inv_p, c.e, c.e_half, c.q, c.f1, c.f2, c.f3,
                                            self._w_p, *deltas, out, *self._bufs[2:])
                u, out = out, u
            else:
                def nonlin(tt, rr, _d=dict(zip((t, t + 0.5 * step, t + step), deltas))):
                    extra = _d.get(tt, 0.0)
                    base = self._nonlin(tt, rr)
                    return base + extra * self._weights * rr if extra else base
                r = etdrk4_step(c, nonlin, t, r, step)
            t = t + step if step < remaining else end
        if self.compiled:
            self._bufs[0], self._bufs[1] = u, out
            return u[1:-1, 1:-1].copy()
        return r
